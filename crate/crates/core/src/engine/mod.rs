//! Pipeline orchestration: configuration, rolling forecasts, the backtest
//! battery and report files.

mod config;
mod evaluate;
mod forecast;
mod report;
mod synthetic;

pub use config::{
    parse_config, parse_config_str, parse_model_list, validate_levels, ModelSpec, ReportFormat, RollSource, RunConfig,
    SeriesInput, DEFAULT_LEVELS, DEFAULT_REFIT_CADENCE, DEFAULT_SEED, MIN_UN_PATHS,
};
pub use evaluate::{
    descriptive_table, load_inputs, run_backtest, run_on_series, series_details, summarize_adequacy, tail_index_table,
    violation_table, AdequacyRow, DescriptiveRow, DetailRow, FitRecord, ReportBundle, TailRow, ViolationRow,
    FISHER_TAIL,
};
pub use forecast::{
    forecast_model, forecast_series, ForecastPanel, LevelGrid, ModelForecasts, PanelRow, RiskPath, SeriesData,
    SeriesPanel,
};
pub use report::{
    adequacy_report, descriptive_report, detail_report, fixed, forecast_report, level_label, percent, render_report,
    tail_report, trimmed, violation_report, Table,
};
pub use synthetic::{prices_from_returns, simulate_fuels, write_dated_columns, write_prices};
