//! Non-parametric and regression-based VaR forecasters: historical
//! simulation, exponentially weighted quantiles and quantile regression on
//! volatility and fuel-price regressors.

mod qr;
mod regressors;
mod weighted;

pub use qr::{pinball, qr_fit, qr_predict, QrFit, INTERCEPT, ROWS_PER_COEFFICIENT};
pub use regressors::{
    build_design, build_vol_regressors, fuel_row, regressor_names, regressor_row, vol_row, QrDesign, VolRegressors,
    MONTHLY_WINDOW, VOL_NAMES, VOL_WARM_UP, WEEKLY_WINDOW,
};
pub use weighted::{ewqr_var, hs_var, QuantileRule, WeightedSample, DEFAULT_LAMBDA, HS_WINDOW};
