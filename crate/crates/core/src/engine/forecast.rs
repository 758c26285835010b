//! Rolling out-of-sample VaR and ES forecasts for every model and level.
//!
//! The forecast for out-of-sample position `t` only reads returns before
//! `t`. GARCH and QR parameters are re-estimated on an expanding window
//! every `refit_cadence` days, counted from the first out-of-sample day.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::empirical::{build_design, qr_fit, qr_predict, regressor_row, QrFit, WeightedSample};
use crate::error::{Error, Result};
use crate::esbridge::{es_discretized, es_nodes};
use crate::garch::{es_closed_form, fit, forecast_after, var_closed_form, FittedModel, GarchVariant};
use crate::ingest::{split_sample, DatedColumns, ReturnSeries};
use crate::numerics::stats::{quantile_sorted, sorted_copy};
use crate::risk::TailSide;

use super::config::{ModelSpec, RunConfig};

/// One return series with its in-sample/out-of-sample boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesData {
    pub name: String,
    pub market: String,
    pub contract: String,
    pub returns: ReturnSeries,
    /// Number of in-sample returns; forecasting starts at this index.
    pub in_sample_len: usize,
}

impl SeriesData {
    /// Splits `returns` after `split_date`.
    pub fn new(name: &str, market: &str, contract: &str, returns: ReturnSeries, split_date: NaiveDate) -> Result<Self> {
        let (ins, _) = split_sample(&returns, split_date)?;
        Ok(Self::with_split_index(name, market, contract, returns, ins.len()))
    }

    pub fn with_split_index(
        name: &str,
        market: &str,
        contract: &str,
        returns: ReturnSeries,
        in_sample_len: usize,
    ) -> Self {
        Self {
            name: name.into(),
            market: market.into(),
            contract: contract.into(),
            returns,
            in_sample_len,
        }
    }

    pub fn in_sample(&self) -> ReturnSeries {
        self.returns.slice(0..self.in_sample_len)
    }

    pub fn out_of_sample(&self) -> ReturnSeries {
        self.returns.slice(self.in_sample_len..self.returns.len())
    }
}

/// Forecast paths at one level over the out-of-sample days.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskPath {
    pub alpha: f64,
    pub var: Vec<f64>,
    pub es: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelForecasts {
    pub model: ModelSpec,
    /// One path per configured level, or why the model is unavailable.
    pub outcome: std::result::Result<Vec<RiskPath>, String>,
    /// Re-fits that failed and kept the previous estimate.
    pub notes: Vec<String>,
    /// In-sample estimate as key = value lines.
    pub fit_record: Option<String>,
    /// In-sample GARCH-family fit, when the model has one.
    pub garch_fit: Option<FittedModel>,
}

impl ModelForecasts {
    fn unavailable(model: ModelSpec, reason: String) -> Self {
        Self {
            model,
            outcome: Err(reason),
            notes: Vec::new(),
            fit_record: None,
            garch_fit: None,
        }
    }

    pub fn path(&self, alpha: f64) -> Option<&RiskPath> {
        self.outcome.as_ref().ok()?.iter().find(|p| p.alpha == alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    pub series: SeriesData,
    pub models: Vec<ModelForecasts>,
}

/// Forecasts for every series, model and level.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPanel {
    pub series: Vec<SeriesPanel>,
}

/// One (date, model, level) entry of a [`ForecastPanel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRow<'a> {
    pub series: &'a str,
    pub model: ModelSpec,
    pub date: NaiveDate,
    pub alpha: f64,
    pub side: TailSide,
    pub var: f64,
    pub es: f64,
    pub realized: f64,
    pub hit: bool,
}

impl ForecastPanel {
    /// Available forecasts ordered by series, model, level and date.
    pub fn rows(&self) -> impl Iterator<Item = PanelRow<'_>> + '_ {
        self.series.iter().flat_map(|sp| {
            let oos = sp.series.in_sample_len;
            let dates = &sp.series.returns.dates()[oos..];
            let values = &sp.series.returns.values()[oos..];
            sp.models.iter().flat_map(move |m| {
                m.outcome.iter().flatten().flat_map(move |path| {
                    let side = TailSide::of(path.alpha);
                    (0..dates.len()).map(move |t| PanelRow {
                        series: &sp.series.name,
                        model: m.model,
                        date: dates[t],
                        alpha: path.alpha,
                        side,
                        var: path.var[t],
                        es: path.es[t],
                        realized: values[t],
                        hit: side.is_hit(values[t], path.var[t]),
                    })
                })
            })
        })
    }
}

/// Runs every configured model on one series. Models are independent: a
/// failing model never changes another model's forecasts.
pub fn forecast_series(series: &SeriesData, fuels: Option<&DatedColumns>, cfg: &RunConfig) -> Result<SeriesPanel> {
    let n = series.returns.len();
    if series.in_sample_len == 0 || series.in_sample_len >= n {
        return Err(Error::Degenerate(format!(
            "series {} needs non-empty in-sample and out-of-sample parts (split at {} of {n})",
            series.name, series.in_sample_len
        )));
    }
    let models = cfg
        .models
        .par_iter()
        .map(|&model| forecast_model(model, series, fuels, cfg))
        .collect();
    Ok(SeriesPanel {
        series: series.clone(),
        models,
    })
}

pub fn forecast_model(
    model: ModelSpec,
    series: &SeriesData,
    fuels: Option<&DatedColumns>,
    cfg: &RunConfig,
) -> ModelForecasts {
    let result = match model {
        ModelSpec::Garch => garch_paths(GarchVariant::Garch, series, cfg),
        ModelSpec::Egarch => garch_paths(GarchVariant::Egarch, series, cfg),
        ModelSpec::Gjr => garch_paths(GarchVariant::Gjr, series, cfg),
        ModelSpec::Hs => hs_paths(series, cfg),
        ModelSpec::Ewqr => ewqr_paths(series, cfg),
        ModelSpec::QrCom => match fuels {
            Some(f) => qr_paths(series, f, cfg),
            None => Err(Error::Config {
                field: "fuel".into(),
                message: "QR-COM needs fuel price series".into(),
            }),
        },
    };
    match result {
        Ok(mut m) => {
            m.model = model;
            m
        }
        Err(e) => ModelForecasts::unavailable(model, e.to_string()),
    }
}

/// Out-of-sample positions (as absolute indices) where parameters are re-estimated.
fn refit_points(series: &SeriesData, cadence: usize) -> Vec<usize> {
    let n = series.returns.len();
    if cadence == 0 {
        vec![series.in_sample_len]
    } else {
        (series.in_sample_len..n).step_by(cadence).collect()
    }
}

fn refit_note(series: &SeriesData, t: usize, e: &Error) -> String {
    format!(
        "re-fit on data through {} failed ({e}); kept the previous estimate",
        series.returns.dates()[t - 1]
    )
}

fn garch_paths(variant: GarchVariant, series: &SeriesData, cfg: &RunConfig) -> Result<ModelForecasts> {
    let r = series.returns.values();
    let refits = refit_points(series, cfg.refit_cadence);
    let initial = fit(&r[..series.in_sample_len], variant)?;
    let mut current = initial.clone();
    let mut notes = Vec::new();
    let mut paths: Vec<RiskPath> = cfg
        .levels
        .iter()
        .map(|&alpha| RiskPath {
            alpha,
            var: Vec::new(),
            es: Vec::new(),
        })
        .collect();
    for t in series.in_sample_len..r.len() {
        if t != series.in_sample_len && refits.binary_search(&t).is_ok() {
            match fit(&r[..t], variant) {
                Ok(m) => current = m,
                Err(e) => notes.push(refit_note(series, t, &e)),
            }
        }
        let cm = forecast_after(&current, &r[..t])?;
        for path in paths.iter_mut() {
            path.var.push(var_closed_form(&cm, current.params.nu, path.alpha)?);
            path.es.push(es_closed_form(&cm, current.params.nu, path.alpha)?);
        }
    }
    Ok(ModelForecasts {
        model: ModelSpec::Garch,
        outcome: Ok(paths),
        notes,
        fit_record: Some(initial.to_record()),
        garch_fit: Some(initial),
    })
}

/// Every level needed to forecast VaR at the configured levels and ES
/// through their integration nodes, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    levels: Vec<f64>,
}

impl LevelGrid {
    pub fn new(levels: &[f64]) -> Self {
        let mut all: Vec<f64> = levels.iter().flat_map(|&a| es_nodes(a, TailSide::of(a))).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        Self { levels: all }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    fn index(&self, a: f64) -> Result<usize> {
        self.levels
            .binary_search_by(|x| x.total_cmp(&a))
            .map_err(|_| Error::param("level", format!("{a} is not on the forecast grid")))
    }

    /// Sorts one date's grid quantiles (rearrangement, so quantiles never
    /// cross), then reads VaR and node-averaged ES at each level.
    pub fn assemble(&self, mut q: Vec<f64>, levels: &[f64]) -> Result<Vec<(f64, f64)>> {
        if let Some(i) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "non-finite quantile forecast at level {}",
                self.levels[i]
            )));
        }
        q.sort_by(f64::total_cmp);
        levels
            .iter()
            .map(|&a| {
                let var = q[self.index(a)?];
                let es = es_discretized(|node| Ok(q[self.index(node)?]), a, TailSide::of(a))?;
                Ok((var, es))
            })
            .collect()
    }
}

fn grid_paths<F>(series: &SeriesData, cfg: &RunConfig, mut quantiles: F) -> Result<Vec<RiskPath>>
where
    F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
{
    let grid = LevelGrid::new(&cfg.levels);
    let mut paths: Vec<RiskPath> = cfg
        .levels
        .iter()
        .map(|&alpha| RiskPath {
            alpha,
            var: Vec::new(),
            es: Vec::new(),
        })
        .collect();
    for t in series.in_sample_len..series.returns.len() {
        let q = quantiles(t, grid.levels())?;
        for (path, (var, es)) in paths.iter_mut().zip(grid.assemble(q, &cfg.levels)?) {
            path.var.push(var);
            path.es.push(es);
        }
    }
    Ok(paths)
}

fn hs_paths(series: &SeriesData, cfg: &RunConfig) -> Result<ModelForecasts> {
    let r = series.returns.values();
    let w = cfg.hs_window;
    if series.in_sample_len < w {
        return Err(Error::TooShort {
            needed: w,
            have: series.in_sample_len,
        });
    }
    let paths = grid_paths(series, cfg, |t, levels| {
        let sorted = sorted_copy(&r[t - w..t]);
        Ok(levels.iter().map(|&a| quantile_sorted(&sorted, a)).collect())
    })?;
    Ok(ModelForecasts {
        model: ModelSpec::Hs,
        outcome: Ok(paths),
        notes: Vec::new(),
        fit_record: None,
        garch_fit: None,
    })
}

fn ewqr_paths(series: &SeriesData, cfg: &RunConfig) -> Result<ModelForecasts> {
    let r = series.returns.values();
    let paths = grid_paths(series, cfg, |t, levels| {
        let sample = WeightedSample::exponential(&r[..t], cfg.ewqr_lambda)?;
        levels.iter().map(|&a| sample.quantile(a, cfg.ewqr_rule)).collect()
    })?;
    Ok(ModelForecasts {
        model: ModelSpec::Ewqr,
        outcome: Ok(paths),
        notes: Vec::new(),
        fit_record: None,
        garch_fit: None,
    })
}

fn qr_fits(series: &SeriesData, t: usize, fuels: &DatedColumns, levels: &[f64]) -> Result<Vec<QrFit>> {
    let design = build_design(&series.returns.slice(0..t), Some(fuels))?;
    levels.iter().map(|&a| qr_fit(&design, a)).collect()
}

fn qr_paths(series: &SeriesData, fuels: &DatedColumns, cfg: &RunConfig) -> Result<ModelForecasts> {
    let grid = LevelGrid::new(&cfg.levels);
    let refits = refit_points(series, cfg.refit_cadence);
    let initial = qr_fits(series, series.in_sample_len, fuels, grid.levels())?;
    let fit_record = cfg
        .levels
        .iter()
        .map(|&a| grid.index(a).map(|i| initial[i].to_record()))
        .collect::<Result<Vec<_>>>()?
        .join("\n");
    let dates = series.returns.dates();
    let r = series.returns.values();
    let mut current = initial;
    let mut notes = Vec::new();
    let paths = grid_paths(series, cfg, |t, _| {
        if t != series.in_sample_len && refits.binary_search(&t).is_ok() {
            match qr_fits(series, t, fuels, grid.levels()) {
                Ok(f) => current = f,
                Err(e) => notes.push(refit_note(series, t, &e)),
            }
        }
        let row = regressor_row(&dates[..t], &r[..t], Some(fuels)).ok_or_else(|| {
            Error::Degenerate(format!(
                "no regressor row for {}: fuel history does not cover the two prior days",
                dates[t]
            ))
        })?;
        current.iter().map(|f| qr_predict(f, &row)).collect()
    })?;
    Ok(ModelForecasts {
        model: ModelSpec::QrCom,
        outcome: Ok(paths),
        notes,
        fit_record: Some(fit_record),
        garch_fit: None,
    })
}
