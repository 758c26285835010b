//! Backtest battery per forecast cell and the report tables built from it.

use std::collections::BTreeSet;
use std::fs::File;

use rayon::prelude::*;

use crate::backtest::{
    bin_test, cci_test, consistency_check, dq_test, fisher_combine, hit_sequence, pof_test, un_test, CalibrationCache,
    Consistency, TestResult, UnReference,
};
use crate::error::{Error, Result};
use crate::garch::{fit, FittedModel, GarchVariant};
use crate::ingest::{
    compute_returns, descriptive_stats, load_dated_columns, load_price_series, load_roll_calendar, DatedColumns,
    ReturnSeries, RollRule, StatsSummary,
};
use crate::risk::TailSide;
use crate::tailindex::{empirical_tail_index, garch_tail_index, tail_comparison, Innovation};

use super::config::{ModelSpec, RollSource, RunConfig};
use super::forecast::{forecast_series, ForecastPanel, RiskPath, SeriesData, SeriesPanel};

pub const FISHER_TAIL: &str = "Fisher-tail";

/// One backtest outcome for a (series, model, level) cell, or for a whole
/// tail in the case of the per-tail Fisher combination.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailRow {
    pub series: String,
    pub market: String,
    pub contract: String,
    pub model: ModelSpec,
    pub test: &'static str,
    /// `None` for per-tail rows.
    pub alpha: Option<f64>,
    pub side: TailSide,
    /// The test, or why it could not be run.
    pub result: std::result::Result<TestResult, String>,
}

impl DetailRow {
    pub fn accepted(&self) -> bool {
        matches!(&self.result, Ok(r) if !r.reject_at_1pct)
    }
}

/// Table 2 row: descriptive statistics of one sample of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveRow {
    pub series: String,
    pub sample: &'static str,
    pub stats: std::result::Result<StatsSummary, String>,
}

/// Table 3 row: Fisher (VaR) or UN (ES) non-rejection counts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdequacyRow {
    pub measure: &'static str,
    /// `all`, `contract <name>` or `market <name>`.
    pub scope: String,
    pub model: ModelSpec,
    pub cells: usize,
    pub accepted: usize,
    pub left_cells: usize,
    pub left_accepted: usize,
    pub right_cells: usize,
    pub right_accepted: usize,
    /// ES only: cells where UN-N accepts and UN-t rejects.
    pub inconsistent: Option<usize>,
}

/// Table 4 row. `alpha == None` marks the average-deviation row; rows with
/// `series == "average"` average the per-series averages within a contract.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRow {
    pub series: String,
    pub contract: String,
    pub model: ModelSpec,
    pub alpha: Option<f64>,
    pub expected: Option<f64>,
    pub failures: Option<usize>,
    pub deviation: Option<f64>,
}

/// Table 5 row; `series == "Average"` holds column means.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub series: String,
    pub alpha1: Option<f64>,
    pub beta1: Option<f64>,
    pub nu: Option<f64>,
    pub k_garch: Option<f64>,
    pub k_star_95: Option<f64>,
    pub k_star_05: Option<f64>,
    /// `ln(k / k*)` against the 5% and 95% tails.
    pub log_ratio_05: Option<f64>,
    pub log_ratio_95: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub series: String,
    pub model: ModelSpec,
    pub record: String,
}

/// Everything a run produces; empty vectors are tables that were not requested.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportBundle {
    pub descriptive: Vec<DescriptiveRow>,
    pub adequacy: Vec<AdequacyRow>,
    pub violations: Vec<ViolationRow>,
    pub tail_index: Vec<TailRow>,
    pub details: Vec<DetailRow>,
    pub panel: Option<ForecastPanel>,
    pub fits: Vec<FitRecord>,
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn is_empty(&self) -> bool {
        self.descriptive.is_empty() && self.details.is_empty() && self.tail_index.is_empty()
    }
}

fn open(path: &std::path::Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads every configured price file into split return series, plus fuels.
pub fn load_inputs(cfg: &RunConfig) -> Result<(Vec<SeriesData>, Option<DatedColumns>)> {
    let rule = match &cfg.rolls {
        RollSource::Input => RollRule::FromInput,
        RollSource::None => RollRule::NoRolls,
        RollSource::Monthly => RollRule::Monthly,
        RollSource::Yearly => RollRule::Yearly,
        RollSource::Calendar(p) => RollRule::Calendar(load_roll_calendar(open(p)?)?),
    };
    let mut series = Vec::with_capacity(cfg.inputs.len());
    for input in &cfg.inputs {
        let mut prices = load_price_series(open(&input.path)?, &cfg.columns)?;
        prices.apply_roll_rule(&rule);
        let returns = compute_returns(&prices)?;
        series.push(SeriesData::new(
            &input.name,
            &input.market,
            &input.contract,
            returns,
            cfg.split_date,
        )?);
    }
    let fuels = cfg
        .fuel
        .as_ref()
        .map(|p| load_dated_columns(open(p)?, &cfg.fuel_date_column))
        .transpose()?;
    Ok((series, fuels))
}

/// Loads the inputs and runs the full pipeline.
pub fn run_backtest(cfg: &RunConfig) -> Result<ReportBundle> {
    let (series, fuels) = load_inputs(cfg)?;
    run_on_series(cfg, &series, fuels.as_ref())
}

/// Full pipeline on already-loaded series: forecasts, test battery and
/// every report table.
pub fn run_on_series(cfg: &RunConfig, series: &[SeriesData], fuels: Option<&DatedColumns>) -> Result<ReportBundle> {
    if cfg.models.is_empty() {
        return Err(Error::Config {
            field: "models".into(),
            message: "at least one model is required".into(),
        });
    }
    if series.is_empty() {
        return Err(Error::Config {
            field: "input".into(),
            message: "no series to backtest".into(),
        });
    }
    let panels = series
        .par_iter()
        .map(|s| forecast_series(s, fuels, cfg))
        .collect::<Result<Vec<_>>>()?;
    let cache = CalibrationCache::new(cfg.seed, cfg.un_paths);
    let details: Vec<DetailRow> = panels
        .par_iter()
        .map(|p| series_details(p, cfg, &cache))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut notes = Vec::new();
    let mut fits = Vec::new();
    for sp in &panels {
        for m in &sp.models {
            if let Err(reason) = &m.outcome {
                notes.push(format!("{} {}: unavailable: {reason}", sp.series.name, m.model));
            }
            notes.extend(m.notes.iter().map(|n| format!("{} {}: {n}", sp.series.name, m.model)));
            if let Some(record) = &m.fit_record {
                fits.push(FitRecord {
                    series: sp.series.name.clone(),
                    model: m.model,
                    record: record.clone(),
                });
            }
        }
    }
    let garch_fits: Vec<Option<FittedModel>> = panels
        .iter()
        .map(|sp| {
            sp.models
                .iter()
                .find(|m| m.model == ModelSpec::Garch)
                .and_then(|m| m.garch_fit.clone())
        })
        .collect();
    let models = cfg.models.clone();
    Ok(ReportBundle {
        descriptive: descriptive_table(series),
        adequacy: summarize_adequacy(&details, &models),
        violations: violation_table(&panels),
        tail_index: tail_index_table(series, &garch_fits),
        details,
        panel: Some(ForecastPanel { series: panels }),
        fits,
        notes,
    })
}

fn var_battery(
    oos: &ReturnSeries,
    path: &RiskPath,
    dq_lags: usize,
) -> Vec<(&'static str, std::result::Result<TestResult, String>)> {
    let side = TailSide::of(path.alpha);
    let hits = match hit_sequence(oos, &path.var, path.alpha, side) {
        Ok(h) => h,
        Err(e) => return ["Bin", "POF", "CCI", "DQ"].map(|t| (t, Err(e.to_string()))).to_vec(),
    };
    let s = |r: Result<TestResult>| r.map_err(|e| e.to_string());
    vec![
        ("Bin", s(bin_test(&hits))),
        ("POF", s(pof_test(&hits))),
        ("CCI", s(cci_test(&hits))),
        ("DQ", s(dq_test(&hits, &path.var, dq_lags))),
    ]
}

fn fisher_over(rows: &[&std::result::Result<TestResult, String>]) -> std::result::Result<TestResult, String> {
    let p: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.as_ref()
                .map(|t| t.p_value)
                .map_err(|e| format!("component test unavailable: {e}"))
        })
        .collect::<std::result::Result<_, _>>()?;
    fisher_combine(&p).map_err(|e| e.to_string())
}

/// Bin, POF, CCI, DQ and their Fisher combination per level; UN-N and
/// UN-t per level; and a Fisher combination over each tail's levels.
pub fn series_details(sp: &SeriesPanel, cfg: &RunConfig, cache: &CalibrationCache) -> Vec<DetailRow> {
    let oos = sp.series.out_of_sample();
    let mut out = Vec::new();
    for m in &sp.models {
        let row = |test: &'static str, alpha: Option<f64>, side: TailSide, result| DetailRow {
            series: sp.series.name.clone(),
            market: sp.series.market.clone(),
            contract: sp.series.contract.clone(),
            model: m.model,
            test,
            alpha,
            side,
            result,
        };
        let mut per_tail: Vec<(TailSide, std::result::Result<TestResult, String>)> = Vec::new();
        for &alpha in &cfg.levels {
            let side = TailSide::of(alpha);
            let tests: Vec<(&'static str, std::result::Result<TestResult, String>)> = match m.path(alpha) {
                Some(path) => {
                    let mut v = var_battery(&oos, path, cfg.dq_lags);
                    let fisher = fisher_over(&v.iter().map(|(_, r)| r).collect::<Vec<_>>());
                    per_tail.extend(v.iter().map(|(_, r)| (side, r.clone())));
                    v.push(("Fisher", fisher));
                    for reference in [UnReference::Normal, UnReference::StudentT3] {
                        let p = side.hit_probability(alpha);
                        let res = cache
                            .get(reference, oos.len(), p)
                            .and_then(|cal| un_test(oos.values(), &path.var, &path.es, alpha, &cal))
                            .map_err(|e| e.to_string());
                        v.push((reference.test_name().as_str(), res));
                    }
                    v
                }
                None => {
                    let reason = match &m.outcome {
                        Err(e) => format!("model unavailable: {e}"),
                        Ok(_) => "no forecasts at this level".to_string(),
                    };
                    per_tail.extend((0..4).map(|_| (side, Err(reason.clone()))));
                    ["Bin", "POF", "CCI", "DQ", "Fisher", "UN-N", "UN-t"]
                        .map(|t| (t, Err(reason.clone())))
                        .to_vec()
                }
            };
            out.extend(tests.into_iter().map(|(t, r)| row(t, Some(alpha), side, r)));
        }
        for side in [TailSide::Left, TailSide::Right] {
            let parts: Vec<_> = per_tail.iter().filter(|(s, _)| *s == side).map(|(_, r)| r).collect();
            if !parts.is_empty() {
                out.push(row(FISHER_TAIL, None, side, fisher_over(&parts)));
            }
        }
    }
    out
}

type ScopeFilter<'a> = Box<dyn Fn(&DetailRow) -> bool + 'a>;

/// Table 3 counts per model for every scope: all series, each contract and
/// each market. Unavailable cells count as not accepted.
pub fn summarize_adequacy(details: &[DetailRow], models: &[ModelSpec]) -> Vec<AdequacyRow> {
    let contracts: BTreeSet<&str> = details
        .iter()
        .map(|d| d.contract.as_str())
        .filter(|c| !c.is_empty())
        .collect();
    let markets: BTreeSet<&str> = details
        .iter()
        .map(|d| d.market.as_str())
        .filter(|c| !c.is_empty())
        .collect();
    let mut scopes: Vec<(String, ScopeFilter<'_>)> = vec![("all".into(), Box::new(|_| true))];
    for c in contracts {
        scopes.push((format!("contract {c}"), Box::new(move |d: &DetailRow| d.contract == c)));
    }
    for mk in markets {
        scopes.push((format!("market {mk}"), Box::new(move |d: &DetailRow| d.market == mk)));
    }
    let mut out = Vec::new();
    for (measure, tests) in [("VaR", &["Fisher"][..]), ("ES", &["UN-N", "UN-t"][..])] {
        for (scope, keep) in &scopes {
            for &model in models {
                let cells: Vec<&DetailRow> = details
                    .iter()
                    .filter(|d| d.model == model && tests.contains(&d.test) && keep(d))
                    .collect();
                let count = |side: Option<TailSide>| {
                    let sel: Vec<&&DetailRow> = cells.iter().filter(|d| side.is_none_or(|s| d.side == s)).collect();
                    (sel.len(), sel.iter().filter(|d| d.accepted()).count())
                };
                let (n, a) = count(None);
                let (nl, al) = count(Some(TailSide::Left));
                let (nr, ar) = count(Some(TailSide::Right));
                let inconsistent = (measure == "ES").then(|| {
                    cells
                        .iter()
                        .filter(|d| d.test == "UN-N")
                        .filter(|un| {
                            let t = cells
                                .iter()
                                .find(|d| d.test == "UN-t" && d.series == un.series && d.alpha == un.alpha);
                            match (&un.result, t.map(|d| &d.result)) {
                                (Ok(n), Some(Ok(t))) => consistency_check(n, t) == Consistency::Inconsistent,
                                _ => false,
                            }
                        })
                        .count()
                });
                out.push(AdequacyRow {
                    measure,
                    scope: scope.clone(),
                    model,
                    cells: n,
                    accepted: a,
                    left_cells: nl,
                    left_accepted: al,
                    right_cells: nr,
                    right_accepted: ar,
                    inconsistent,
                });
            }
        }
    }
    out
}

/// Table 2: full, in-sample and out-of-sample statistics per series.
pub fn descriptive_table(series: &[SeriesData]) -> Vec<DescriptiveRow> {
    series
        .iter()
        .flat_map(|s| {
            [
                ("full", s.returns.clone()),
                ("in-sample", s.in_sample()),
                ("out-of-sample", s.out_of_sample()),
            ]
            .map(|(sample, r)| DescriptiveRow {
                series: s.name.clone(),
                sample,
                stats: descriptive_stats(&r).map_err(|e| e.to_string()),
            })
        })
        .collect()
}

/// Table 4: expected and observed VaR failures with relative deviations.
pub fn violation_table(panels: &[SeriesPanel]) -> Vec<ViolationRow> {
    let mut out = Vec::new();
    let mut averages: Vec<(String, ModelSpec, Option<f64>)> = Vec::new();
    for sp in panels {
        let oos = sp.series.out_of_sample();
        for m in &sp.models {
            let mut rows = Vec::new();
            let levels: Vec<f64> = match &m.outcome {
                Ok(paths) => paths.iter().map(|p| p.alpha).collect(),
                Err(_) => Vec::new(),
            };
            for alpha in levels {
                let path = m.path(alpha).expect("level listed from outcome");
                let side = TailSide::of(alpha);
                let (failures, expected, deviation) = match hit_sequence(&oos, &path.var, alpha, side) {
                    Ok(h) => {
                        let d = crate::backtest::deviation_record(&h);
                        (Some(d.observed_failures), Some(d.expected_failures), Some(d.deviation))
                    }
                    Err(_) => (None, None, None),
                };
                rows.push(ViolationRow {
                    series: sp.series.name.clone(),
                    contract: sp.series.contract.clone(),
                    model: m.model,
                    alpha: Some(alpha),
                    expected,
                    failures,
                    deviation,
                });
            }
            let devs: Option<Vec<f64>> = rows.iter().map(|r| r.deviation).collect();
            let avg = devs
                .filter(|d| !d.is_empty())
                .map(|d| d.iter().sum::<f64>() / d.len() as f64);
            averages.push((sp.series.contract.clone(), m.model, avg));
            out.push(ViolationRow {
                series: sp.series.name.clone(),
                contract: sp.series.contract.clone(),
                model: m.model,
                alpha: None,
                expected: None,
                failures: None,
                deviation: avg,
            });
            out.extend(rows);
        }
    }
    let contracts: BTreeSet<String> = averages.iter().map(|a| a.0.clone()).collect();
    let models: BTreeSet<ModelSpec> = averages.iter().map(|a| a.1).collect();
    for c in &contracts {
        for &model in &models {
            let vals: Option<Vec<f64>> = averages
                .iter()
                .filter(|a| &a.0 == c && a.1 == model)
                .map(|a| a.2)
                .collect();
            out.push(ViolationRow {
                series: "average".into(),
                contract: c.clone(),
                model,
                alpha: None,
                expected: None,
                failures: None,
                deviation: vals
                    .filter(|v| !v.is_empty())
                    .map(|v| v.iter().sum::<f64>() / v.len() as f64),
            });
        }
    }
    out
}

fn tail_row(s: &SeriesData, fitted: Option<&FittedModel>) -> TailRow {
    let mut row = TailRow {
        series: s.name.clone(),
        alpha1: None,
        beta1: None,
        nu: None,
        k_garch: None,
        k_star_95: None,
        k_star_05: None,
        log_ratio_05: None,
        log_ratio_95: None,
        note: String::new(),
    };
    let mut notes = Vec::new();
    let ins = s.in_sample();
    let own;
    let fitted = match fitted {
        Some(f) => Some(f),
        None => match fit(ins.values(), GarchVariant::Garch) {
            Ok(f) => {
                own = f;
                Some(&own)
            }
            Err(e) => {
                notes.push(format!("GARCH fit failed: {e}"));
                None
            }
        },
    };
    // the empirical fit runs on AR(1)-filtered returns when a fit is available
    let x: Vec<f64> = match fitted {
        Some(f) => ins
            .values()
            .windows(2)
            .map(|w| w[1] - f.params.phi0 - f.params.phi1 * w[0])
            .collect(),
        None => ins.values().to_vec(),
    };
    if let Some(f) = fitted {
        let (beta1, alpha1) = (f.params.variance[1], f.params.variance[2]);
        row.alpha1 = Some(alpha1);
        row.beta1 = Some(beta1);
        row.nu = Some(f.params.nu);
        let innovation = if f.gaussian_limit {
            Innovation::Gaussian
        } else {
            Innovation::StudentT(f.params.nu)
        };
        match garch_tail_index(alpha1, beta1, innovation) {
            Ok(k) => row.k_garch = Some(k),
            Err(e) => notes.push(format!("GARCH tail index: {e}")),
        }
    }
    for q in [0.95, 0.05] {
        match empirical_tail_index(&x, q) {
            Ok(t) => {
                if q > 0.5 {
                    row.k_star_95 = Some(t.k_star)
                } else {
                    row.k_star_05 = Some(t.k_star)
                }
            }
            Err(e) => notes.push(format!("empirical tail at {q}: {e}")),
        }
    }
    let ratio = |k_star: Option<f64>, q| {
        let (k, ks) = (row.k_garch?, k_star?);
        tail_comparison(k, ks, q).ok().map(|c| c.log_ratio)
    };
    row.log_ratio_05 = ratio(row.k_star_05, 0.05);
    row.log_ratio_95 = ratio(row.k_star_95, 0.95);
    row.note = notes.join("; ");
    row
}

/// Table 5: GARCH-implied tail index from the in-sample GARCH-t fit against
/// power-law fits on both tails of the in-sample AR(1) residuals. `fits`
/// lines up with `series`; missing fits are estimated here.
pub fn tail_index_table(series: &[SeriesData], fits: &[Option<FittedModel>]) -> Vec<TailRow> {
    let mut rows: Vec<TailRow> = series
        .par_iter()
        .enumerate()
        .map(|(i, s)| tail_row(s, fits.get(i).and_then(Option::as_ref)))
        .collect();
    if rows.len() > 1 {
        let mean = |f: fn(&TailRow) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let avg = TailRow {
            series: "Average".into(),
            alpha1: mean(|r| r.alpha1),
            beta1: mean(|r| r.beta1),
            nu: mean(|r| r.nu),
            k_garch: mean(|r| r.k_garch),
            k_star_95: mean(|r| r.k_star_95),
            k_star_05: mean(|r| r.k_star_05),
            log_ratio_05: mean(|r| r.log_ratio_05),
            log_ratio_95: mean(|r| r.log_ratio_95),
            note: String::new(),
        };
        rows.push(avg);
    }
    rows
}
