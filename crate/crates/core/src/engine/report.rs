//! Writes a [`ReportBundle`] as one file per table.
//!
//! Output is byte-stable: rows follow the bundle order and numbers use fixed
//! precision (four decimals for statistics, two for percentages).

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::ReportFormat;
use super::evaluate::{AdequacyRow, DescriptiveRow, DetailRow, ReportBundle, TailRow, ViolationRow};
use super::forecast::ForecastPanel;

const NA: &str = "NA";

/// Rounds half away from zero to `decimals` places and prints exactly that many.
pub fn fixed(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return NA.into();
    }
    let scale = 10f64.powi(decimals as i32);
    let y = (x * scale).round() / scale;
    let y = if y == 0.0 { 0.0 } else { y };
    format!("{y:.decimals$}")
}

/// As [`fixed`] with trailing zeros dropped: 34.90 prints as `34.9`.
pub fn trimmed(x: f64, decimals: usize) -> String {
    let s = fixed(x, decimals);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A ratio printed as a percentage with two decimals: 1.052786 -> `105.28%`.
pub fn percent(x: f64) -> String {
    if x.is_finite() {
        format!("{}%", fixed(100.0 * x, 2))
    } else {
        NA.into()
    }
}

/// Level label such as `1%` or `95%`.
pub fn level_label(alpha: f64) -> String {
    format!("{}%", trimmed(100.0 * alpha, 2))
}

fn stat(x: f64) -> String {
    fixed(x, 4)
}

fn opt(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map_or_else(|| NA.to_string(), f)
}

fn share(num: usize, den: usize) -> String {
    if den == 0 {
        NA.into()
    } else {
        fixed(num as f64 / den as f64, 2)
    }
}

/// A rectangular table of preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Io {
            path: "csv buffer".into(),
            message: e.to_string(),
        };
        w.write_record(&self.headers).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "csv buffer".into(),
            message: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Space-aligned columns; text columns left-aligned, numbers right-aligned.
    pub fn to_text(&self) -> String {
        let ncol = self.headers.len();
        let mut width = vec![0; ncol];
        for r in std::iter::once(&self.headers).chain(&self.rows) {
            for (i, c) in r.iter().enumerate() {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let numeric: Vec<bool> = (0..ncol)
            .map(|i| {
                self.rows.iter().all(|r| {
                    let c = r[i].trim_end_matches('%');
                    c == NA || c.parse::<f64>().is_ok()
                }) && !self.rows.is_empty()
            })
            .collect();
        let mut out = String::new();
        for r in std::iter::once(&self.headers).chain(&self.rows) {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if numeric[i] {
                        format!("{c:>w$}", w = width[i])
                    } else {
                        format!("{c:<w$}", w = width[i])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Table => Ok(self.to_text()),
        }
    }
}

pub fn descriptive_report(rows: &[DescriptiveRow]) -> Table {
    let mut t = Table::new(&[
        "series",
        "sample",
        "n",
        "mean",
        "std_dev",
        "min",
        "max",
        "skewness",
        "kurtosis",
        "q01",
        "q05",
        "q95",
        "q99",
        "jarque_bera_p",
        "lb10_q",
        "lb10_p",
        "lb20_q",
        "lb20_p",
    ]);
    for r in rows {
        let mut cells = vec![r.series.clone(), r.sample.to_string()];
        match &r.stats {
            Ok(s) => {
                cells.push(s.n_observations.to_string());
                cells.extend([s.mean, s.std_dev, s.min, s.max, s.skewness, s.kurtosis].map(stat));
                cells.extend(s.quantiles.map(stat));
                cells.push(stat(s.jarque_bera_pvalue));
                for lag in [10, 20] {
                    match s.ljung_box.iter().find(|l| l.lag == lag) {
                        Some(l) => cells.extend([stat(l.q), stat(l.p_value)]),
                        None => cells.extend([NA.to_string(), NA.to_string()]),
                    }
                }
            }
            Err(_) => cells.extend((0..16).map(|_| NA.to_string())),
        }
        t.rows.push(cells);
    }
    t
}

pub fn adequacy_report(rows: &[AdequacyRow]) -> Table {
    let mut t = Table::new(&[
        "measure",
        "scope",
        "model",
        "cells",
        "GT",
        "%GT",
        "cells_left",
        "GTL",
        "%GTL",
        "cells_right",
        "GTR",
        "%GTR",
        "inconsistent",
    ]);
    for r in rows {
        t.rows.push(vec![
            r.measure.to_string(),
            r.scope.clone(),
            r.model.label().to_string(),
            r.cells.to_string(),
            r.accepted.to_string(),
            share(r.accepted, r.cells),
            r.left_cells.to_string(),
            r.left_accepted.to_string(),
            share(r.left_accepted, r.left_cells),
            r.right_cells.to_string(),
            r.right_accepted.to_string(),
            share(r.right_accepted, r.right_cells),
            r.inconsistent.map_or_else(|| "-".to_string(), |n| n.to_string()),
        ]);
    }
    t
}

pub fn violation_report(rows: &[ViolationRow]) -> Table {
    let mut t = Table::new(&[
        "series",
        "contract",
        "model",
        "quantile",
        "expected",
        "failures",
        "deviation",
    ]);
    for r in rows {
        t.rows.push(vec![
            r.series.clone(),
            r.contract.clone(),
            r.model.label().to_string(),
            r.alpha.map_or_else(|| "average".to_string(), level_label),
            r.expected.map_or_else(String::new, |e| trimmed(e, 2)),
            match (r.alpha, r.failures) {
                (None, _) => String::new(),
                (Some(_), Some(f)) => f.to_string(),
                (Some(_), None) => NA.to_string(),
            },
            opt(r.deviation, percent),
        ]);
    }
    t
}

pub fn tail_report(rows: &[TailRow]) -> Table {
    let mut t = Table::new(&[
        "series",
        "alpha1",
        "beta1",
        "nu",
        "k_star_95",
        "k_star_05",
        "k_garch",
        "log_k_over_k_star_05",
        "log_k_over_k_star_95",
        "note",
    ]);
    for r in rows {
        t.rows.push(vec![
            r.series.clone(),
            opt(r.alpha1, stat),
            opt(r.beta1, stat),
            opt(r.nu, stat),
            opt(r.k_star_95, stat),
            opt(r.k_star_05, stat),
            opt(r.k_garch, stat),
            opt(r.log_ratio_05, percent),
            opt(r.log_ratio_95, percent),
            r.note.clone(),
        ]);
    }
    t
}

pub fn detail_report(rows: &[DetailRow]) -> Table {
    let mut t = Table::new(&[
        "test_name",
        "model",
        "contract",
        "market",
        "quantile",
        "side",
        "statistic",
        "p_value",
        "reject",
        "flags",
    ]);
    for r in rows {
        let head = vec![
            r.test.to_string(),
            r.model.label().to_string(),
            r.series.clone(),
            r.market.clone(),
            r.alpha.map_or_else(|| "tail".to_string(), level_label),
            r.side.to_string(),
        ];
        let tail = match &r.result {
            Ok(res) => vec![
                stat(res.statistic),
                stat(res.p_value),
                res.reject_at_1pct.to_string(),
                res.flags.join(";"),
            ],
            Err(e) => vec![NA.into(), NA.into(), NA.into(), format!("unavailable: {e}")],
        };
        t.rows.push(head.into_iter().chain(tail).collect());
    }
    t
}

pub fn forecast_report(panel: &ForecastPanel) -> Table {
    let mut t = Table::new(&[
        "series", "model", "date", "quantile", "side", "var", "es", "return", "hit",
    ]);
    for r in panel.rows() {
        t.rows.push(vec![
            r.series.to_string(),
            r.model.key().to_string(),
            r.date.to_string(),
            level_label(r.alpha),
            r.side.to_string(),
            r.var.to_string(),
            r.es.to_string(),
            r.realized.to_string(),
            u8::from(r.hit).to_string(),
        ]);
    }
    t
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes every non-empty table of `b` into `dir` and returns the paths.
pub fn render_report(b: &ReportBundle, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if b.is_empty() {
        return Err(Error::Degenerate("nothing to report: the bundle has no tables".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut tables: Vec<(&str, Table)> = Vec::new();
    if !b.descriptive.is_empty() {
        tables.push(("table2_descriptive", descriptive_report(&b.descriptive)));
    }
    if !b.adequacy.is_empty() {
        tables.push(("table3_adequacy", adequacy_report(&b.adequacy)));
    }
    if !b.violations.is_empty() {
        tables.push(("table4_violations", violation_report(&b.violations)));
    }
    if !b.tail_index.is_empty() {
        tables.push(("table5_tail_index", tail_report(&b.tail_index)));
    }
    if !b.details.is_empty() {
        tables.push(("detail_tests", detail_report(&b.details)));
    }
    if let Some(p) = &b.panel {
        tables.push(("forecasts", forecast_report(p)));
    }
    let mut written = Vec::new();
    for (stem, table) in tables {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        write(&path, &table.render(format)?)?;
        written.push(path);
    }
    if !b.fits.is_empty() {
        let text: String = b
            .fits
            .iter()
            .map(|f| format!("[{} {}]\n{}\n", f.series, f.model, f.record))
            .collect();
        let path = dir.join("fits.txt");
        write(&path, &text)?;
        written.push(path);
    }
    if !b.notes.is_empty() {
        let path = dir.join("notes.txt");
        write(&path, &(b.notes.join("\n") + "\n"))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_four_number_formats() {
        assert_eq!(trimmed(698.0 * 0.01, 2), "6.98");
        assert_eq!(trimmed(688.0 * 0.01, 2), "6.88");
        assert_eq!(trimmed(698.0 * 0.05, 2), "34.9");
        assert_eq!(trimmed(701.0 * 0.05, 2), "35.05");
        assert_eq!(percent((14.0 - 6.82) / 6.82), "105.28%");
        assert_eq!(percent((14.0 - 6.88) / 6.88), "103.49%");
        assert_eq!(level_label(0.95), "95%");
        assert_eq!(level_label(0.01), "1%");
    }

    #[test]
    fn shares_round_half_up() {
        assert_eq!(share(28, 32), "0.88");
        assert_eq!(share(15, 16), "0.94");
        assert_eq!(share(1, 8), "0.13");
        assert_eq!(share(1, 16), "0.06");
        assert_eq!(share(0, 16), "0.00");
        assert_eq!(share(0, 0), "NA");
        assert_eq!(fixed(-0.00001, 2), "0.00");
    }

    #[test]
    fn text_and_csv_layouts() {
        let mut t = Table::new(&["name", "value"]);
        t.rows.push(vec!["a,b".into(), "1.5".into()]);
        t.rows.push(vec!["long name".into(), "10.25".into()]);
        assert_eq!(t.to_csv().unwrap(), "name,value\n\"a,b\",1.5\nlong name,10.25\n");
        assert_eq!(t.to_text(), "name       value\na,b          1.5\nlong name  10.25\n");
    }

    #[test]
    fn empty_bundle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(render_report(&ReportBundle::default(), ReportFormat::Csv, dir.path()).is_err());
    }
}
