//! Backward-looking regressors for the quantile regression model.
//!
//! Every regressor attached to return `j` only uses information dated
//! `j - 1` or earlier.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::{DatedColumns, ReturnSeries};

pub const VOL_NAMES: [&str; 3] = ["vol_daily", "vol_weekly", "vol_monthly"];
pub const WEEKLY_WINDOW: usize = 5;
pub const MONTHLY_WINDOW: usize = 21;
/// Index of the first return with a complete volatility row.
pub const VOL_WARM_UP: usize = MONTHLY_WINDOW;

/// Sample standard deviation computed on values shifted by the first one,
/// so a constant window gives exactly zero.
fn shifted_std(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    let n = xs.len() as f64;
    let (s, ss) = xs.iter().fold((0.0, 0.0), |(s, ss), x| {
        let d = x - x0;
        (s + d, ss + d * d)
    });
    ((ss - s * s / n) / (n - 1.0)).max(0.0).sqrt()
}

/// Volatility regressors for the return that follows `prefix`.
pub fn vol_row(prefix: &[f64]) -> Option<[f64; 3]> {
    let n = prefix.len();
    if n < MONTHLY_WINDOW {
        return None;
    }
    Some([
        prefix[n - 1].abs(),
        shifted_std(&prefix[n - WEEKLY_WINDOW..]),
        shifted_std(&prefix[n - MONTHLY_WINDOW..]),
    ])
}

/// Volatility columns for returns `first_row..r.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolRegressors {
    pub first_row: usize,
    pub daily: Vec<f64>,
    pub weekly: Vec<f64>,
    pub monthly: Vec<f64>,
}

pub fn build_vol_regressors(r: &[f64]) -> Result<VolRegressors> {
    if r.len() < VOL_WARM_UP + 1 {
        return Err(Error::TooShort {
            needed: VOL_WARM_UP + 1,
            have: r.len(),
        });
    }
    let mut out = VolRegressors {
        first_row: VOL_WARM_UP,
        daily: vec![],
        weekly: vec![],
        monthly: vec![],
    };
    for j in VOL_WARM_UP..r.len() {
        let [d, w, m] = vol_row(&r[..j]).expect("warm-up reached");
        out.daily.push(d);
        out.weekly.push(w);
        out.monthly.push(m);
    }
    Ok(out)
}

/// Fuel log returns known at the end of the last day in `prefix_dates`:
/// `ln F(d[-1]) - ln F(d[-2])`, with each fuel taken as of those dates.
pub fn fuel_row(prefix_dates: &[NaiveDate], fuels: &DatedColumns) -> Option<Vec<f64>> {
    let n = prefix_dates.len();
    if n < 2 {
        return None;
    }
    (0..fuels.names.len())
        .map(|c| {
            let now = fuels.as_of(c, prefix_dates[n - 1])?;
            let before = fuels.as_of(c, prefix_dates[n - 2])?;
            Some((now / before).ln())
        })
        .collect()
}

pub fn regressor_names(fuels: Option<&DatedColumns>) -> Vec<String> {
    let mut names: Vec<String> = VOL_NAMES.iter().map(|s| s.to_string()).collect();
    if let Some(f) = fuels {
        names.extend(f.names.iter().map(|n| format!("fuel_{n}")));
    }
    names
}

/// Full regressor row for the return following the prefix given by
/// `dates` and `values`.
pub fn regressor_row(dates: &[NaiveDate], values: &[f64], fuels: Option<&DatedColumns>) -> Option<Vec<f64>> {
    let mut row = vol_row(values)?.to_vec();
    if let Some(f) = fuels {
        row.extend(fuel_row(dates, f)?);
    }
    Some(row)
}

/// Response and regressor matrix (without intercept) for quantile regression.
#[derive(Debug, Clone, PartialEq)]
pub struct QrDesign {
    /// Dates of the response rows; empty for designs built from raw arrays.
    pub dates: Vec<NaiveDate>,
    pub response: Vec<f64>,
    /// Row-major regressors, one row per response value.
    pub rows: Vec<Vec<f64>>,
    pub names: Vec<String>,
}

impl QrDesign {
    pub fn new(response: Vec<f64>, rows: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if response.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: response.len(),
                right: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: names.len(),
            });
        }
        if response.iter().chain(rows.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("design contains non-finite cells".into()));
        }
        Ok(Self {
            dates: Vec::new(),
            response,
            rows,
            names,
        })
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn n_regressors(&self) -> usize {
        self.names.len()
    }
}

/// Builds the design over `r`, dropping rows without complete history.
pub fn build_design(r: &ReturnSeries, fuels: Option<&DatedColumns>) -> Result<QrDesign> {
    let names = regressor_names(fuels);
    let mut dates = Vec::new();
    let mut response = Vec::new();
    let mut rows = Vec::new();
    for j in VOL_WARM_UP..r.len() {
        if let Some(row) = regressor_row(&r.dates()[..j], &r.values()[..j], fuels) {
            if row.iter().all(|v| v.is_finite()) {
                dates.push(r.dates()[j]);
                response.push(r.values()[j]);
                rows.push(row);
            }
        }
    }
    if response.is_empty() {
        return Err(Error::TooShort {
            needed: VOL_WARM_UP + 1,
            have: r.len(),
        });
    }
    Ok(QrDesign {
        dates,
        response,
        rows,
        names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::business_days;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7919 % 113) as f64 - 56.0) / 2000.0).collect()
    }

    #[test]
    fn constant_series_gives_zero_volatility() {
        let v = build_vol_regressors(&[0.013; 60]).unwrap();
        assert_eq!(v.first_row, 21);
        assert_eq!(v.daily.len(), 39);
        assert!(v.weekly.iter().chain(&v.monthly).all(|x| *x == 0.0));
        assert!(v.daily.iter().all(|x| *x == 0.013));
    }

    #[test]
    fn spike_only_affects_later_rows() {
        let mut r = vec![0.001; 60];
        r[40] = 0.2;
        let v = build_vol_regressors(&r).unwrap();
        let at = |j: usize| j - v.first_row;
        assert_eq!(v.daily[at(40)], 0.001);
        assert_eq!(v.weekly[at(40)], 0.0);
        assert_eq!(v.daily[at(41)], 0.2);
        assert!(v.weekly[at(41)] > 0.0 && v.monthly[at(41)] > 0.0);
    }

    #[test]
    fn rolling_std_oracle() {
        let r = series(200);
        let v = build_vol_regressors(&r).unwrap();
        for (k, j) in (v.first_row..r.len()).enumerate() {
            for (len, col) in [(5, &v.weekly), (21, &v.monthly)] {
                let w = &r[j - len..j];
                let m = w.iter().sum::<f64>() / len as f64;
                let s = (w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (len - 1) as f64).sqrt();
                assert!((col[k] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn short_input_is_rejected() {
        assert!(matches!(build_vol_regressors(&[0.0; 21]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn fuel_returns_are_lagged_as_of_values() {
        let fuels = DatedColumns {
            dates: vec![d("2008-01-02"), d("2008-01-03"), d("2008-01-07")],
            names: vec!["gas".into()],
            values: vec![vec![20.0, 22.0, 11.0]],
        };
        // Jan 4 has no fuel quote: as-of value is Jan 3's
        let row = fuel_row(&[d("2008-01-03"), d("2008-01-04")], &fuels).unwrap();
        assert_eq!(row, vec![0.0]);
        let row = fuel_row(&[d("2008-01-02"), d("2008-01-03")], &fuels).unwrap();
        assert!((row[0] - (22.0f64 / 20.0).ln()).abs() < 1e-15);
        assert!(fuel_row(&[d("2008-01-01"), d("2008-01-02")], &fuels).is_none());
    }

    #[test]
    fn design_rows_are_backward_looking() {
        let values = series(80);
        let r = ReturnSeries::new(business_days(d("2008-01-02"), 80), values.clone()).unwrap();
        let design = build_design(&r, None).unwrap();
        assert_eq!(design.len(), 80 - 21);
        assert_eq!(design.response[0], values[21]);
        assert_eq!(design.rows[0][0], values[20].abs());
        assert_eq!(design.names, VOL_NAMES);
    }
}
