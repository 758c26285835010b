//! Continuous futures price series, log returns with roll-day handling,
//! descriptive statistics and the in-sample / out-of-sample split.

use std::collections::BTreeSet;
use std::io::Read;

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::numerics::special::chi2_sf;
use crate::numerics::stats::{autocorrelations, mean, quantile_sorted, sample_std, sorted_copy};

pub const DATE_FORMAT: &str = "%Y-%m-%d";
pub const MIN_STATS_LENGTH: usize = 30;
pub const LJUNG_BOX_LAGS: [usize; 2] = [10, 20];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceObservation {
    pub date: NaiveDate,
    pub price: f64,
    pub is_roll_day: bool,
}

/// Validated, date-ordered price series with roll-day flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    observations: Vec<PriceObservation>,
}

impl PriceSeries {
    /// Sorts by date and enforces strictly positive prices and unique dates.
    pub fn new(mut observations: Vec<PriceObservation>) -> Result<Self> {
        observations.sort_by_key(|o| o.date);
        for (i, o) in observations.iter().enumerate() {
            if !(o.price > 0.0) || !o.price.is_finite() {
                return Err(Error::NonPositivePrice { date: o.date });
            }
            if i > 0 && observations[i - 1].date == o.date {
                return Err(Error::DuplicateDate {
                    date: o.date,
                    row: i + 1,
                });
            }
        }
        Ok(Self { observations })
    }

    pub fn observations(&self) -> &[PriceObservation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|o| o.date).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.price).collect()
    }

    /// Re-derives roll flags. The first observation is never a roll day
    /// since it has no return.
    pub fn apply_roll_rule(&mut self, rule: &RollRule) {
        match rule {
            RollRule::FromInput => {}
            RollRule::NoRolls => self.observations.iter_mut().for_each(|o| o.is_roll_day = false),
            RollRule::Monthly | RollRule::Yearly => {
                let key = |d: NaiveDate| match rule {
                    RollRule::Monthly => (d.year(), d.month()),
                    _ => (d.year(), 1),
                };
                for i in 0..self.observations.len() {
                    let rolled = i > 0 && key(self.observations[i].date) != key(self.observations[i - 1].date);
                    self.observations[i].is_roll_day = rolled;
                }
            }
            RollRule::Calendar(days) => {
                for (i, o) in self.observations.iter_mut().enumerate() {
                    o.is_roll_day = i > 0 && days.contains(&o.date);
                }
            }
        }
    }
}

/// How roll days are identified in a continuous series.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RollRule {
    /// Keep the flags read from the input's roll column.
    #[default]
    FromInput,
    NoRolls,
    /// Front-month series: first trading day of each delivery month.
    Monthly,
    /// Front-year series: first trading day of each delivery year.
    Yearly,
    /// Explicit contract calendar.
    Calendar(BTreeSet<NaiveDate>),
}

/// Column names used when reading a delimited price file.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub date: String,
    pub price: String,
    pub roll: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            price: "price".into(),
            roll: None,
        }
    }
}

fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains(';') && !header.contains(',') {
        b';'
    } else {
        b','
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(mut source: impl Read) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text).map_err(|e| Error::MalformedRow {
            row: 0,
            message: e.to_string(),
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(detect_delimiter(&text))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::MalformedRow {
                row: 1,
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::MalformedRow {
                row: i + 2,
                message: e.to_string(),
            })?;
            rows.push(rec);
        }
        Ok(Self { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MalformedRow {
                row: 1,
                message: format!("missing column `{name}`"),
            })
    }
}

fn parse_date(s: &str, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, DATE_FORMAT).map_err(|_| Error::MalformedRow {
        row,
        message: format!("malformed date `{s}`"),
    })
}

fn parse_number(s: &str, row: usize, what: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::MalformedRow {
        row,
        message: format!("malformed {what} `{s}`"),
    })
}

fn parse_flag(s: &str, row: usize) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" | "" => Ok(false),
        other => Err(Error::MalformedRow {
            row,
            message: format!("malformed roll flag `{other}`"),
        }),
    }
}

/// Parses a delimited price table (comma or semicolon, header row,
/// ISO-8601 dates). Rows may arrive in any order.
pub fn load_price_series(source: impl Read, mapping: &ColumnMapping) -> Result<PriceSeries> {
    let table = Table::read(source)?;
    let date_col = table.column(&mapping.date)?;
    let price_col = table.column(&mapping.price)?;
    let roll_col = mapping.roll.as_deref().map(|c| table.column(c)).transpose()?;

    let mut observations = Vec::with_capacity(table.rows.len());
    let mut seen = BTreeSet::new();
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 2;
        let date = parse_date(rec.get(date_col).unwrap_or(""), row)?;
        let price = parse_number(rec.get(price_col).unwrap_or(""), row, "price")?;
        if !(price > 0.0) {
            return Err(Error::NonPositivePrice { date });
        }
        if !seen.insert(date) {
            return Err(Error::DuplicateDate { date, row });
        }
        let is_roll_day = match roll_col {
            Some(c) => parse_flag(rec.get(c).unwrap_or(""), row)?,
            None => false,
        };
        observations.push(PriceObservation {
            date,
            price,
            is_roll_day,
        });
    }
    PriceSeries::new(observations)
}

/// Dated auxiliary price columns (e.g. coal, gas, CO2 settlement prices).
#[derive(Debug, Clone, PartialEq)]
pub struct DatedColumns {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    /// `values[c][i]` is column `c` on `dates[i]`.
    pub values: Vec<Vec<f64>>,
}

impl DatedColumns {
    /// Last value of column `c` on or before `date`.
    pub fn as_of(&self, c: usize, date: NaiveDate) -> Option<f64> {
        let idx = self.dates.partition_point(|d| *d <= date);
        (idx > 0).then(|| self.values[c][idx - 1])
    }
}

/// Reads every non-date column of a delimited file as a positive price series.
pub fn load_dated_columns(source: impl Read, date_column: &str) -> Result<DatedColumns> {
    let table = Table::read(source)?;
    let date_col = table.column(date_column)?;
    let value_cols: Vec<usize> = (0..table.headers.len()).filter(|&c| c != date_col).collect();
    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::with_capacity(table.rows.len());
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 2;
        let date = parse_date(rec.get(date_col).unwrap_or(""), row)?;
        let vals = value_cols
            .iter()
            .map(|&c| {
                let v = parse_number(rec.get(c).unwrap_or(""), row, &table.headers[c])?;
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::NonPositivePrice { date })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, vals));
    }
    rows.sort_by_key(|r| r.0);
    for (i, w) in rows.windows(2).enumerate() {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateDate {
                date: w[1].0,
                row: i + 2,
            });
        }
    }
    let names = value_cols.iter().map(|&c| table.headers[c].clone()).collect();
    let mut values = vec![Vec::with_capacity(rows.len()); value_cols.len()];
    let mut dates = Vec::with_capacity(rows.len());
    for (d, vals) in rows {
        dates.push(d);
        for (c, v) in vals.into_iter().enumerate() {
            values[c].push(v);
        }
    }
    Ok(DatedColumns { dates, names, values })
}

/// Reads a roll calendar: one ISO date per line; a non-date first line is
/// taken as a header.
pub fn load_roll_calendar(mut source: impl Read) -> Result<BTreeSet<NaiveDate>> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::MalformedRow {
        row: 0,
        message: e.to_string(),
    })?;
    let mut days = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split([',', ';']).next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match parse_date(field, i + 1) {
            Ok(d) => {
                days.insert(d);
            }
            Err(_) if i == 0 => {}
            Err(e) => return Err(e),
        }
    }
    Ok(days)
}

/// Dated log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: values.len(),
            });
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::DuplicateDate { date: w[1], row: 0 });
        }
        Ok(Self { dates, values })
    }

    /// Return series on consecutive business days from `start`.
    pub fn from_values(start: NaiveDate, values: Vec<f64>) -> Self {
        Self {
            dates: business_days(start, values.len()),
            values,
        }
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnSeries {
        ReturnSeries {
            dates: self.dates[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }
}

/// `n` consecutive weekdays starting at (or after) `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// First difference of log prices; exactly zero on roll days.
pub fn compute_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    let obs = p.observations();
    if obs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: obs.len(),
        });
    }
    let (dates, values) = obs
        .windows(2)
        .map(|w| {
            let r = if w[1].is_roll_day {
                0.0
            } else {
                w[1].price.ln() - w[0].price.ln()
            };
            (w[1].date, r)
        })
        .unzip();
    Ok(ReturnSeries { dates, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LjungBox {
    pub lag: usize,
    pub q: f64,
    pub p_value: f64,
}

/// Descriptive statistics in the layout of a returns summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    /// Non-excess: 3 for a Gaussian.
    pub kurtosis: f64,
    /// Type-7 quantiles at 1%, 5%, 95%, 99%.
    pub quantiles: [f64; 4],
    pub jarque_bera_pvalue: f64,
    pub ljung_box: Vec<LjungBox>,
    pub n_observations: usize,
}

pub const SUMMARY_QUANTILES: [f64; 4] = [0.01, 0.05, 0.95, 0.99];

pub fn descriptive_stats(r: &ReturnSeries) -> Result<StatsSummary> {
    let x = r.values();
    let n = x.len();
    if n < MIN_STATS_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_STATS_LENGTH,
            have: n,
        });
    }
    let m = mean(x);
    let std_dev = sample_std(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    if !(std_dev > 1e-12 * m.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate("zero variance return series".into()));
    }
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n as f64;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n as f64;
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);

    let sorted = sorted_copy(x);
    let quantiles = SUMMARY_QUANTILES.map(|p| quantile_sorted(&sorted, p));

    let nf = n as f64;
    let jb = nf / 6.0 * (skewness * skewness + 0.25 * (kurtosis - 3.0).powi(2));
    let jarque_bera_pvalue = chi2_sf(jb, 2.0);

    let max_lag = *LJUNG_BOX_LAGS.iter().max().unwrap_or(&10);
    let acf = autocorrelations(x, max_lag.min(n - 1));
    let ljung_box = LJUNG_BOX_LAGS
        .iter()
        .filter(|&&lag| lag < n)
        .map(|&lag| {
            let q = nf
                * (nf + 2.0)
                * acf[..lag]
                    .iter()
                    .enumerate()
                    .map(|(k, rho)| rho * rho / (nf - (k + 1) as f64))
                    .sum::<f64>();
            LjungBox {
                lag,
                q,
                p_value: chi2_sf(q, lag as f64),
            }
        })
        .collect();

    Ok(StatsSummary {
        mean: m,
        std_dev,
        min: sorted[0],
        max: sorted[n - 1],
        skewness,
        kurtosis,
        quantiles,
        jarque_bera_pvalue,
        ljung_box,
        n_observations: n,
    })
}

/// Splits at `boundary`: the in-sample part holds every date `<= boundary`.
/// Both parts must be non-empty.
pub fn split_sample(r: &ReturnSeries, boundary: NaiveDate) -> Result<(ReturnSeries, ReturnSeries)> {
    let (first, last) = match (r.dates.first(), r.dates.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::TooShort { needed: 2, have: 0 }),
    };
    if boundary < first || boundary >= last {
        return Err(Error::OutOfRange {
            date: boundary,
            first,
            last,
        });
    }
    let cut = r.dates.partition_point(|d| *d <= boundary);
    Ok((r.slice(0..cut), r.slice(cut..r.len())))
}
