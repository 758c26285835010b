use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::ReturnSeries;
use crate::risk::{check_alpha, TailSide};

/// VaR breaches aligned with forecast dates.
#[derive(Debug, Clone, PartialEq)]
pub struct HitSequence {
    pub hits: Vec<bool>,
    pub alpha: f64,
    pub side: TailSide,
    /// Forecast dates; empty for sequences built directly from indicators.
    pub dates: Vec<NaiveDate>,
}

impl HitSequence {
    pub fn new(hits: Vec<bool>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            hits,
            alpha,
            side: TailSide::of(alpha),
            dates: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn count(&self) -> usize {
        self.hits.iter().filter(|h| **h).count()
    }

    /// Nominal probability of a hit: `alpha` on the left, `1 - alpha` on the right.
    pub fn hit_probability(&self) -> f64 {
        self.side.hit_probability(self.alpha)
    }
}

/// Marks the dates on which `returns` breach `var` on `side`.
pub fn hit_sequence(returns: &ReturnSeries, var: &[f64], alpha: f64, side: TailSide) -> Result<HitSequence> {
    check_alpha(alpha)?;
    if TailSide::of(alpha) != side {
        return Err(Error::param(
            "side",
            format!("{side} tail is inconsistent with alpha = {alpha}"),
        ));
    }
    if returns.len() != var.len() {
        return Err(Error::LengthMismatch {
            left: returns.len(),
            right: var.len(),
        });
    }
    let hits = returns
        .values()
        .iter()
        .zip(var)
        .map(|(r, v)| side.is_hit(*r, *v))
        .collect();
    Ok(HitSequence {
        hits,
        alpha,
        side,
        dates: returns.dates().to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestName {
    Bin,
    Pof,
    Cci,
    Dq,
    Fisher,
    UnNormal,
    UnT,
}

impl TestName {
    pub const VAR_TESTS: [TestName; 4] = [TestName::Bin, TestName::Pof, TestName::Cci, TestName::Dq];
    pub const ES_TESTS: [TestName; 2] = [TestName::UnNormal, TestName::UnT];

    pub fn as_str(self) -> &'static str {
        match self {
            TestName::Bin => "Bin",
            TestName::Pof => "POF",
            TestName::Cci => "CCI",
            TestName::Dq => "DQ",
            TestName::Fisher => "Fisher",
            TestName::UnNormal => "UN-N",
            TestName::UnT => "UN-t",
        }
    }
}

impl fmt::Display for TestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const SIGNIFICANCE: f64 = 0.01;

/// Outcome of one backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test: TestName,
    pub statistic: f64,
    pub p_value: f64,
    /// `p_value < 0.01`.
    pub reject_at_1pct: bool,
    /// Test-specific numbers such as failure or transition counts.
    pub auxiliary: BTreeMap<&'static str, f64>,
    /// Degeneracy notes, e.g. no hits or a floored p-value.
    pub flags: Vec<&'static str>,
}

impl TestResult {
    pub(crate) fn new(test: TestName, statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            test,
            statistic,
            p_value,
            reject_at_1pct: p_value < SIGNIFICANCE,
            auxiliary: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub(crate) fn with(mut self, key: &'static str, value: f64) -> Self {
        self.auxiliary.insert(key, value);
        self
    }

    pub(crate) fn flagged(mut self, flag: &'static str) -> Self {
        self.flags.push(flag);
        self
    }
}

/// Expected against observed failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRecord {
    pub expected_failures: f64,
    pub observed_failures: usize,
    /// `(observed - expected) / expected`.
    pub deviation: f64,
}

impl DeviationRecord {
    pub fn new(observed_failures: usize, expected_failures: f64) -> Self {
        Self {
            expected_failures,
            observed_failures,
            deviation: (observed_failures as f64 - expected_failures) / expected_failures,
        }
    }
}

pub fn deviation_record(h: &HitSequence) -> DeviationRecord {
    DeviationRecord::new(h.count(), h.len() as f64 * h.hit_probability())
}
