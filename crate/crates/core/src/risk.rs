//! Tail conventions shared by every forecaster and backtest.
//!
//! A level `alpha < 0.5` describes the left tail (long positions): the VaR is
//! the return that is undershot with probability `alpha`. A level
//! `alpha >= 0.5` describes the right tail (short positions): the VaR is
//! overshot with probability `1 - alpha`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TailSide {
    Left,
    Right,
}

impl TailSide {
    pub fn of(alpha: f64) -> TailSide {
        if alpha < 0.5 {
            TailSide::Left
        } else {
            TailSide::Right
        }
    }

    /// Indicator used when placing integration nodes: 0 for left, 1 for right.
    pub fn indicator(self) -> f64 {
        match self {
            TailSide::Left => 0.0,
            TailSide::Right => 1.0,
        }
    }

    /// Nominal probability that a return breaches the VaR at `alpha`.
    pub fn hit_probability(self, alpha: f64) -> f64 {
        match self {
            TailSide::Left => alpha,
            TailSide::Right => 1.0 - alpha,
        }
    }

    /// Whether `ret` breaches `var` on this side. Ties are not hits.
    pub fn is_hit(self, ret: f64, var: f64) -> bool {
        match self {
            TailSide::Left => ret < var,
            TailSide::Right => ret > var,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TailSide::Left => "left",
            TailSide::Right => "right",
        }
    }
}

impl fmt::Display for TailSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validates a tail level.
pub fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::param("alpha", format!("{alpha} is outside (0, 1)")))
    }
}

/// One-day-ahead (VaR, ES) pair at a tail level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskForecast {
    pub alpha: f64,
    pub var: f64,
    pub es: f64,
}

impl RiskForecast {
    pub fn side(&self) -> TailSide {
        TailSide::of(self.alpha)
    }
}
