//! One-day-ahead Value-at-Risk and Expected Shortfall forecasting for
//! futures return series, with the VaR/ES backtest battery and GARCH
//! versus empirical tail-index comparison.
//!
//! Modules follow the pipeline: [`ingest`] turns prices into returns,
//! [`garch`] and [`empirical`] produce forecasts, [`esbridge`] turns VaR
//! curves into ES, [`backtest`] scores forecasts, [`tailindex`] compares
//! tails and [`engine`] runs everything from a config file.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod empirical;
pub mod engine;
pub mod error;
pub mod esbridge;
pub mod garch;
pub mod ingest;
pub mod numerics;
pub mod risk;
pub mod tailindex;

pub use error::{Error, Result};
pub use risk::{RiskForecast, TailSide};
