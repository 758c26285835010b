//! VaR and ES backtests, Fisher combination and failure accounting.
//!
//! Every test reports `reject_at_1pct` as `p_value < 0.01`.

mod coverage;
mod fisher;
mod hits;
mod un;

pub use coverage::{bin_test, cci_from_counts, cci_test, dq_test, pof_test, transition_counts, DEFAULT_DQ_LAGS};
pub use fisher::{fisher_combine, P_FLOOR};
pub use hits::{deviation_record, hit_sequence, DeviationRecord, HitSequence, TestName, TestResult, SIGNIFICANCE};
pub use un::{
    consistency_check, simulate_critical_value, un_statistic, un_test, CalibrationCache, Consistency, UnCalibration,
    UnReference, MIN_CALIBRATION_PATHS, REFERENCE_T_DOF,
};
