//! AR(1)-GARCH(1,1), AR(1)-EGARCH(1,1) and AR(1)-GJR(1,1) models with
//! unit-variance Student-t innovations.
//!
//! Conventions:
//! - GARCH and GJR recursions are driven by the un-standardized residual
//!   `a = r - mu`; EGARCH by the standardized shock `eps = a / sigma`.
//! - The EGARCH size term is `beta3 * (|eps| - E|eps|)`.
//! - Estimation maps parameters to unconstrained coordinates (log for
//!   positive intercepts, softmax shares for the stationarity simplex,
//!   tanh for AR and EGARCH persistence, a bounded logistic for `nu`).

mod filter;
mod fit;
mod params;
mod record;
mod risk;
mod simulate;

pub use filter::{
    filter, filter_with_presample, negative_log_likelihood, next_moments, CondMoments, FilterStep,
    MIN_LIKELIHOOD_LENGTH,
};
pub use fit::{
    fit, forecast_after, forecast_one_step, forecast_one_step_forced, FittedModel, LastState, GRAD_TOL, MIN_FIT_LENGTH,
    N_STARTS,
};
pub use params::{abs_moment, unit_variance_scale, GarchParams, GarchVariant, NU_MAX, NU_MIN};
pub use risk::{es_closed_form, var_closed_form};
pub use simulate::{simulate, simulate_with, simulation_start, Innovations, BURN_IN};

pub(crate) use record::{num as record_num, parse_record};
