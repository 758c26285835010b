//! Mean/variance recursions, the Student-t likelihood and one-step forecasts.
//!
//! The first observation of a window only conditions the AR(1) mean; every
//! later observation contributes one likelihood term. The presample
//! variance and presample squared residual are both set to the window's
//! sample variance, so the first modelled variance already follows the
//! variant's recursion.

use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;
use crate::numerics::stats::sample_variance;

use super::params::{abs_moment, GarchParams, GarchVariant};

pub const MIN_LIKELIHOOD_LENGTH: usize = 50;

/// One-step conditional mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondMoments {
    pub mu: f64,
    pub sigma: f64,
}

/// Output of the filter for one modelled observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStep {
    pub mu: f64,
    pub sigma: f64,
    pub standardized_residual: f64,
}

/// Lagged state fed into the variance recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Lagged {
    /// No lagged observation yet; use the presample variance.
    Presample(f64),
    Observed {
        variance: f64,
        residual: f64,
    },
}

pub(crate) struct Recursion<'a> {
    params: &'a GarchParams,
    variant: GarchVariant,
    abs_mean: f64,
}

impl<'a> Recursion<'a> {
    pub(crate) fn new(params: &'a GarchParams, variant: GarchVariant) -> Self {
        let abs_mean = match variant {
            GarchVariant::Egarch => abs_moment(params.nu),
            _ => 0.0,
        };
        Self {
            params,
            variant,
            abs_mean,
        }
    }

    #[inline]
    pub(crate) fn next_variance(&self, lag: Lagged) -> f64 {
        let v = &self.params.variance;
        match (self.variant, lag) {
            (GarchVariant::Garch, Lagged::Presample(s2)) => v[0] + (v[1] + v[2]) * s2,
            (GarchVariant::Garch, Lagged::Observed { variance, residual }) => {
                v[0] + v[1] * variance + v[2] * residual * residual
            }
            (GarchVariant::Gjr, Lagged::Presample(s2)) => v[0] + (v[3] + v[1] + 0.5 * v[2]) * s2,
            (GarchVariant::Gjr, Lagged::Observed { variance, residual }) => {
                let arch = if residual < 0.0 { v[1] + v[2] } else { v[1] };
                v[0] + v[3] * variance + arch * residual * residual
            }
            (GarchVariant::Egarch, Lagged::Presample(s2)) => (v[0] + v[2] * s2.ln()).exp(),
            (GarchVariant::Egarch, Lagged::Observed { variance, residual }) => {
                let eps = residual / variance.sqrt();
                (v[0] + v[1] * eps + v[2] * variance.ln() + v[3] * (eps.abs() - self.abs_mean)).exp()
            }
        }
    }

    /// Runs the recursions over `r`, calling `step(j, mu_j, var_j, a_j)` for
    /// every modelled index `j >= 1`.
    #[inline]
    pub(crate) fn run<F>(&self, r: &[f64], presample: f64, mut step: F) -> Result<Lagged>
    where
        F: FnMut(usize, f64, f64, f64),
    {
        let p = self.params;
        let mut lag = Lagged::Presample(presample);
        for j in 1..r.len() {
            let mu = p.phi0 + p.phi1 * r[j - 1];
            let var = self.next_variance(lag);
            if !(var.is_finite() && var > 0.0) {
                return Err(Error::NonFiniteLikelihood { index: j });
            }
            let a = r[j] - mu;
            step(j, mu, var, a);
            lag = Lagged::Observed {
                variance: var,
                residual: a,
            };
        }
        Ok(lag)
    }
}

/// Log-density constant of the unit-variance t(nu), excluding the scale term.
fn t_log_constant(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * ((nu - 2.0) * std::f64::consts::PI).ln()
}

pub(crate) fn nll_with_presample(
    params: &GarchParams,
    variant: GarchVariant,
    r: &[f64],
    presample: f64,
) -> Result<f64> {
    let nu = params.nu;
    let c = t_log_constant(nu);
    let half_nu1 = 0.5 * (nu + 1.0);
    let inv_nu2 = 1.0 / (nu - 2.0);
    let mut total = 0.0;
    let mut bad = None;
    Recursion::new(params, variant).run(r, presample, |j, _mu, var, a| {
        let term = c - 0.5 * var.ln() - half_nu1 * (a * a / var * inv_nu2).ln_1p();
        if !term.is_finite() && bad.is_none() {
            bad = Some(j);
        }
        total -= term;
    })?;
    if let Some(index) = bad {
        return Err(Error::NonFiniteLikelihood { index });
    }
    Ok(total)
}

fn presample_variance(r: &[f64]) -> Result<f64> {
    let s2 = sample_variance(r);
    if !(s2 > 0.0) || !s2.is_finite() {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    Ok(s2)
}

/// Negative log-likelihood of `r` under the AR(1)-variant-t model,
/// conditioned on the first observation.
pub fn negative_log_likelihood(params: &GarchParams, variant: GarchVariant, r: &[f64]) -> Result<f64> {
    if r.len() < MIN_LIKELIHOOD_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_LIKELIHOOD_LENGTH,
            have: r.len(),
        });
    }
    params.validate(variant)?;
    nll_with_presample(params, variant, r, presample_variance(r)?)
}

/// Conditional means, volatilities and standardized residuals for
/// `r[1..]`, with the presample variance taken from `r` itself.
pub fn filter(params: &GarchParams, variant: GarchVariant, r: &[f64]) -> Result<Vec<FilterStep>> {
    if r.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: r.len(),
        });
    }
    filter_with_presample(params, variant, r, presample_variance(r)?)
}

/// As [`filter`], with an explicit presample variance. Used to extend a
/// fitted model over data after its estimation window.
pub fn filter_with_presample(
    params: &GarchParams,
    variant: GarchVariant,
    r: &[f64],
    presample: f64,
) -> Result<Vec<FilterStep>> {
    params.validate(variant)?;
    let mut out = Vec::with_capacity(r.len().saturating_sub(1));
    Recursion::new(params, variant).run(r, presample, |_, mu, var, a| {
        let sigma = var.sqrt();
        out.push(FilterStep {
            mu,
            sigma,
            standardized_residual: a / sigma,
        });
    })?;
    Ok(out)
}

/// Moments for the observation following `r`, i.e. the step the filter
/// would produce if `r` were extended by one value.
pub fn next_moments(params: &GarchParams, variant: GarchVariant, r: &[f64], presample: f64) -> Result<CondMoments> {
    params.validate(variant)?;
    let rec = Recursion::new(params, variant);
    let last = rec.run(r, presample, |_, _, _, _| {})?;
    let var = rec.next_variance(last);
    let last_r = *r.last().ok_or(Error::TooShort { needed: 1, have: 0 })?;
    Ok(CondMoments {
        mu: params.phi0 + params.phi1 * last_r,
        sigma: var.sqrt(),
    })
}
