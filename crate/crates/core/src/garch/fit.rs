//! Multi-start maximum-likelihood estimation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::optimize::{bfgs, nelder_mead, numerical_hessian, BfgsOptions};
use crate::numerics::stats::{autocorrelations, mean, sample_variance};

use super::filter::{next_moments, nll_with_presample, CondMoments, Recursion};
use super::params::{from_unconstrained, to_unconstrained, GarchParams, GarchVariant, NU_MAX};

pub const MIN_FIT_LENGTH: usize = 250;
pub const N_STARTS: usize = 5;
/// Max-norm of the gradient of the per-observation NLL (in optimizer
/// coordinates) below which a fit counts as converged.
pub const GRAD_TOL: f64 = 1e-5;
pub const REL_NLL_TOL: f64 = 1e-8;

/// State at the end of the estimation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastState {
    pub last_return: f64,
    pub last_variance: f64,
    pub last_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub variant: GarchVariant,
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Gradient max-norm at the optimum (per-observation NLL, optimizer coordinates).
    pub grad_max: f64,
    /// Degrees of freedom ran into the estimation cap.
    pub gaussian_limit: bool,
    /// Presample variance used by the filter (sample variance of the window).
    pub presample_variance: f64,
    pub n_observations: usize,
    pub last_state: LastState,
    /// Asymptotic standard errors, ordered as [`GarchParams::to_vec`].
    pub standard_errors: Vec<f64>,
}

impl FittedModel {
    /// Builds a model around known parameters, e.g. for forecasting from the
    /// data-generating process.
    pub fn from_params(variant: GarchVariant, params: GarchParams, r: &[f64]) -> Result<Self> {
        params.validate(variant)?;
        if r.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                have: r.len(),
            });
        }
        let presample = sample_variance(r);
        if !(presample > 0.0) {
            return Err(Error::Degenerate("zero sample variance".into()));
        }
        let nll = nll_with_presample(&params, variant, r, presample)?;
        let last_state = last_state(&params, variant, r, presample)?;
        let k = params.to_vec().len();
        Ok(Self {
            variant,
            gaussian_limit: params.nu >= NU_MAX - 1.0,
            params,
            log_likelihood: -nll,
            converged: true,
            grad_max: 0.0,
            presample_variance: presample,
            n_observations: r.len(),
            last_state,
            standard_errors: vec![f64::NAN; k],
        })
    }
}

fn last_state(params: &GarchParams, variant: GarchVariant, r: &[f64], presample: f64) -> Result<LastState> {
    let mut state = LastState {
        last_return: r[r.len() - 1],
        last_variance: presample,
        last_residual: 0.0,
    };
    Recursion::new(params, variant).run(r, presample, |_, _, var, a| {
        state.last_variance = var;
        state.last_residual = a;
    })?;
    Ok(state)
}

/// Method-of-moments style starting point.
fn initial_params(variant: GarchVariant, r: &[f64], s2: f64) -> GarchParams {
    let phi1 = autocorrelations(r, 1)[0].clamp(-0.5, 0.5);
    let phi0 = mean(r) * (1.0 - phi1);
    let nu = 8.0;
    match variant {
        GarchVariant::Garch => GarchParams::garch(phi0, phi1, s2 * 0.05, 0.85, 0.10, nu),
        GarchVariant::Gjr => GarchParams::gjr(phi0, phi1, [s2 * 0.05, 0.05, 0.05, 0.85], nu),
        GarchVariant::Egarch => {
            let b2 = 0.95;
            GarchParams::egarch(phi0, phi1, [s2.ln() * (1.0 - b2), -0.02, b2, 0.15], nu)
        }
    }
}

struct Candidate {
    theta: Vec<f64>,
    nll: f64,
    grad_max: f64,
}

/// Fits the AR(1)-variant model with Student-t innovations by maximum
/// likelihood from several deterministic starting points.
pub fn fit(r: &[f64], variant: GarchVariant) -> Result<FittedModel> {
    if r.len() < MIN_FIT_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_FIT_LENGTH,
            have: r.len(),
        });
    }
    let s2 = sample_variance(r);
    if !(s2 > 0.0) || !s2.is_finite() {
        return Err(Error::Degenerate("zero variance return series".into()));
    }
    let n_terms = (r.len() - 1) as f64;
    // Per-observation NLL shifted by -ln(s) so the objective is O(1) for any
    // return scale; the shift does not move the optimum.
    let offset = -0.5 * s2.ln();
    let scale = s2.sqrt();
    let objective = |theta: &[f64]| -> f64 {
        let p = from_unconstrained(variant, theta, scale);
        // the map can round onto the stationarity boundary in extreme coordinates
        if p.validate(variant).is_err() {
            return f64::INFINITY;
        }
        match nll_with_presample(&p, variant, r, s2) {
            Ok(v) => v / n_terms + offset,
            Err(_) => f64::INFINITY,
        }
    };

    let base = to_unconstrained(variant, &initial_params(variant, r, s2), scale);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a09_e667_f3bc_c908);
    let opts = BfgsOptions {
        grad_tol: GRAD_TOL,
        rel_f_tol: REL_NLL_TOL,
        ..Default::default()
    };

    let mut candidates: Vec<Candidate> = Vec::with_capacity(N_STARTS);
    for start in 0..N_STARTS {
        let mut theta0 = base.clone();
        if start > 0 {
            for (i, t) in theta0.iter_mut().enumerate() {
                let spread = if i == 0 { 0.1 } else { 0.5 };
                *t += spread * (rng.random::<f64>() * 2.0 - 1.0);
            }
        }
        if !objective(&theta0).is_finite() {
            continue;
        }
        let coarse = nelder_mead(objective, &theta0, 0.3, 60 * theta0.len(), 1e-6);
        let fine = bfgs(objective, &coarse.x, &opts);
        if fine.value.is_finite() {
            candidates.push(Candidate {
                theta: fine.x,
                nll: fine.value,
                grad_max: fine.grad_max,
            });
        }
    }

    let mut best = candidates
        .into_iter()
        .min_by(|a, b| a.nll.total_cmp(&b.nll))
        .ok_or(Error::NonConvergence {
            best_nll: f64::INFINITY,
            best_params: Vec::new(),
        })?;
    if best.grad_max >= GRAD_TOL {
        // one more polish from the best point with a fresh Hessian
        let again = bfgs(objective, &best.theta, &opts);
        if again.value <= best.nll {
            best = Candidate {
                theta: again.x,
                nll: again.value,
                grad_max: again.grad_max,
            };
        }
    }

    let params = from_unconstrained(variant, &best.theta, scale);
    let nll = (best.nll - offset) * n_terms;
    if best.grad_max >= GRAD_TOL {
        return Err(Error::NonConvergence {
            best_nll: nll,
            best_params: params.to_vec(),
        });
    }

    let standard_errors = standard_errors(variant, &best.theta, scale, objective, n_terms);
    let last_state = last_state(&params, variant, r, s2)?;
    Ok(FittedModel {
        variant,
        gaussian_limit: params.nu >= NU_MAX - 1.0,
        params,
        log_likelihood: -nll,
        converged: true,
        grad_max: best.grad_max,
        presample_variance: s2,
        n_observations: r.len(),
        last_state,
        standard_errors,
    })
}

/// Delta-method standard errors from the inverse Hessian in optimizer
/// coordinates.
fn standard_errors<F: Fn(&[f64]) -> f64>(
    variant: GarchVariant,
    theta: &[f64],
    scale: f64,
    objective: F,
    n_terms: f64,
) -> Vec<f64> {
    let k = theta.len();
    let mut total = |t: &[f64]| objective(t) * n_terms;
    let h = numerical_hessian(&mut total, theta, 1e-4);
    let h = DMatrix::from_fn(k, k, |i, j| h[i][j]);
    let cov_theta = match h.try_inverse() {
        Some(inv) => inv,
        None => return vec![f64::NAN; k],
    };

    // Jacobian of the natural parameters by central differences.
    let step = 1e-6;
    let mut jac = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut tp = theta.to_vec();
        let mut tm = theta.to_vec();
        tp[j] += step;
        tm[j] -= step;
        let fp = from_unconstrained(variant, &tp, scale).to_vec();
        let fm = from_unconstrained(variant, &tm, scale).to_vec();
        for i in 0..k {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    let cov = &jac * cov_theta * jac.transpose();
    (0..k)
        .map(|i| {
            let v = cov[(i, i)];
            if v > 0.0 {
                v.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// One-step-ahead conditional moments after the estimation window.
pub fn forecast_one_step(m: &FittedModel) -> Result<CondMoments> {
    if !m.converged {
        return Err(Error::NonConvergence {
            best_nll: -m.log_likelihood,
            best_params: m.params.to_vec(),
        });
    }
    forecast_one_step_forced(m)
}

/// As [`forecast_one_step`] but without the convergence gate.
pub fn forecast_one_step_forced(m: &FittedModel) -> Result<CondMoments> {
    let s = m.last_state;
    if !(s.last_variance > 0.0 && s.last_variance.is_finite()) {
        return Err(Error::Degenerate("invalid last conditional variance".into()));
    }
    let rec = Recursion::new(&m.params, m.variant);
    let var = rec.next_variance(super::filter::Lagged::Observed {
        variance: s.last_variance,
        residual: s.last_residual,
    });
    Ok(CondMoments {
        mu: m.params.phi0 + m.params.phi1 * s.last_return,
        sigma: var.sqrt(),
    })
}

/// Moments for the day after `r`, with the model's stored presample variance.
pub fn forecast_after(m: &FittedModel, r: &[f64]) -> Result<CondMoments> {
    next_moments(&m.params, m.variant, r, m.presample_variance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::garch::simulate::simulate;

    fn truth(variant: GarchVariant) -> GarchParams {
        match variant {
            GarchVariant::Garch => GarchParams::garch(0.0002, 0.05, 2e-6, 0.90, 0.08, 6.0),
            GarchVariant::Gjr => GarchParams::gjr(0.0002, 0.05, [2e-6, 0.04, 0.06, 0.90], 6.0),
            GarchVariant::Egarch => GarchParams::egarch(0.0002, 0.05, [-0.45, -0.05, 0.95, 0.15], 6.0),
        }
    }

    #[test]
    fn recovers_persistence_and_tail_on_long_samples() {
        for variant in GarchVariant::ALL {
            let p = truth(variant);
            let r = simulate(&p, variant, 4000, 21).unwrap();
            let m = fit(r.values(), variant).unwrap();
            assert!(m.converged && m.grad_max < GRAD_TOL);
            let est = m.params.to_vec();
            let tru = p.to_vec();
            for (i, name) in variant.param_names().iter().enumerate() {
                let se = m.standard_errors[i];
                assert!(se.is_finite() && se > 0.0, "{variant} {name} se {se}");
                assert!(
                    (est[i] - tru[i]).abs() < 4.0 * se,
                    "{variant} {name}: {} vs {} (se {se})",
                    est[i],
                    tru[i]
                );
            }
        }
    }

    #[test]
    fn fit_is_deterministic_and_beats_truth_likelihood() {
        let p = truth(GarchVariant::Garch);
        let r = simulate(&p, GarchVariant::Garch, 1500, 5).unwrap();
        let a = fit(r.values(), GarchVariant::Garch).unwrap();
        let b = fit(r.values(), GarchVariant::Garch).unwrap();
        assert_eq!(a, b);
        let at_truth = FittedModel::from_params(GarchVariant::Garch, p, r.values()).unwrap();
        assert!(a.log_likelihood >= at_truth.log_likelihood - 1e-9);
    }

    #[test]
    fn short_and_constant_inputs_are_rejected() {
        assert!(matches!(
            fit(&[0.01; 100], GarchVariant::Garch),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            fit(&[0.0; 300], GarchVariant::Garch),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn record_round_trip_preserves_model() {
        let p = truth(GarchVariant::Gjr);
        let r = simulate(&p, GarchVariant::Gjr, 800, 9).unwrap();
        let m = fit(r.values(), GarchVariant::Gjr).unwrap();
        let back = FittedModel::from_record(&m.to_record()).unwrap();
        assert_eq!(m, back);
        assert_eq!(forecast_one_step(&m).unwrap(), forecast_one_step(&back).unwrap());
    }

    #[test]
    fn one_step_forecast_matches_filter_continuation() {
        let p = truth(GarchVariant::Egarch);
        let r = simulate(&p, GarchVariant::Egarch, 600, 2).unwrap();
        let m = FittedModel::from_params(GarchVariant::Egarch, p, r.values()).unwrap();
        let a = forecast_one_step(&m).unwrap();
        let b = forecast_after(&m, r.values()).unwrap();
        assert!((a.mu - b.mu).abs() < 1e-15 && (a.sigma - b.sigma).abs() < 1e-15);
    }
}
