//! Closed-form VaR and ES under a unit-variance Student-t conditional law.

use crate::error::Result;
use crate::numerics::special::{student_t_pdf, student_t_ppf};
use crate::risk::{check_alpha, TailSide};

use super::filter::CondMoments;
use super::params::unit_variance_scale;

/// VaR at level `alpha`: the conditional `alpha`-quantile of the return.
pub fn var_closed_form(cm: &CondMoments, nu: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nu(nu)?;
    Ok(cm.mu + cm.sigma * unit_variance_scale(nu) * student_t_ppf(alpha, nu))
}

/// ES at level `alpha`: the conditional mean beyond the VaR on the tail
/// selected by `alpha`.
pub fn es_closed_form(cm: &CondMoments, nu: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nu(nu)?;
    let q = student_t_ppf(alpha, nu);
    let tail_mean = student_t_pdf(q, nu) * (nu + q * q) / (nu - 1.0);
    let scale = cm.sigma * unit_variance_scale(nu);
    Ok(match TailSide::of(alpha) {
        TailSide::Left => cm.mu - scale * tail_mean / alpha,
        TailSide::Right => cm.mu + scale * tail_mean / (1.0 - alpha),
    })
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 2.0 {
        Ok(())
    } else {
        Err(crate::error::Error::param("nu", "degrees of freedom must exceed 2"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CM: CondMoments = CondMoments { mu: 0.0, sigma: 0.02 };

    #[test]
    fn median_is_mean() {
        let cm = CondMoments { mu: 0.003, sigma: 0.02 };
        assert!((var_closed_form(&cm, 6.0, 0.5).unwrap() - 0.003).abs() < 1e-15);
    }

    #[test]
    fn near_gaussian_limit() {
        let v = var_closed_form(&CM, 1e6, 0.05).unwrap();
        assert!((v - (-1.6449 * 0.02)).abs() < 1e-3);
    }

    #[test]
    fn symmetric_tails() {
        for &nu in &[3.0, 6.0, 30.0] {
            let l = var_closed_form(&CM, nu, 0.01).unwrap();
            let r = var_closed_form(&CM, nu, 0.99).unwrap();
            assert!((l + r).abs() < 1e-12);
            let l = es_closed_form(&CM, nu, 0.05).unwrap();
            let r = es_closed_form(&CM, nu, 0.95).unwrap();
            assert!((l + r).abs() < 1e-12);
        }
    }

    #[test]
    fn es_beyond_var() {
        for &a in &[0.01, 0.05, 0.2, 0.8, 0.95, 0.99] {
            let v = var_closed_form(&CM, 5.0, a).unwrap();
            let e = es_closed_form(&CM, 5.0, a).unwrap();
            assert!(e.abs() >= v.abs());
        }
        assert!(var_closed_form(&CM, 5.0, 0.0).is_err());
        assert!(es_closed_form(&CM, 5.0, 1.0).is_err());
    }
}
