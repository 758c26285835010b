//! GARCH-implied tail index and empirical power-law tail fits.
//!
//! For a GARCH(1,1) process the tail index `k` is the positive root of
//! `E[(alpha1 Z^2 + beta1)^k] = 1`, so that `P(|X| > x) ~ c x^(-2k)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate;
use crate::numerics::roots::brent;
use crate::numerics::special::student_t_ln_pdf;
use crate::numerics::stats::{quantile_sorted, sorted_copy};

/// Upper end of the root search.
pub const K_MAX: f64 = 50.0;
pub const MIN_EXCEEDANCES: usize = 30;
const ROOT_TOL: f64 = 1e-10;
const K_STEP: f64 = 0.25;

/// Unit-variance innovation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Innovation {
    Gaussian,
    StudentT(f64),
}

impl Innovation {
    fn ln_density(self, z: f64) -> f64 {
        match self {
            Innovation::Gaussian => -0.5 * z * z - 0.5 * (2.0 * PI).ln(),
            Innovation::StudentT(nu) => {
                let s = ((nu - 2.0) / nu).sqrt();
                student_t_ln_pdf(z / s, nu) - s.ln()
            }
        }
    }

    /// Split point between the direct and the substituted tail integral.
    fn cut(self) -> f64 {
        match self {
            Innovation::Gaussian => 8.0,
            Innovation::StudentT(_) => 10.0,
        }
    }

    /// Moments of order `2k` exist only below this `k`.
    fn k_limit(self) -> f64 {
        match self {
            Innovation::Gaussian => f64::INFINITY,
            Innovation::StudentT(nu) => nu / 2.0,
        }
    }
}

/// `g(k) = E[(alpha1 Z^2 + beta1)^k] - 1` by quadrature over the symmetric
/// innovation density: `[0, c]` directly, `[c, inf)` through `z = c / v`.
pub fn moment_gap(alpha1: f64, beta1: f64, k: f64, innovation: Innovation) -> f64 {
    let h = |z: f64| (k * (alpha1 * z * z + beta1).ln() + innovation.ln_density(z)).exp();
    let c = innovation.cut();
    let body = integrate(h, 0.0, c, 1e-14, 1e-13).value;
    let tail = integrate(
        |v: f64| if v <= 0.0 { 0.0 } else { h(c / v) * c / (v * v) },
        0.0,
        1.0,
        1e-14,
        1e-13,
    )
    .value;
    2.0 * (body + tail) - 1.0
}

fn validate(alpha1: f64, beta1: f64, innovation: Innovation) -> Result<()> {
    if !(alpha1 > 0.0) {
        return Err(Error::param("alpha1", format!("{alpha1} must be positive")));
    }
    if !(beta1 >= 0.0) {
        return Err(Error::param("beta1", format!("{beta1} must be non-negative")));
    }
    if alpha1 + beta1 > 1.0 {
        return Err(Error::param("alpha1 + beta1", format!("{} exceeds 1", alpha1 + beta1)));
    }
    if let Innovation::StudentT(nu) = innovation {
        if !(nu > 2.0) {
            return Err(Error::param("nu", format!("{nu} must exceed 2")));
        }
    }
    Ok(())
}

/// Positive root of [`moment_gap`] in `k`.
pub fn garch_tail_index(alpha1: f64, beta1: f64, innovation: Innovation) -> Result<f64> {
    validate(alpha1, beta1, innovation)?;
    let limit = K_MAX.min(innovation.k_limit() * (1.0 - 1e-9));
    let g = |k: f64| moment_gap(alpha1, beta1, k, innovation);
    // g is convex with g(0) = 0 and g'(0) < 0: walk right until it turns positive
    let mut lo = 1e-3_f64.min(0.5 * limit);
    if !(g(lo) < 0.0) {
        return Err(Error::Degenerate(format!(
            "moment gap is not negative near zero at alpha1 = {alpha1}, beta1 = {beta1}"
        )));
    }
    loop {
        let hi = (lo + K_STEP).min(limit);
        let ghi = g(hi);
        if ghi >= 0.0 {
            return brent(g, lo, hi, ROOT_TOL).ok_or(Error::TailIndexOutOfRange { limit });
        }
        if hi >= limit {
            return Err(Error::TailIndexOutOfRange { limit });
        }
        lo = hi;
    }
}

/// Power-law fit `P(|X| > x) ~ c x^(-2 k_star)` over one tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalTail {
    pub k_star: f64,
    pub c: f64,
    pub threshold_quantile: f64,
    pub exceedances: usize,
}

/// Least squares of `ln(i / n)` on `ln x_(i)` over the exceedances, ranked
/// from the most extreme. `threshold_quantile < 0.5` selects `|X|` for `X`
/// below that quantile; otherwise `X` above it.
pub fn empirical_tail_index(r: &[f64], threshold_quantile: f64) -> Result<EmpiricalTail> {
    if !(threshold_quantile > 0.0 && threshold_quantile < 1.0) {
        return Err(Error::param(
            "threshold_quantile",
            format!("{threshold_quantile} is outside (0, 1)"),
        ));
    }
    if r.is_empty() {
        return Err(Error::TooShort {
            needed: MIN_EXCEEDANCES,
            have: 0,
        });
    }
    let sorted = sorted_copy(r);
    let q = quantile_sorted(&sorted, threshold_quantile);
    let mut tail: Vec<f64> = if threshold_quantile < 0.5 {
        sorted.iter().filter(|x| **x < q).map(|x| x.abs()).collect()
    } else {
        sorted.iter().filter(|x| **x > q).copied().collect()
    };
    tail.retain(|x| *x > 0.0);
    if tail.len() < MIN_EXCEEDANCES {
        return Err(Error::TooShort {
            needed: MIN_EXCEEDANCES,
            have: tail.len(),
        });
    }
    tail.sort_by(|a, b| b.total_cmp(a));
    let n = r.len() as f64;
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .map(|(i, x)| (x.ln(), ((i + 1) as f64 / n).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("tail exceedances are all equal".into()));
    }
    let slope = sxy / sxx;
    let k_star = -slope / 2.0;
    if !(k_star > 0.0) {
        return Err(Error::Degenerate(format!("fitted tail slope {slope} is not negative")));
    }
    Ok(EmpiricalTail {
        k_star,
        c: (my - slope * mx).exp(),
        threshold_quantile,
        exceedances: tail.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIndexResult {
    pub k_garch: f64,
    pub k_empirical: f64,
    pub side_quantile: f64,
    /// `ln(k_garch / k_empirical)`.
    pub log_ratio: f64,
}

pub fn tail_comparison(k: f64, k_star: f64, side_quantile: f64) -> Result<TailIndexResult> {
    if !(k > 0.0 && k_star > 0.0) {
        return Err(Error::param(
            "k",
            format!("tail indices must be positive, got {k} and {k_star}"),
        ));
    }
    Ok(TailIndexResult {
        k_garch: k,
        k_empirical: k_star,
        side_quantile,
        log_ratio: (k / k_star).ln(),
    })
}
