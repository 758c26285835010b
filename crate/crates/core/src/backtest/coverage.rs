//! VaR backtests: failure count, failure proportion, independence and
//! dynamic quantile.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::special::{chi2_sf, normal_sf};

use super::hits::{HitSequence, TestName, TestResult};

pub const DEFAULT_DQ_LAGS: usize = 4;

/// `x * ln(y)` with `0 * ln(0) = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn require_nonempty(h: &HitSequence) -> Result<()> {
    if h.is_empty() {
        Err(Error::TooShort { needed: 1, have: 0 })
    } else {
        Ok(())
    }
}

/// Normal approximation to the binomial failure count, two-sided.
pub fn bin_test(h: &HitSequence) -> Result<TestResult> {
    require_nonempty(h)?;
    let n = h.len() as f64;
    let x = h.count() as f64;
    let p = h.hit_probability();
    let z = (x - n * p) / (n * p * (1.0 - p)).sqrt();
    Ok(TestResult::new(TestName::Bin, z, 2.0 * normal_sf(z.abs()))
        .with("failures", x)
        .with("expected", n * p))
}

/// Kupiec proportion-of-failures likelihood ratio.
pub fn pof_test(h: &HitSequence) -> Result<TestResult> {
    require_nonempty(h)?;
    let n = h.len() as f64;
    let x = h.count() as f64;
    let p = h.hit_probability();
    let phat = x / n;
    let ll_null = xlny(n - x, 1.0 - p) + xlny(x, p);
    let ll_alt = xlny(n - x, 1.0 - phat) + xlny(x, phat);
    let lr = (-2.0 * (ll_null - ll_alt)).max(0.0);
    Ok(TestResult::new(TestName::Pof, lr, chi2_sf(lr, 1.0)).with("failures", x))
}

/// Transition counts `[n00, n01, n10, n11]` of consecutive hit indicators.
pub fn transition_counts(hits: &[bool]) -> [usize; 4] {
    let mut c = [0; 4];
    for w in hits.windows(2) {
        c[2 * w[0] as usize + w[1] as usize] += 1;
    }
    c
}

/// Christoffersen independence likelihood ratio on the transition counts.
pub fn cci_test(h: &HitSequence) -> Result<TestResult> {
    if h.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: h.len(),
        });
    }
    cci_from_counts(transition_counts(&h.hits))
}

pub fn cci_from_counts(counts: [usize; 4]) -> Result<TestResult> {
    let [n00, n01, n10, n11] = counts.map(|c| c as f64);
    let base = TestResult::new(TestName::Cci, 0.0, 1.0)
        .with("n00", n00)
        .with("n01", n01)
        .with("n10", n10)
        .with("n11", n11);
    if n01 + n11 == 0.0 {
        return Ok(base.flagged("no_hits"));
    }
    let total = n00 + n01 + n10 + n11;
    let pi = (n01 + n11) / total;
    let pi01 = if n00 + n01 > 0.0 { n01 / (n00 + n01) } else { 0.0 };
    let pi11 = if n10 + n11 > 0.0 { n11 / (n10 + n11) } else { 0.0 };
    let ll_null = xlny(n00 + n10, 1.0 - pi) + xlny(n01 + n11, pi);
    let ll_alt = xlny(n00, 1.0 - pi01) + xlny(n01, pi01) + xlny(n10, 1.0 - pi11) + xlny(n11, pi11);
    let lr = (-2.0 * (ll_null - ll_alt)).max(0.0);
    let mut out = base;
    out.statistic = lr;
    out.p_value = chi2_sf(lr, 1.0).clamp(0.0, 1.0);
    out.reject_at_1pct = out.p_value < super::hits::SIGNIFICANCE;
    Ok(out)
}

/// Dynamic quantile test: regress `hit_t - p` on a constant, `lags` lagged
/// hits and the contemporaneous VaR.
pub fn dq_test(h: &HitSequence, var: &[f64], lags: usize) -> Result<TestResult> {
    if var.len() != h.len() {
        return Err(Error::LengthMismatch {
            left: h.len(),
            right: var.len(),
        });
    }
    if h.len() <= lags + 10 {
        return Err(Error::TooShort {
            needed: lags + 11,
            have: h.len(),
        });
    }
    let p = h.hit_probability();
    let rows = h.len() - lags;
    let k = lags + 2;
    let x = DMatrix::from_fn(rows, k, |i, j| {
        let t = i + lags;
        match j {
            0 => 1.0,
            j if j <= lags => h.hits[t - j] as u8 as f64,
            _ => var[t],
        }
    });
    let y = DVector::from_fn(rows, |i, _| h.hits[i + lags] as u8 as f64 - p);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let solved = if well_conditioned(&xtx) {
        xtx.clone().cholesky().map(|c| c.solve(&xty))
    } else {
        None
    };
    let singular = solved.is_none();
    let beta = solved.unwrap_or_else(|| {
        xtx.clone()
            .pseudo_inverse(1e-12 * xtx.norm().max(f64::MIN_POSITIVE))
            .map(|pinv| pinv * &xty)
            .unwrap_or_else(|_| DVector::zeros(k))
    });
    let stat = (beta.transpose() * &xtx * &beta)[(0, 0)] / (p * (1.0 - p));
    let dof = k as f64;
    let out = TestResult::new(TestName::Dq, stat, chi2_sf(stat, dof)).with("dof", dof);
    Ok(if singular { out.flagged("singular_design") } else { out })
}

fn well_conditioned(m: &DMatrix<f64>) -> bool {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && min > 1e-12 * max
}
