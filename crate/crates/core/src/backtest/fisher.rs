use crate::error::{Error, Result};
use crate::numerics::special::chi2_sf;

use super::hits::{TestName, TestResult};

/// Smallest p-value admitted before taking logs.
pub const P_FLOOR: f64 = 1e-15;

/// Fisher's combination `F = -2 sum ln p_i`, chi-square with `2n` degrees of
/// freedom under independent nulls.
pub fn fisher_combine(p_values: &[f64]) -> Result<TestResult> {
    if p_values.is_empty() {
        return Err(Error::param("p_values", "at least one p-value is required"));
    }
    let mut floored = false;
    let mut f = 0.0;
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p_values", format!("{p} is outside [0, 1]")));
        }
        if p < P_FLOOR {
            floored = true;
        }
        f -= 2.0 * p.max(P_FLOOR).ln();
    }
    let dof = 2.0 * p_values.len() as f64;
    let out = TestResult::new(TestName::Fisher, f, chi2_sf(f, dof)).with("dof", dof);
    Ok(if floored { out.flagged("p_value_floored") } else { out })
}
