//! Expected Shortfall as the average of VaR at four levels spread over the
//! tail beyond `alpha`.

use crate::error::{Error, Result};
use crate::risk::{check_alpha, TailSide};

/// The four tail levels averaged for ES at `alpha`: `alpha` itself and three
/// levels progressively deeper in the tail.
pub fn es_nodes(alpha: f64, side: TailSide) -> [f64; 4] {
    let i = side.indicator();
    [
        alpha,
        0.75 * alpha + 0.25 * i,
        0.5 * alpha + 0.5 * i,
        0.25 * alpha + 0.75 * i,
    ]
}

/// Averages `var_at` over [`es_nodes`]. A failing node is reported with its
/// position (0-based) and level.
pub fn es_discretized<F>(mut var_at: F, alpha: f64, side: TailSide) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_alpha(alpha)?;
    if TailSide::of(alpha) != side {
        return Err(Error::param(
            "side",
            format!("{side} tail is inconsistent with alpha = {alpha}"),
        ));
    }
    let mut sum = 0.0;
    for (node, level) in es_nodes(alpha, side).into_iter().enumerate() {
        let v = var_at(level).map_err(|e| Error::NodeFailure {
            node,
            level,
            message: e.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::NodeFailure {
                node,
                level,
                message: format!("non-finite VaR {v}"),
            });
        }
        sum += v;
    }
    Ok(sum / 4.0)
}
