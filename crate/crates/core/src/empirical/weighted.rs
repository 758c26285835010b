//! Historical simulation and exponentially weighted quantiles.

use crate::error::{Error, Result};
use crate::numerics::stats::{quantile_sorted, sorted_copy};
use crate::risk::check_alpha;

pub const HS_WINDOW: usize = 250;
pub const DEFAULT_LAMBDA: f64 = 0.97;

/// How a weighted quantile is read off the cumulative weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileRule {
    /// First value whose cumulative weight reaches `alpha`.
    #[default]
    Step,
    /// Linear interpolation on weighted type-7 plotting positions; reduces
    /// to the type-7 quantile under uniform weights.
    Interpolated,
}

/// Type-7 quantile of the last `window` returns of `history`.
pub fn hs_var(history: &[f64], alpha: f64, window: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if window == 0 {
        return Err(Error::param("window", "must be positive"));
    }
    if history.len() < window {
        return Err(Error::TooShort {
            needed: window,
            have: history.len(),
        });
    }
    let sorted = sorted_copy(&history[history.len() - window..]);
    Ok(quantile_sorted(&sorted, alpha))
}

/// Returns with non-negative weights summing to one, sorted ascending by value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
    uniform: bool,
}

impl WeightedSample {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: weights.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, have: 0 });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("weights", "must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("weights", format!("sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, weights) = pairs.into_iter().unzip();
        Ok(Self {
            values,
            weights,
            uniform: false,
        })
    }

    /// Exponential weights over a chronological history: the most recent
    /// return gets weight proportional to 1, the one before `lambda`, and so on.
    pub fn exponential(history: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::param("lambda", format!("{lambda} is outside (0, 1]")));
        }
        if history.is_empty() {
            return Err(Error::TooShort { needed: 1, have: 0 });
        }
        let n = history.len();
        let mut raw = vec![0.0; n];
        let mut w = 1.0;
        for slot in raw.iter_mut().rev() {
            *slot = w;
            w *= lambda;
        }
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|x| *x /= total);
        let mut s = Self::new(history.to_vec(), raw)?;
        s.uniform = lambda == 1.0;
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn quantile(&self, alpha: f64, rule: QuantileRule) -> Result<f64> {
        check_alpha(alpha)?;
        if self.uniform {
            return Ok(quantile_sorted(&self.values, alpha));
        }
        Ok(match rule {
            QuantileRule::Step => self.step_quantile(alpha),
            QuantileRule::Interpolated => self.interpolated_quantile(alpha),
        })
    }

    fn step_quantile(&self, alpha: f64) -> f64 {
        let mut cum = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            cum += w;
            if cum >= alpha {
                return *v;
            }
        }
        self.values[self.values.len() - 1]
    }

    fn interpolated_quantile(&self, alpha: f64) -> f64 {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let span = 1.0 - self.weights[n - 1];
        if !(span > 0.0) {
            return self.values[n - 1];
        }
        // position of the k-th order statistic: weight strictly below it,
        // rescaled so the last one sits at 1
        let mut below = 0.0;
        let mut prev_pos = 0.0;
        for k in 0..n {
            let pos = (below / span).min(1.0);
            if pos >= alpha {
                if k == 0 || pos == prev_pos {
                    return self.values[k];
                }
                let frac = (alpha - prev_pos) / (pos - prev_pos);
                return self.values[k - 1] + frac * (self.values[k] - self.values[k - 1]);
            }
            prev_pos = pos;
            below += self.weights[k];
        }
        self.values[n - 1]
    }
}

/// Exponentially weighted quantile of a chronological history.
pub fn ewqr_var(history: &[f64], alpha: f64, lambda: f64, rule: QuantileRule) -> Result<f64> {
    check_alpha(alpha)?;
    WeightedSample::exponential(history, lambda)?.quantile(alpha, rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hs_constant_window_and_length_gate() {
        let w = vec![0.013; 250];
        for a in [0.01, 0.05, 0.95, 0.99] {
            assert_eq!(hs_var(&w, a, 250).unwrap(), 0.013);
        }
        assert!(matches!(
            hs_var(&w[..100], 0.05, 250),
            Err(Error::TooShort { needed: 250, have: 100 })
        ));
    }

    #[test]
    fn hs_matches_order_statistic_oracle() {
        let w: Vec<f64> = (1..=250).rev().map(|i| i as f64 / 1000.0).collect();
        // h = 249 * 0.05 = 12.45 -> x(13) + 0.45 (x(14) - x(13)) on the 1-based sorted sample
        let expected = 0.013 + 0.45 * (0.014 - 0.013);
        assert!((hs_var(&w, 0.05, 250).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn hs_reflection() {
        let w: Vec<f64> = (0..250).map(|i| ((i * 37 % 101) as f64 - 50.0) / 997.0).collect();
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        let a = hs_var(&w, 0.99, 250).unwrap();
        let b = -hs_var(&neg, 0.01, 250).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn ewqr_worked_example() {
        // chronological: -2 oldest, 0 most recent; weights 1/7, 2/7, 4/7
        let v = ewqr_var(&[-2.0, -1.0, 0.0], 0.30, 0.5, QuantileRule::Step).unwrap();
        assert_eq!(v, -1.0);
        let s = WeightedSample::exponential(&[-2.0, -1.0, 0.0], 0.5).unwrap();
        for (w, e) in s.weights().iter().zip([1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0]) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn ewqr_uniform_is_hs() {
        let h: Vec<f64> = (0..250).map(|i| ((i * 53 % 97) as f64 - 48.0) / 311.0).collect();
        for a in [0.01, 0.05, 0.5, 0.95, 0.99] {
            let hs = hs_var(&h, a, 250).unwrap();
            assert_eq!(ewqr_var(&h, a, 1.0, QuantileRule::Step).unwrap(), hs);
            assert_eq!(ewqr_var(&h, a, 1.0, QuantileRule::Interpolated).unwrap(), hs);
        }
    }

    #[test]
    fn interpolated_rule_is_continuous_at_uniform_weights() {
        let h: Vec<f64> = (0..250).map(|i| ((i * 53 % 97) as f64 - 48.0) / 311.0).collect();
        for a in [0.01, 0.05, 0.95, 0.99] {
            let hs = hs_var(&h, a, 250).unwrap();
            let near = ewqr_var(&h, a, 1.0 - 1e-9, QuantileRule::Interpolated).unwrap();
            assert!((near - hs).abs() < 1e-6, "{a}: {near} vs {hs}");
        }
    }

    #[test]
    fn lambda_and_weights_are_validated() {
        assert!(ewqr_var(&[1.0], 0.5, 0.0, QuantileRule::Step).is_err());
        assert!(ewqr_var(&[1.0], 0.5, 1.5, QuantileRule::Step).is_err());
        assert!(ewqr_var(&[], 0.5, 0.9, QuantileRule::Step).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], vec![0.5, 0.4]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
    }
}
