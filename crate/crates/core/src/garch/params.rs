use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;

/// Upper bound on the Student-t degrees of freedom during estimation.
pub const NU_MAX: f64 = 200.0;
/// Lower bound keeping the unit-variance standardization finite.
pub const NU_MIN: f64 = 2.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GarchVariant {
    Garch,
    Egarch,
    Gjr,
}

impl GarchVariant {
    pub const ALL: [GarchVariant; 3] = [GarchVariant::Garch, GarchVariant::Egarch, GarchVariant::Gjr];

    pub fn as_str(self) -> &'static str {
        match self {
            GarchVariant::Garch => "GARCH",
            GarchVariant::Egarch => "EGARCH",
            GarchVariant::Gjr => "GJR",
        }
    }

    /// Names of the variance-equation coefficients, in storage order.
    pub fn variance_names(self) -> &'static [&'static str] {
        match self {
            GarchVariant::Garch => &["omega0", "omega1", "omega2"],
            GarchVariant::Egarch => &["beta0", "beta1", "beta2", "beta3"],
            GarchVariant::Gjr => &["kappa0", "kappa1", "kappa2", "kappa3"],
        }
    }

    /// Every parameter name in the order of [`GarchParams::to_vec`].
    pub fn param_names(self) -> Vec<&'static str> {
        let mut names = vec!["phi0", "phi1"];
        names.extend_from_slice(self.variance_names());
        names.push("nu");
        names
    }
}

impl fmt::Display for GarchVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GarchVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GARCH" => Ok(GarchVariant::Garch),
            "EGARCH" => Ok(GarchVariant::Egarch),
            "GJR" => Ok(GarchVariant::Gjr),
            other => Err(Error::param("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// AR(1) mean plus variant-specific variance coefficients and the
/// Student-t degrees of freedom.
///
/// GARCH: `omega1` multiplies the lagged variance and `omega2` the lagged
/// squared residual. GJR: `kappa1` squared residual, `kappa2` the extra
/// weight on negative residuals, `kappa3` lagged variance. EGARCH:
/// `beta1` signed shock, `beta2` lagged log-variance, `beta3` size effect.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchParams {
    pub phi0: f64,
    pub phi1: f64,
    pub variance: Vec<f64>,
    pub nu: f64,
}

impl GarchParams {
    pub fn garch(phi0: f64, phi1: f64, omega0: f64, omega1: f64, omega2: f64, nu: f64) -> Self {
        Self {
            phi0,
            phi1,
            variance: vec![omega0, omega1, omega2],
            nu,
        }
    }

    pub fn egarch(phi0: f64, phi1: f64, beta: [f64; 4], nu: f64) -> Self {
        Self {
            phi0,
            phi1,
            variance: beta.to_vec(),
            nu,
        }
    }

    pub fn gjr(phi0: f64, phi1: f64, kappa: [f64; 4], nu: f64) -> Self {
        Self {
            phi0,
            phi1,
            variance: kappa.to_vec(),
            nu,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.phi0, self.phi1];
        v.extend_from_slice(&self.variance);
        v.push(self.nu);
        v
    }

    pub fn from_vec(variant: GarchVariant, v: &[f64]) -> Result<Self> {
        let k = variant.variance_names().len();
        if v.len() != k + 3 {
            return Err(Error::LengthMismatch {
                left: v.len(),
                right: k + 3,
            });
        }
        Ok(Self {
            phi0: v[0],
            phi1: v[1],
            variance: v[2..2 + k].to_vec(),
            nu: v[k + 2],
        })
    }

    pub fn validate(&self, variant: GarchVariant) -> Result<()> {
        let k = variant.variance_names().len();
        if self.variance.len() != k {
            return Err(Error::LengthMismatch {
                left: self.variance.len(),
                right: k,
            });
        }
        if self.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(Error::param("params", "non-finite parameter"));
        }
        if self.phi1.abs() >= 1.0 {
            return Err(Error::param("phi1", "|phi1| must be below 1"));
        }
        if self.nu <= 2.0 {
            return Err(Error::param("nu", "degrees of freedom must exceed 2"));
        }
        let v = &self.variance;
        match variant {
            GarchVariant::Garch => {
                if v[0] <= 0.0 || v[1] < 0.0 || v[2] < 0.0 || v[1] + v[2] >= 1.0 {
                    return Err(Error::param(
                        "omega",
                        "need omega0 > 0, omega1, omega2 >= 0 and omega1 + omega2 < 1",
                    ));
                }
            }
            GarchVariant::Gjr => {
                if v[0] <= 0.0 || v[1] < 0.0 || v[3] < 0.0 || v[1] + v[2] < 0.0 || v[1] + 0.5 * v[2] + v[3] >= 1.0 {
                    return Err(Error::param(
                        "kappa",
                        "need kappa0 > 0, kappa1, kappa3 >= 0, kappa1 + kappa2 >= 0 and kappa1 + kappa2/2 + kappa3 < 1",
                    ));
                }
            }
            GarchVariant::Egarch => {
                if v[2].abs() >= 1.0 {
                    return Err(Error::param("beta2", "|beta2| must be below 1"));
                }
            }
        }
        Ok(())
    }

    /// Long-run variance of the residual process, where it exists in closed form.
    pub fn unconditional_variance(&self, variant: GarchVariant) -> f64 {
        let v = &self.variance;
        match variant {
            GarchVariant::Garch => v[0] / (1.0 - v[1] - v[2]),
            GarchVariant::Gjr => v[0] / (1.0 - v[1] - 0.5 * v[2] - v[3]),
            // log-variance mean, ignoring the Jensen term
            GarchVariant::Egarch => (v[0] / (1.0 - v[2])).exp(),
        }
    }
}

/// Standard deviation multiplier turning a unit-scale t(nu) draw into a
/// unit-variance one.
pub fn unit_variance_scale(nu: f64) -> f64 {
    ((nu - 2.0) / nu).sqrt()
}

/// E|Z| for a unit-variance Student-t innovation.
pub fn abs_moment(nu: f64) -> f64 {
    2.0 * (nu - 2.0).sqrt() * (ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu)).exp()
        / (std::f64::consts::PI.sqrt() * (nu - 1.0))
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Shares `(s_1..s_k)` with `s_i > 0` and `sum < 1`, from `k` free values
/// (the implicit last logit is 0).
fn simplex(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().fold(0.0_f64, |a, &b| a.max(b));
    let exps: Vec<f64> = theta.iter().map(|t| (t - m).exp()).collect();
    let denom = exps.iter().sum::<f64>() + (-m).exp();
    exps.iter().map(|e| e / denom).collect()
}

fn simplex_inverse(shares: &[f64]) -> Vec<f64> {
    let rest = 1.0 - shares.iter().sum::<f64>();
    shares.iter().map(|s| (s / rest).ln()).collect()
}

/// Map from unconstrained optimizer coordinates to valid parameters.
/// `scale` is the return scale; the mean intercept is measured in it.
pub(crate) fn from_unconstrained(variant: GarchVariant, theta: &[f64], scale: f64) -> GarchParams {
    let phi0 = theta[0] * scale;
    let phi1 = theta[1].tanh();
    let nu_idx = theta.len() - 1;
    let nu = NU_MIN + (NU_MAX - NU_MIN) * logistic(theta[nu_idx]);
    let variance = match variant {
        GarchVariant::Garch => {
            let s = simplex(&theta[3..5]);
            vec![theta[2].exp(), s[0], s[1]]
        }
        GarchVariant::Gjr => {
            let s = simplex(&theta[3..6]);
            let k1 = 2.0 * s[0];
            let k1_plus_k2 = 2.0 * s[1];
            vec![theta[2].exp(), k1, k1_plus_k2 - k1, s[2]]
        }
        GarchVariant::Egarch => vec![theta[2], theta[3], theta[4].tanh(), theta[5]],
    };
    GarchParams {
        phi0,
        phi1,
        variance,
        nu,
    }
}

/// Inverse of [`from_unconstrained`] for interior parameters.
pub(crate) fn to_unconstrained(variant: GarchVariant, p: &GarchParams, scale: f64) -> Vec<f64> {
    let clamp = |x: f64, lim: f64| x.clamp(-lim, lim);
    let mut theta = vec![p.phi0 / scale, clamp(p.phi1, 0.999).atanh()];
    let v = &p.variance;
    match variant {
        GarchVariant::Garch => {
            theta.push(v[0].ln());
            let s = [v[1].max(1e-8), v[2].max(1e-8)];
            theta.extend(simplex_inverse(&s));
        }
        GarchVariant::Gjr => {
            theta.push(v[0].ln());
            let s = [(0.5 * v[1]).max(1e-8), (0.5 * (v[1] + v[2])).max(1e-8), v[3].max(1e-8)];
            theta.extend(simplex_inverse(&s));
        }
        GarchVariant::Egarch => {
            theta.extend([v[0], v[1], clamp(v[2], 0.9999).atanh(), v[3]]);
        }
    }
    let frac = ((p.nu.clamp(NU_MIN + 1e-6, NU_MAX - 1e-6)) - NU_MIN) / (NU_MAX - NU_MIN);
    theta.push(logit(frac));
    theta
}
