//! Unconditional ES backtest on ES-scaled tail returns, calibrated by
//! simulation under a Normal or Student-t(3) reference.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::numerics::seed::derive_seed;
use crate::numerics::special::{normal_pdf, normal_ppf, student_t_pdf, student_t_ppf};
use crate::risk::{check_alpha, TailSide};

use super::hits::{TestName, TestResult, SIGNIFICANCE};

pub const MIN_CALIBRATION_PATHS: usize = 50_000;
pub const REFERENCE_T_DOF: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnReference {
    Normal,
    StudentT3,
}

impl UnReference {
    pub fn test_name(self) -> TestName {
        match self {
            UnReference::Normal => TestName::UnNormal,
            UnReference::StudentT3 => TestName::UnT,
        }
    }

    fn tag(self) -> u64 {
        match self {
            UnReference::Normal => 0,
            UnReference::StudentT3 => 1,
        }
    }

    fn quantile(self, u: f64) -> f64 {
        match self {
            UnReference::Normal => normal_ppf(u),
            UnReference::StudentT3 => student_t_ppf(u, REFERENCE_T_DOF),
        }
    }

    /// Left-tail ES at hit probability `p`.
    fn left_es(self, p: f64) -> f64 {
        let q = self.quantile(p);
        match self {
            UnReference::Normal => -normal_pdf(q) / p,
            UnReference::StudentT3 => {
                let nu = REFERENCE_T_DOF;
                -student_t_pdf(q, nu) * (nu + q * q) / ((nu - 1.0) * p)
            }
        }
    }
}

impl fmt::Display for UnReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.test_name().as_str())
    }
}

/// `Z = 1 - sum(r_t hit_t / ES_t) / (N p)` with signed ES (negative on the
/// left tail, positive on the right). Zero under a correct ES, negative when
/// the ES understates the tail.
pub fn un_statistic(returns: &[f64], var: &[f64], es: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if returns.len() != var.len() || returns.len() != es.len() {
        return Err(Error::LengthMismatch {
            left: returns.len(),
            right: var.len().min(es.len()),
        });
    }
    if returns.is_empty() {
        return Err(Error::TooShort { needed: 1, have: 0 });
    }
    if let Some(i) = es.iter().position(|e| *e == 0.0 || !e.is_finite()) {
        return Err(Error::param(
            "es",
            format!("ES forecast at position {i} is zero or non-finite"),
        ));
    }
    let side = TailSide::of(alpha);
    let p = side.hit_probability(alpha);
    let sum: f64 = (0..returns.len())
        .filter(|&t| side.is_hit(returns[t], var[t]))
        .map(|t| returns[t] / es[t])
        .sum();
    Ok(1.0 - sum / (returns.len() as f64 * p))
}

/// Sorted simulated null distribution of `Z` for one `(N, p, reference)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnCalibration {
    pub reference: UnReference,
    pub n: usize,
    pub p: f64,
    sorted: Vec<f64>,
}

impl UnCalibration {
    /// Simulates `paths` null paths: `K ~ Binomial(N, p)` tail draws
    /// `Q(p U)` from the reference law scaled by its own ES.
    pub fn simulate(reference: UnReference, n: usize, p: f64, paths: usize, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("{p} is outside (0, 1)")));
        }
        if n == 0 || paths == 0 {
            return Err(Error::param("n", "sample size and path count must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let binom = Binomial::new(n as u64, p).map_err(|e| Error::param("p", e.to_string()))?;
        let es = reference.left_es(p);
        let scale = n as f64 * p;
        let mut sorted: Vec<f64> = (0..paths)
            .map(|_| {
                let k = binom.sample(&mut rng);
                let sum: f64 = (0..k)
                    .map(|_| {
                        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                        reference.quantile(p * u) / es
                    })
                    .sum();
                1.0 - sum / scale
            })
            .collect();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            reference,
            n,
            p,
            sorted,
        })
    }

    pub fn paths(&self) -> usize {
        self.sorted.len()
    }

    /// Lower `confidence`-quantile of the simulated `Z`.
    pub fn critical_value(&self, confidence: f64) -> f64 {
        let idx = ((confidence * self.sorted.len() as f64).ceil() as usize).clamp(1, self.sorted.len()) - 1;
        self.sorted[idx]
    }

    /// Fraction of simulated `Z` at or below `z`.
    pub fn p_value(&self, z: f64) -> f64 {
        self.sorted.partition_point(|s| *s <= z) as f64 / self.sorted.len() as f64
    }
}

/// Critical value of `Z` at `confidence` from `paths` simulated null paths.
pub fn simulate_critical_value(
    reference: UnReference,
    n: usize,
    p: f64,
    confidence: f64,
    paths: usize,
    seed: u64,
) -> Result<f64> {
    Ok(UnCalibration::simulate(reference, n, p, paths, seed)?.critical_value(confidence))
}

type CalibrationMap = BTreeMap<(UnReference, usize, u64), Arc<UnCalibration>>;

/// Calibrations shared across cells, keyed by `(reference, N, p)`. Seeds
/// derive from the root seed and the key, so results do not depend on the
/// order cells are evaluated in.
#[derive(Debug, Clone)]
pub struct CalibrationCache {
    root_seed: u64,
    paths: usize,
    cache: Arc<Mutex<CalibrationMap>>,
}

impl CalibrationCache {
    pub fn new(root_seed: u64, paths: usize) -> Self {
        Self {
            root_seed,
            paths: paths.max(1),
            cache: Arc::default(),
        }
    }

    pub fn get(&self, reference: UnReference, n: usize, p: f64) -> Result<Arc<UnCalibration>> {
        let key = (reference, n, p.to_bits());
        if let Some(c) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(c));
        }
        let seed = derive_seed(
            self.root_seed,
            "un-calibration",
            &[reference.tag(), n as u64, p.to_bits()],
        );
        let cal = Arc::new(UnCalibration::simulate(reference, n, p, self.paths, seed)?);
        self.cache.lock().expect("cache lock").insert(key, Arc::clone(&cal));
        Ok(cal)
    }
}

/// UN test: one-sided, rejecting when `Z` is improbably low under the reference.
pub fn un_test(
    returns: &[f64],
    var: &[f64],
    es: &[f64],
    alpha: f64,
    calibration: &UnCalibration,
) -> Result<TestResult> {
    let z = un_statistic(returns, var, es, alpha)?;
    let p = TailSide::of(alpha).hit_probability(alpha);
    if calibration.n != returns.len() || calibration.p.to_bits() != p.to_bits() {
        return Err(Error::param(
            "calibration",
            format!(
                "calibrated for N = {}, p = {}; test has N = {}, p = {p}",
                calibration.n,
                calibration.p,
                returns.len()
            ),
        ));
    }
    Ok(
        TestResult::new(calibration.reference.test_name(), z, calibration.p_value(z))
            .with("critical_value", calibration.critical_value(SIGNIFICANCE)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

/// Inconsistent when the Normal reference sees no underestimation but the
/// Student-t(3) reference does.
pub fn consistency_check(un_normal: &TestResult, un_t: &TestResult) -> Consistency {
    if !un_normal.reject_at_1pct && un_t.reject_at_1pct {
        Consistency::Inconsistent
    } else {
        Consistency::Consistent
    }
}
