use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};

use crate::error::{Error, Result};
use crate::ingest::ReturnSeries;

use super::filter::{Lagged, Recursion};
use super::params::{unit_variance_scale, GarchParams, GarchVariant};

pub const BURN_IN: usize = 1000;

/// First date stamped on simulated series.
pub fn simulation_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2008, 1, 2).expect("valid date")
}

/// Unit-variance Student-t innovation sampler.
pub struct Innovations {
    dist: StudentT<f64>,
    scale: f64,
}

impl Innovations {
    pub fn new(nu: f64) -> Result<Self> {
        let dist = StudentT::new(nu).map_err(|e| Error::param("nu", e.to_string()))?;
        Ok(Self {
            dist,
            scale: unit_variance_scale(nu),
        })
    }

    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng) * self.scale
    }
}

/// Simulates `n` returns after discarding a burn-in; deterministic in `seed`.
pub fn simulate(params: &GarchParams, variant: GarchVariant, n: usize, seed: u64) -> Result<ReturnSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = simulate_with(params, variant, n, &mut rng)?;
    Ok(ReturnSeries::from_values(simulation_start(), values))
}

pub fn simulate_with<R: rand::Rng + ?Sized>(
    params: &GarchParams,
    variant: GarchVariant,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate(variant)?;
    let z = Innovations::new(params.nu)?;
    let rec = Recursion::new(params, variant);
    let mut lag = Lagged::Presample(params.unconditional_variance(variant));
    let mut prev = params.phi0 / (1.0 - params.phi1);
    let mut out = Vec::with_capacity(n);
    for t in 0..BURN_IN + n {
        let var = rec.next_variance(lag);
        let a = var.sqrt() * z.draw(rng);
        let r = params.phi0 + params.phi1 * prev + a;
        if t >= BURN_IN {
            out.push(r);
        }
        lag = Lagged::Observed {
            variance: var,
            residual: a,
        };
        prev = r;
    }
    Ok(out)
}
