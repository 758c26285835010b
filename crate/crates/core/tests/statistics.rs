//! Monte Carlo properties that need many draws or long paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use tailrisk::backtest::{bin_test, pof_test, HitSequence};
use tailrisk::garch::{
    filter, fit, simulate, simulation_start, var_closed_form, CondMoments, GarchParams, GarchVariant,
};
use tailrisk::ingest::{descriptive_stats, ReturnSeries};
use tailrisk::numerics::seed::derive_seed;
use tailrisk::tailindex::{empirical_tail_index, garch_tail_index, Innovation};
use tailrisk::TailSide;

const SEED: u64 = 77;

fn truth() -> GarchParams {
    GarchParams::garch(0.0, 0.1, 4e-6, 0.90, 0.08, 6.0)
}

#[test]
fn gaussian_sample_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = descriptive_stats(&ReturnSeries::from_values(simulation_start(), x)).unwrap();
    assert!(s.skewness.abs() < 0.08, "{}", s.skewness);
    assert!((s.kurtosis - 3.0).abs() < 0.2, "{}", s.kurtosis);
    assert!(s.jarque_bera_pvalue > 0.01, "{}", s.jarque_bera_pvalue);
}

#[test]
fn well_specified_residuals_are_white() {
    let reps = 40;
    let passed = (0..reps)
        .into_par_iter()
        .filter(|&i| {
            let r = simulate(&truth(), GarchVariant::Garch, 1500, derive_seed(SEED, "lb", &[i])).unwrap();
            let m = fit(r.values(), GarchVariant::Garch).unwrap();
            let z: Vec<f64> = filter(&m.params, GarchVariant::Garch, r.values())
                .unwrap()
                .iter()
                .map(|s| s.standardized_residual)
                .collect();
            let s = descriptive_stats(&ReturnSeries::from_values(simulation_start(), z)).unwrap();
            s.ljung_box.iter().find(|lb| lb.lag == 10).unwrap().p_value >= 0.01
        })
        .count();
    assert!(passed * 100 >= 95 * reps as usize, "{passed} of {reps}");
}

/// Rejection rates of Bin and POF on true-model VaR(5%) with volatility
/// multiplied by `vol_scale`.
fn rejection_rates(vol_scale: f64) -> (f64, f64) {
    let reps = 2000;
    let n = 700;
    let rejects: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let p = truth();
            let r = simulate(&p, GarchVariant::Garch, n + 1, derive_seed(SEED, "size", &[i])).unwrap();
            let steps = filter(&p, GarchVariant::Garch, r.values()).unwrap();
            let hits = steps
                .iter()
                .zip(&r.values()[1..])
                .map(|(s, x)| {
                    let v = var_closed_form(
                        &CondMoments {
                            mu: s.mu,
                            sigma: vol_scale * s.sigma,
                        },
                        p.nu,
                        0.05,
                    )
                    .unwrap();
                    TailSide::Left.is_hit(*x, v)
                })
                .collect();
            let h = HitSequence::new(hits, 0.05).unwrap();
            (
                bin_test(&h).unwrap().reject_at_1pct,
                pof_test(&h).unwrap().reject_at_1pct,
            )
        })
        .collect();
    let rate = |f: fn(&(bool, bool)) -> bool| rejects.iter().filter(|r| f(r)).count() as f64 / reps as f64;
    (rate(|r| r.0), rate(|r| r.1))
}

#[test]
fn binomial_test_size_and_pof_power() {
    let (bin, _) = rejection_rates(1.0);
    assert!((bin - 0.01).abs() <= 0.01, "Bin size {bin}");
    let (_, pof) = rejection_rates(0.5);
    assert!(pof > 0.8, "POF power {pof}");
}

#[test]
fn long_path_tail_matches_the_moment_condition() {
    // k near 1.5, as for electricity futures. Lighter tails converge more
    // slowly: at (0.08, 0.90, t6) the 5% fit sits about 26% below k.
    let (alpha1, beta1, nu) = (0.12, 0.87, 10.0);
    let p = GarchParams::garch(0.0, 0.0, 4e-6, beta1, alpha1, nu);
    let r = simulate(&p, GarchVariant::Garch, 1_000_000, derive_seed(SEED, "tail", &[])).unwrap();
    let k = garch_tail_index(alpha1, beta1, Innovation::StudentT(nu)).unwrap();
    for q in [0.05, 0.95] {
        let k_star = empirical_tail_index(r.values(), q).unwrap().k_star;
        assert!((k_star / k - 1.0).abs() < 0.15, "threshold {q}: k* {k_star} vs k {k}");
    }
}
