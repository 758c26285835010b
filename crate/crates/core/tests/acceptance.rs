//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs without the libtest harness so the lines always print.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use rayon::prelude::*;
use statrs::distribution::{Binomial, Continuous, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use tailrisk::backtest::{
    cci_test, deviation_record, dq_test, fisher_combine, pof_test, un_statistic, DeviationRecord, HitSequence,
    UnCalibration, UnReference, DEFAULT_DQ_LAGS,
};
use tailrisk::empirical::{ewqr_var, hs_var, qr_fit, QrDesign, QuantileRule};
use tailrisk::engine::{
    forecast_series, percent, render_report, run_on_series, simulate_fuels, trimmed, ReportFormat, RunConfig,
    SeriesData,
};
use tailrisk::esbridge::es_discretized;
use tailrisk::garch::{
    es_closed_form, filter, fit, negative_log_likelihood, simulate, simulation_start, var_closed_form, CondMoments,
    GarchParams, GarchVariant,
};
use tailrisk::ingest::{business_days, DatedColumns, ReturnSeries};
use tailrisk::numerics::quadrature::integrate;
use tailrisk::numerics::seed::derive_seed;
use tailrisk::numerics::special::normal_ppf;
use tailrisk::tailindex::{empirical_tail_index, garch_tail_index, Innovation};
use tailrisk::TailSide;

const ROOT_SEED: u64 = 20_150_102;

const FISHER_F_TOL: f64 = 1e-3;
const FISHER_P_TOL: f64 = 5e-4;
const GOF_LEVEL: f64 = 0.01;
const FISHER_BUDGET: Duration = Duration::from_secs(10);

const RECOVERY_SEEDS: usize = 100;
const RECOVERY_T: usize = 4000;
const RECOVERY_MIN_HITS: usize = 95;
const RECOVERY_SE: f64 = 3.0;
const RECOVERY_BUDGET: Duration = Duration::from_secs(120);

const COVERAGE_T: usize = 10_000;
const COVERAGE_REPS: usize = 2000;
const COVERAGE_N: usize = 700;
const SIZE_TOL: f64 = 0.01;
const COVERAGE_BUDGET: Duration = Duration::from_secs(300);

const NORMAL_ES: f64 = -1.9067;
const NORMAL_ES_TOL: f64 = 1e-3;
const SYMMETRY_TOL: f64 = 1e-12;

const CLOSED_FORM_TOL: f64 = 1e-6;

const IGARCH_TOL: f64 = 1e-3;
const MC_DRAWS: usize = 10_000_000;
const MC_REL_TOL: f64 = 0.02;
const PARETO_N: usize = 100_000;
const PARETO_TOL: f64 = 0.05;
const TAIL_BUDGET: Duration = Duration::from_secs(120);

const UN_RUNS: usize = 1000;
const UN_N: usize = 2500;
const UN_P: f64 = 0.05;
const UN_CAL_PATHS: usize = 50_000;

const AUDITED_DATES: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn truth() -> GarchParams {
    GarchParams::garch(0.0, 0.1, 4e-6, 0.90, 0.08, 6.0)
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn expected_failures() -> Outcome {
    let cell = |n: usize| {
        let h = HitSequence::new(vec![false; n], 0.01).unwrap();
        trimmed(deviation_record(&h).expected_failures, 2)
    };
    let (a, b) = (cell(698), cell(688));
    let dev = percent(DeviationRecord::new(14, 6.82).deviation);
    Outcome::new(
        a == "6.98" && b == "6.88" && dev == "105.28%",
        format!("N=698 -> {a}, N=688 -> {b}, 14 vs 6.82 -> {dev}"),
    )
}

fn chi2_8_cdf(x: f64) -> f64 {
    let h = x / 2.0;
    1.0 - (-h).exp() * (1.0 + h + h * h / 2.0 + h * h * h / 6.0)
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let s: f64 = (1..=100)
        .map(|k| (-1f64).powi(k - 1) * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp())
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn fisher() -> Outcome {
    let start = Instant::now();
    let r = fisher_combine(&[0.05, 0.05]).unwrap();
    let f_oracle = -4.0 * 0.05f64.ln();
    // chi-square(4) survival function in closed form
    let p_oracle = (-f_oracle / 2.0).exp() * (1.0 + f_oracle / 2.0);
    let point = (r.statistic - 11.983).abs() <= FISHER_F_TOL
        && (r.p_value - 0.0175).abs() <= FISHER_P_TOL
        && (r.p_value - p_oracle).abs() < 1e-9;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, "fisher", &[]));
    let mut u: Vec<f64> = (0..10_000)
        .map(|_| {
            let ps: Vec<f64> = (0..4).map(|_| rng.random_range(f64::MIN_POSITIVE..1.0)).collect();
            chi2_8_cdf(fisher_combine(&ps).unwrap().statistic)
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max);
    let ks_p = ks_p_value(d, u.len());
    let elapsed = start.elapsed();
    Outcome::new(
        point && ks_p >= GOF_LEVEL && elapsed < FISHER_BUDGET,
        format!(
            "F = {:.4}, p = {:.5}; KS vs chi2(8): D = {d:.4}, p = {ks_p:.3}; {}",
            r.statistic,
            r.p_value,
            secs(elapsed)
        ),
    )
}

fn recovery() -> Outcome {
    let start = Instant::now();
    let p = truth();
    let want = p.to_vec();
    let names = GarchVariant::Garch.param_names();
    let runs: Vec<Option<Vec<bool>>> = (0..RECOVERY_SEEDS)
        .into_par_iter()
        .map(|i| {
            let r = simulate(
                &p,
                GarchVariant::Garch,
                RECOVERY_T,
                derive_seed(ROOT_SEED, "recovery", &[i as u64]),
            )
            .ok()?;
            let m = fit(r.values(), GarchVariant::Garch).ok()?;
            let got = m.params.to_vec();
            Some(
                (0..want.len())
                    .map(|j| {
                        let se = m.standard_errors[j];
                        se.is_finite() && (got[j] - want[j]).abs() <= RECOVERY_SE * se
                    })
                    .collect(),
            )
        })
        .collect();
    let elapsed = start.elapsed();
    let failed_fits = runs.iter().filter(|r| r.is_none()).count();
    let counts: Vec<usize> = (0..want.len())
        .map(|j| runs.iter().flatten().filter(|inside| inside[j]).count())
        .collect();
    let pass = counts.iter().all(|c| *c >= RECOVERY_MIN_HITS) && elapsed < RECOVERY_BUDGET;
    let per: Vec<String> = names.iter().zip(&counts).map(|(n, c)| format!("{n} {c}")).collect();
    Outcome::new(
        pass,
        format!(
            "runs within 3 SE of {RECOVERY_SEEDS}: {}; failed fits {failed_fits}; {}",
            per.join(", "),
            secs(elapsed)
        ),
    )
}

/// True-parameter VaR and ES for `r[1..]` plus the matching returns.
fn true_forecasts(r: &[f64], alpha: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let p = truth();
    let steps = filter(&p, GarchVariant::Garch, r).unwrap();
    let cms: Vec<CondMoments> = steps
        .iter()
        .map(|s| CondMoments {
            mu: s.mu,
            sigma: s.sigma,
        })
        .collect();
    let var = cms.iter().map(|cm| var_closed_form(cm, p.nu, alpha).unwrap()).collect();
    let es = cms.iter().map(|cm| es_closed_form(cm, p.nu, alpha).unwrap()).collect();
    (r[1..].to_vec(), var, es)
}

fn hits(r: &[f64], var: &[f64], alpha: f64) -> HitSequence {
    let side = TailSide::of(alpha);
    HitSequence::new(r.iter().zip(var).map(|(x, v)| side.is_hit(*x, *v)).collect(), alpha).unwrap()
}

fn coverage() -> Outcome {
    let start = Instant::now();
    let alpha = 0.05;
    let path = simulate(
        &truth(),
        GarchVariant::Garch,
        COVERAGE_T + 1,
        derive_seed(ROOT_SEED, "coverage", &[]),
    )
    .unwrap();
    let (r, var, _) = true_forecasts(path.values(), alpha);
    let count = hits(&r, &var, alpha).count() as u64;
    let binom = Binomial::new(alpha, COVERAGE_T as u64).unwrap();
    let lo = (0..=COVERAGE_T as u64).find(|k| binom.cdf(*k) > 0.005).unwrap();
    let hi = (0..=COVERAGE_T as u64).find(|k| binom.cdf(*k) >= 0.995).unwrap();
    let in_band = (lo..=hi).contains(&count);

    let rejects: Vec<[bool; 3]> = (0..COVERAGE_REPS)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ROOT_SEED, "coverage-size", &[i as u64]);
            let path = simulate(&truth(), GarchVariant::Garch, COVERAGE_N + 1, seed).unwrap();
            let (r, var, _) = true_forecasts(path.values(), alpha);
            let h = hits(&r, &var, alpha);
            [
                pof_test(&h).unwrap().reject_at_1pct,
                cci_test(&h).unwrap().reject_at_1pct,
                dq_test(&h, &var, DEFAULT_DQ_LAGS).unwrap().reject_at_1pct,
            ]
        })
        .collect();
    let rates: Vec<f64> = (0..3)
        .map(|j| rejects.iter().filter(|r| r[j]).count() as f64 / COVERAGE_REPS as f64)
        .collect();
    let sized = rates.iter().all(|r| (r - 0.01).abs() <= SIZE_TOL);
    let elapsed = start.elapsed();
    Outcome::new(
        in_band && sized && elapsed < COVERAGE_BUDGET,
        format!(
            "{count} hits in {COVERAGE_T} (99% band {lo}..={hi}); rejection rates POF {:.2}%, CCI {:.2}%, DQ {:.2}%; {}",
            100.0 * rates[0],
            100.0 * rates[1],
            100.0 * rates[2],
            secs(elapsed)
        ),
    )
}

fn es_discretization() -> Outcome {
    let left = es_discretized(|a| Ok(normal_ppf(a)), 0.05, TailSide::Left).unwrap();
    let right = es_discretized(|a| Ok(normal_ppf(a)), 0.95, TailSide::Right).unwrap();
    let n = Normal::new(0.0, 1.0).unwrap();
    let oracle = [0.05, 0.0375, 0.025, 0.0125]
        .iter()
        .map(|a| n.inverse_cdf(*a))
        .sum::<f64>()
        / 4.0;
    Outcome::new(
        (left - NORMAL_ES).abs() <= NORMAL_ES_TOL
            && (left - oracle).abs() <= 1e-9
            && (left + right).abs() <= SYMMETRY_TOL,
        format!(
            "left {left:.6} (oracle {oracle:.6}), right {right:.6}, |left + right| = {:.1e}",
            (left + right).abs()
        ),
    )
}

/// Unit-variance t ES by integrating `x f(x)` over the tail; `x = q / v`
/// maps `v` in (0, 1] onto (-inf, q].
fn t_es_quadrature(nu: f64, alpha: f64) -> f64 {
    let t = StudentsT::new(0.0, 1.0, nu).unwrap();
    let q = t.inverse_cdf(alpha);
    let tail = integrate(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let x = q / v;
            x * t.pdf(x) * (-q) / (v * v)
        },
        0.0,
        1.0,
        1e-13,
        1e-12,
    );
    ((nu - 2.0) / nu).sqrt() * tail.value / alpha
}

fn closed_form_es() -> Outcome {
    let cm = CondMoments { mu: 0.0, sigma: 1.0 };
    let mut worst: f64 = 0.0;
    for nu in [4.0, 6.0, 10.0] {
        for alpha in [0.01, 0.05] {
            let closed = es_closed_form(&cm, nu, alpha).unwrap();
            worst = worst.max((closed - t_es_quadrature(nu, alpha)).abs());
        }
    }
    Outcome::new(
        worst <= CLOSED_FORM_TOL,
        format!("max |closed form - quadrature| = {worst:.2e} over 6 cells"),
    )
}

/// Root of the Monte Carlo moment condition `mean((a z^2 + b)^k) = 1`.
fn mc_tail_index(alpha1: f64, beta1: f64, nu: f64) -> f64 {
    let scale = ((nu - 2.0) / nu).sqrt();
    let dist = StudentT::new(nu).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, "tail-mc", &[]));
    let logs: Vec<f64> = (0..MC_DRAWS)
        .map(|_| {
            let z = scale * dist.sample(&mut rng);
            (alpha1 * z * z + beta1).ln()
        })
        .collect();
    let g = |k: f64| logs.par_iter().map(|l| (k * l).exp()).sum::<f64>() / MC_DRAWS as f64 - 1.0;
    let (mut lo, mut hi) = (1.0, nu / 2.0 - 0.05);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tail_index() -> Outcome {
    let start = Instant::now();
    let igarch = garch_tail_index(0.1, 0.9, Innovation::Gaussian).unwrap();
    let k = garch_tail_index(0.08, 0.90, Innovation::StudentT(6.0)).unwrap();
    let mc = mc_tail_index(0.08, 0.90, 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, "pareto", &[]));
    let x: Vec<f64> = (0..PARETO_N)
        .map(|_| rng.random_range(f64::MIN_POSITIVE..1.0).powf(-1.0 / 3.0))
        .collect();
    let k_star = empirical_tail_index(&x, 0.95).unwrap().k_star;
    // exact quantiles of the same law, free of sampling noise
    let strata: Vec<f64> = (0..PARETO_N).map(|i| ((i as f64 + 0.5) / PARETO_N as f64).powf(-1.0 / 3.0)).collect();
    let k_strata = empirical_tail_index(&strata, 0.95).unwrap().k_star;
    let elapsed = start.elapsed();
    Outcome::new(
        (igarch - 1.0).abs() <= IGARCH_TOL
            && ((k - mc) / mc).abs() <= MC_REL_TOL
            && (k_star - 1.5).abs() <= PARETO_TOL
            && (k_strata - 1.5).abs() <= PARETO_TOL
            && elapsed < TAIL_BUDGET,
        format!(
            "IGARCH k = {igarch:.6}; t6 k = {k:.4} vs MC {mc:.4}; Pareto k* = {k_star:.4} sampled, {k_strata:.4} stratified; {}",
            secs(elapsed)
        ),
    )
}

fn reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, "reductions", &[]));
    let history: Vec<f64> = (0..400).map(|_| rng.random_range(-0.05..0.05)).collect();
    let mut ewqr_equal = true;
    for window in [60, 250, 400] {
        let w = &history[history.len() - window..];
        for alpha in [0.01, 0.05, 0.5, 0.95, 0.99] {
            let hs = hs_var(w, alpha, window).unwrap();
            for rule in [QuantileRule::Step, QuantileRule::Interpolated] {
                ewqr_equal &= ewqr_var(w, alpha, 1.0, rule).unwrap().to_bits() == hs.to_bits();
            }
        }
    }

    let r = simulate(
        &truth(),
        GarchVariant::Garch,
        1500,
        derive_seed(ROOT_SEED, "reductions-garch", &[]),
    )
    .unwrap();
    let g = truth();
    let gjr = GarchParams::gjr(g.phi0, g.phi1, [g.variance[0], g.variance[2], 0.0, g.variance[1]], g.nu);
    let nll_g = negative_log_likelihood(&g, GarchVariant::Garch, r.values()).unwrap();
    let nll_j = negative_log_likelihood(&gjr, GarchVariant::Gjr, r.values()).unwrap();

    // n * alpha is never an integer here, so the minimizer is the ceil(n * alpha)-th order statistic
    let y: Vec<f64> = (0..501).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut sorted = y.clone();
    sorted.sort_by(f64::total_cmp);
    let design = QrDesign::new(y.clone(), vec![vec![]; y.len()], vec![]).unwrap();
    let mut qr_gap: f64 = 0.0;
    for alpha in [0.01, 0.05, 0.25, 0.95, 0.99] {
        let empirical = sorted[(alpha * y.len() as f64).ceil() as usize - 1];
        qr_gap = qr_gap.max((qr_fit(&design, alpha).unwrap().intercept - empirical).abs());
    }
    Outcome::new(
        ewqr_equal && nll_g.to_bits() == nll_j.to_bits() && qr_gap <= 1e-12,
        format!(
            "EWQR(lambda=1) == HS bitwise: {ewqr_equal}; NLL GARCH {nll_g:.6} vs GJR {nll_j:.6}; max |QR - quantile| = {qr_gap:.1e}"
        ),
    )
}

fn un_calibration() -> Outcome {
    let zs: Vec<(f64, f64)> = (0..UN_RUNS)
        .into_par_iter()
        .map(|i| {
            let path = simulate(
                &truth(),
                GarchVariant::Garch,
                UN_N + 1,
                derive_seed(ROOT_SEED, "un", &[i as u64]),
            )
            .unwrap();
            let (r, var, es) = true_forecasts(path.values(), UN_P);
            let half: Vec<f64> = es.iter().map(|e| e / 2.0).collect();
            (
                un_statistic(&r, &var, &es, UN_P).unwrap(),
                un_statistic(&r, &var, &half, UN_P).unwrap(),
            )
        })
        .collect();
    let n = zs.len() as f64;
    let mean = zs.iter().map(|z| z.0).sum::<f64>() / n;
    let sd = (zs.iter().map(|z| (z.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mc_error = sd / n.sqrt();
    let all_negative = zs.iter().all(|z| z.1 < 0.0);
    let seed = derive_seed(ROOT_SEED, "un-critical", &[]);
    let normal = UnCalibration::simulate(UnReference::Normal, UN_N, UN_P, UN_CAL_PATHS, seed)
        .unwrap()
        .critical_value(0.01);
    let t3 = UnCalibration::simulate(UnReference::StudentT3, UN_N, UN_P, UN_CAL_PATHS, seed)
        .unwrap()
        .critical_value(0.01);
    Outcome::new(
        mean.abs() <= 3.0 * mc_error && all_negative && t3 < normal,
        format!(
            "mean Z = {mean:.4} (3 MC s.e. = {:.4}); halved ES negative in {}/{UN_RUNS}; critical t3 {t3:.4} < Normal {normal:.4}",
            3.0 * mc_error,
            zs.iter().filter(|z| z.1 < 0.0).count()
        ),
    )
}

fn determinism_and_look_ahead() -> Outcome {
    let n = 520;
    let n_in = 400;
    let r = simulate(&truth(), GarchVariant::Garch, n, derive_seed(ROOT_SEED, "e2e", &[])).unwrap();
    let dates = business_days(simulation_start(), n + 1);
    let fuels = simulate_fuels(
        &dates,
        &["coal", "gas", "co2"],
        derive_seed(ROOT_SEED, "e2e-fuels", &[]),
    );
    let cfg = RunConfig {
        refit_cadence: 30,
        un_paths: 2000,
        ..RunConfig::default()
    };
    let series = |values: Vec<f64>| {
        let rs = ReturnSeries::new(r.dates().to_vec(), values).unwrap();
        SeriesData::with_split_index("SIM M1", "SIM", "M1", rs, n_in)
    };

    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let b = run_on_series(&cfg, &[series(r.values().to_vec())], Some(&fuels)).unwrap();
        let out = dir.path().join(run);
        let mut written = render_report(&b, ReportFormat::Csv, &out).unwrap();
        written.extend(render_report(&b, ReportFormat::Table, &out).unwrap());
        files.push(written);
    }
    for (a, b) in files[0].iter().zip(&files[1]) {
        identical &= std::fs::read(a).unwrap() == std::fs::read(b).unwrap();
    }
    identical &= files[0].len() == files[1].len() && !files[0].is_empty();

    let base = forecast_series(&series(r.values().to_vec()), Some(&fuels), &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ROOT_SEED, "audit", &[]));
    let mut audited: Vec<usize> = rand::seq::index::sample(&mut rng, n - n_in, AUDITED_DATES).into_vec();
    audited.sort_unstable();
    let mut leaks = Vec::new();
    for &t in &audited {
        // everything from the audited date on is replaced: returns and fuel quotes
        let mut values = r.values().to_vec();
        for v in &mut values[n_in + t..] {
            *v = 5.0 * *v + rng.random_range(-0.05..0.05);
        }
        let cut = r.dates()[n_in + t];
        let mut f: DatedColumns = fuels.clone();
        for col in &mut f.values {
            for (d, v) in f.dates.iter().zip(col.iter_mut()) {
                if *d >= cut {
                    *v *= rng.random_range(0.5..1.5);
                }
            }
        }
        let mutated = forecast_series(&series(values), Some(&f), &cfg).unwrap();
        for (a, b) in base.models.iter().zip(&mutated.models) {
            let (Ok(pa), Ok(pb)) = (&a.outcome, &b.outcome) else {
                leaks.push(format!(
                    "{} unavailable: {:?} {:?}",
                    a.model,
                    a.outcome.as_ref().err(),
                    b.outcome.as_ref().err()
                ));
                continue;
            };
            for (x, y) in pa.iter().zip(pb) {
                let same =
                    (0..=t).all(|i| x.var[i].to_bits() == y.var[i].to_bits() && x.es[i].to_bits() == y.es[i].to_bits());
                if !same {
                    leaks.push(format!("{} alpha {} day {t}", a.model, x.alpha));
                }
            }
        }
    }
    Outcome::new(
        identical && leaks.is_empty(),
        format!(
            "{} report files byte-identical: {identical}; {} audited dates, {} forecast changes before the mutation{}",
            files[0].len(),
            audited.len(),
            leaks.len(),
            leaks.first().map(|l| format!(" (first: {l})")).unwrap_or_default()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("expected-failure arithmetic", expected_failures),
        ("Fisher combination", fisher),
        ("GARCH parameter recovery", recovery),
        ("coverage under the true model", coverage),
        ("ES discretization", es_discretization),
        ("closed-form Student-t ES", closed_form_es),
        ("tail index", tail_index),
        ("reductions", reductions),
        ("UN calibration", un_calibration),
        ("determinism and no look-ahead", determinism_and_look_ahead),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} of {ran} criteria pass", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
