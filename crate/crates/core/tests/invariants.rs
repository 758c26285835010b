use proptest::prelude::*;

use tailrisk::backtest::{bin_test, cci_test, deviation_record, fisher_combine, hit_sequence, pof_test, HitSequence};
use tailrisk::empirical::{ewqr_var, hs_var, qr_fit, QrDesign, QuantileRule};
use tailrisk::engine::{prices_from_returns, LevelGrid, DEFAULT_LEVELS};
use tailrisk::esbridge::es_discretized;
use tailrisk::garch::{
    es_closed_form, negative_log_likelihood, simulation_start, var_closed_form, CondMoments, GarchParams, GarchVariant,
};
use tailrisk::ingest::{business_days, compute_returns, descriptive_stats, split_sample, ReturnSeries};
use tailrisk::numerics::special::student_t_ppf;
use tailrisk::tailindex::{empirical_tail_index, garch_tail_index, Innovation};
use tailrisk::TailSide;

fn returns(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.1f64..0.1, min..max)
}

fn level() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn price_round_trip_is_exact_without_rolls(r in returns(2, 200)) {
        let p = prices_from_returns(&r, simulation_start(), 40.0).unwrap();
        let back = compute_returns(&p).unwrap();
        for (a, b) in back.values().iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_partitions_the_series(r in returns(2, 100), cut in 0usize..99) {
        let s = ReturnSeries::from_values(simulation_start(), r.clone());
        let cut = cut % (r.len() - 1);
        let (a, b) = split_sample(&s, s.dates()[cut]).unwrap();
        prop_assert_eq!(a.len() + b.len(), s.len());
        prop_assert!(a.dates().last() < b.dates().first());
        prop_assert_eq!([a.values(), b.values()].concat(), r);
    }

    #[test]
    fn moments_ignore_order_and_ljung_box_grows_with_lag(r in returns(60, 200), seed in any::<u64>()) {
        let s = ReturnSeries::from_values(simulation_start(), r.clone());
        let a = descriptive_stats(&s).unwrap();
        let mut shuffled = r.clone();
        let mut x = seed | 1;
        for i in (1..shuffled.len()).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            shuffled.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let b = descriptive_stats(&ReturnSeries::from_values(simulation_start(), shuffled)).unwrap();
        prop_assert!((a.mean - b.mean).abs() < 1e-12);
        prop_assert!((a.std_dev - b.std_dev).abs() < 1e-12);
        prop_assert!((a.skewness - b.skewness).abs() < 1e-9);
        prop_assert!((a.kurtosis - b.kurtosis).abs() < 1e-9);
        prop_assert_eq!(a.quantiles, b.quantiles);
        for w in a.ljung_box.windows(2) {
            prop_assert!(w[1].q >= w[0].q);
        }
        for lb in &a.ljung_box {
            prop_assert!((0.0..=1.0).contains(&lb.p_value));
        }
    }

    #[test]
    fn gjr_without_asymmetry_is_garch(
        r in returns(60, 300),
        (o1, o2) in (0.0f64..0.9, 0.0f64..0.1),
        phi1 in -0.5f64..0.5,
        nu in 2.5f64..50.0,
    ) {
        let g = GarchParams::garch(0.0, phi1, 1e-5, o1, o2, nu);
        let j = GarchParams::gjr(0.0, phi1, [1e-5, o2, 0.0, o1], nu);
        let a = negative_log_likelihood(&g, GarchVariant::Garch, &r).unwrap();
        let b = negative_log_likelihood(&j, GarchVariant::Gjr, &r).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn closed_form_risk_is_ordered(
        mu in -0.01f64..0.01,
        sigma in 1e-4f64..0.2,
        nu in 2.1f64..100.0,
        a in level(),
        b in level(),
    ) {
        let cm = CondMoments { mu, sigma };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(var_closed_form(&cm, nu, lo).unwrap() <= var_closed_form(&cm, nu, hi).unwrap());
        let v = var_closed_form(&cm, nu, lo).unwrap();
        let es = es_closed_form(&cm, nu, lo).unwrap();
        if lo < 0.5 {
            prop_assert!(es <= v);
        } else {
            prop_assert!(es >= v);
        }
    }

    #[test]
    fn historical_quantiles_stay_in_the_window(
        r in returns(5, 300),
        a in level(),
        lambda in 0.9f64..1.0,
        window in 1usize..300,
    ) {
        let window = window.min(r.len());
        let w = &r[r.len() - window..];
        let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        let hs = hs_var(&r, a, window).unwrap();
        prop_assert!(lo <= hs && hs <= hi);
        for rule in [QuantileRule::Step, QuantileRule::Interpolated] {
            let e = ewqr_var(w, a, lambda, rule).unwrap();
            prop_assert!(lo <= e && e <= hi);
        }
        prop_assert_eq!(ewqr_var(w, a, 1.0, QuantileRule::Step).unwrap().to_bits(), hs_var(w, a, window).unwrap().to_bits());
    }

    #[test]
    fn ewqr_is_monotone_in_the_level(r in returns(5, 300), a in level(), b in level(), lambda in 0.9f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for rule in [QuantileRule::Step, QuantileRule::Interpolated] {
            prop_assert!(ewqr_var(&r, lo, lambda, rule).unwrap() <= ewqr_var(&r, hi, lambda, rule).unwrap());
        }
    }

    #[test]
    fn discretized_es_is_beyond_var_for_monotone_curves(nu in 2.5f64..30.0, a in level(), shift in -1.0f64..1.0) {
        let side = TailSide::of(a);
        let var_at = |u: f64| shift + student_t_ppf(u, nu);
        let es = es_discretized(|u| Ok(var_at(u)), a, side).unwrap();
        match side {
            TailSide::Left => prop_assert!(es <= var_at(a)),
            TailSide::Right => prop_assert!(es >= var_at(a)),
        }
    }

    #[test]
    fn rearranged_grid_never_crosses(q in prop::collection::vec(-0.2f64..0.2, 16)) {
        let grid = LevelGrid::new(&DEFAULT_LEVELS);
        let q: Vec<f64> = q.into_iter().cycle().take(grid.levels().len()).collect();
        let out = grid.assemble(q, &DEFAULT_LEVELS).unwrap();
        for w in out.windows(2) {
            prop_assert!(w[0].0 <= w[1].0);
        }
        for (&a, (var, es)) in DEFAULT_LEVELS.iter().zip(&out) {
            match TailSide::of(a) {
                TailSide::Left => prop_assert!(es <= var),
                TailSide::Right => prop_assert!(es >= var),
            }
        }
    }

    #[test]
    fn fisher_grows_when_any_p_value_falls(
        p in prop::collection::vec(1e-6f64..1.0, 1..6),
        i in 0usize..6,
        factor in 0.01f64..0.99,
    ) {
        let i = i % p.len();
        let base = fisher_combine(&p).unwrap();
        let mut lower = p.clone();
        lower[i] *= factor;
        let next = fisher_combine(&lower).unwrap();
        prop_assert!(next.statistic > base.statistic);
        prop_assert!(next.p_value <= base.p_value);
        prop_assert!((0.0..=1.0).contains(&next.p_value));
    }

    #[test]
    fn coverage_tests_are_well_formed(hits in prop::collection::vec(prop::bool::weighted(0.05), 20..400), a in 0.005f64..0.2) {
        let h = HitSequence::new(hits.clone(), a).unwrap();
        for t in [bin_test(&h).unwrap(), pof_test(&h).unwrap(), cci_test(&h).unwrap()] {
            prop_assert!(t.statistic.is_finite());
            prop_assert!((0.0..=1.0).contains(&t.p_value));
            prop_assert_eq!(t.reject_at_1pct, t.p_value < 0.01);
        }
        let mut reversed = hits.clone();
        reversed.reverse();
        let r = HitSequence::new(reversed, a).unwrap();
        prop_assert_eq!(pof_test(&h).unwrap().statistic.to_bits(), pof_test(&r).unwrap().statistic.to_bits());
        let d = deviation_record(&h);
        let expected = hits.len() as f64 * a;
        prop_assert_eq!(d.deviation, (h.count() as f64 - expected) / expected);
    }

    #[test]
    fn reflected_returns_mirror_the_hits(r in returns(1, 100), v in returns(100, 101), a in 0.001f64..0.5) {
        let n = r.len();
        let dates = business_days(simulation_start(), n);
        let s = ReturnSeries::new(dates.clone(), r.clone()).unwrap();
        let m = ReturnSeries::new(dates, r.iter().map(|x| -x).collect()).unwrap();
        let var = &v[..n];
        let neg: Vec<f64> = var.iter().map(|x| -x).collect();
        let left = hit_sequence(&s, var, a, TailSide::Left).unwrap();
        let right = hit_sequence(&m, &neg, 1.0 - a, TailSide::Right).unwrap();
        prop_assert_eq!(left.hits, right.hits);
    }

    #[test]
    fn empirical_tail_index_ignores_scale(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut x = seed | 1;
        let sample: Vec<f64> = (0..2000)
            .map(|_| {
                x = x.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                let u = ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                u.powf(-0.4)
            })
            .collect();
        let a = empirical_tail_index(&sample, 0.9).unwrap();
        let scaled: Vec<f64> = sample.iter().map(|v| v * scale).collect();
        let b = empirical_tail_index(&scaled, 0.9).unwrap();
        prop_assert!((a.k_star - b.k_star).abs() < 1e-9 * a.k_star);
        prop_assert!((b.c / a.c / scale.powf(2.0 * a.k_star) - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adding_a_regressor_never_raises_the_check_loss(
        y in prop::collection::vec(-1.0f64..1.0, 60),
        x1 in prop::collection::vec(-1.0f64..1.0, 60),
        x2 in prop::collection::vec(-1.0f64..1.0, 60),
        a in 0.02f64..0.98,
    ) {
        let small = QrDesign::new(y.clone(), x1.iter().map(|v| vec![*v]).collect(), vec!["x1".into()]).unwrap();
        let big = QrDesign::new(
            y,
            x1.iter().zip(&x2).map(|(a, b)| vec![*a, *b]).collect(),
            vec!["x1".into(), "x2".into()],
        )
        .unwrap();
        let l_small = qr_fit(&small, a).unwrap().pinball_loss;
        let l_big = qr_fit(&big, a).unwrap().pinball_loss;
        prop_assert!(l_big <= l_small + 1e-9, "{} > {}", l_big, l_small);
    }

    #[test]
    fn garch_tail_index_falls_as_alpha1_rises(a in 0.01f64..0.09, step in 0.001f64..0.01, nu in 5.0f64..30.0) {
        let b = 0.9;
        let k1 = garch_tail_index(a, b, Innovation::StudentT(nu));
        let k2 = garch_tail_index(a + step, b, Innovation::StudentT(nu));
        if let (Ok(k1), Ok(k2)) = (k1, k2) {
            prop_assert!(k2 < k1);
        }
    }
}
