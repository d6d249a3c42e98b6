use polya_urn::ensemble::wilson_interval;
use polya_urn::sequence::{
    delta_tail, ConditionId, ConditionValue, CustomTable, Extrapolation, Family, SequenceSpec,
};
use polya_urn::theory::{classify, DominationVerdict, MonopolyVerdict};
use polya_urn::urn::{draws, simulate_with, window_count, SimOptions, Urn};
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = SequenceSpec> {
    let family = prop_oneof![
        (0.1f64..10.0).prop_map(|c| Family::Constant { c }),
        (0.1f64..4.0).prop_map(|a| Family::LogPower { a }),
        (0.1f64..3.0).prop_map(|a| Family::PowerLaw { a }),
        (1.01f64..10.0).prop_map(|r| Family::Geometric { r }),
        Just(Family::ExpSqrt),
        (0.1f64..3.0).prop_map(|a| Family::DecayPower { a }),
    ];
    (family, 0.1f64..10.0).prop_map(|(f, tau0)| SequenceSpec::new(f, tau0).unwrap())
}

fn square_summable() -> impl Strategy<Value = SequenceSpec> {
    let family = prop_oneof![
        (0.1f64..10.0).prop_map(|c| Family::Constant { c }),
        (0.2f64..3.0).prop_map(|a| Family::LogPower { a }),
        (0.1f64..3.0).prop_map(|a| Family::PowerLaw { a }),
        (0.1f64..3.0).prop_map(|a| Family::DecayPower { a }),
    ];
    (family, 0.5f64..5.0).prop_map(|(f, tau0)| SequenceSpec::new(f, tau0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_shares_are_complementary(spec in builtin(), n in 1u64..3000) {
        let (s, r) = spec.step_ratios(n).unwrap();
        prop_assert!(s > 0.0 && s < 1.0, "s = {s}");
        prop_assert!(r > 0.0 && r <= 1.0, "r = {r}");
        prop_assert!((s + r - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn tau_increments_are_sigma(spec in builtin()) {
        let mut prev_ln = spec.tau0().ln();
        let mut prev = spec.tau0();
        for step in spec.walk().take(10_000) {
            prop_assert!(step.tau.ln > prev_ln);
            if step.tau.saturated {
                // ln τ_n - ln τ_{n-1} = -ln r_n
                let inc = step.tau.ln - prev_ln;
                prop_assert!((inc + step.r.ln()).abs() <= 1e-12 * step.tau.ln.abs().max(1.0));
            } else {
                let diff = step.tau.value - prev;
                prop_assert!((diff - step.sigma).abs() <= 1e-12 * step.tau.value);
                prev = step.tau.value;
            }
            prev_ln = step.tau.ln;
        }
    }

    #[test]
    fn delta_tail_is_monotone(spec in square_summable(), n in 0u64..500) {
        let tol = 1e-7;
        let a = delta_tail(&spec, n, tol).unwrap();
        let b = delta_tail(&spec, n + 1, tol).unwrap();
        prop_assert!(b >= 0.0 && a.is_finite());
        prop_assert!(a + 2.0 * tol >= b, "{a} < {b}");
    }

    #[test]
    fn tabulated_prefix_reproduces_family(spec in builtin(), len in 1u64..300) {
        let table = CustomTable::from_prefix(&spec, len, Extrapolation::None).unwrap();
        let custom = SequenceSpec::custom(table, spec.tau0()).unwrap();
        for (a, b) in spec.walk().zip(custom.walk()) {
            prop_assert_eq!(a.sigma, b.sigma);
            prop_assert_eq!(a.tau, b.tau);
            prop_assert_eq!((a.s, a.r), (b.s, b.r));
        }
        prop_assert_eq!(custom.walk().count() as u64, len);
    }

    #[test]
    fn verdicts_respect_the_lattice(spec in builtin()) {
        let v = classify(&spec);
        prop_assert!(v.is_consistent());
        prop_assert!(v.p_monopoly != MonopolyVerdict::Unknown);
        prop_assert!(v.p_domination != DominationVerdict::Unknown);
        prop_assert!(v.conditions.iter().all(|c| c.value != ConditionValue::Inconclusive));
        let square = v.conditions.iter().find(|c| c.condition == ConditionId::SquareSumDiverges).unwrap();
        if square.value == ConditionValue::Holds {
            prop_assert_eq!(v.p_domination, DominationVerdict::One);
        }
    }

    #[test]
    fn extreme_starts_are_absorbing(spec in builtin(), full in any::<bool>(), seed in any::<u64>()) {
        let t0 = if full { spec.tau0() } else { 0.0 };
        let opts = SimOptions { record_path: true, ..Default::default() };
        let t = simulate_with(&spec, t0, 200, seed, &opts).unwrap();
        let target = if full { 1.0 } else { 0.0 };
        prop_assert!(t.path.unwrap().iter().all(|row| row.theta == target && row.white.is_none_or(|w| w == full)));
    }

    #[test]
    fn theta_stays_above_inverse_tau(spec in builtin(), tau0 in 1.0f64..5.0, seed in any::<u64>()) {
        let spec = SequenceSpec::new(spec.family().clone(), tau0).unwrap();
        let horizon = 300;
        let urn = Urn::new(&spec, 1.0, horizon).unwrap();
        let t = urn.run(seed, &SimOptions { record_path: true, ..Default::default() }).unwrap();
        let path = t.path.unwrap();
        let mut inv_sum = 0.0;
        for row in &path[1..] {
            let inv = urn.table().inv_tau(row.n);
            prop_assert!(row.theta >= inv * (1.0 - 1e-12), "n = {}: {} < {}", row.n, row.theta, inv);
            inv_sum += inv;
        }
        prop_assert!(t.summary.theta_partial_sum >= inv_sum * (1.0 - 1e-12));
    }

    #[test]
    fn shared_uniforms_couple_monotonically(
        spec in builtin(),
        lo in 0.0f64..1.0,
        hi in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let (lo, hi) = (lo.min(hi) * spec.tau0(), lo.max(hi) * spec.tau0());
        let opts = SimOptions { record_path: true, ..Default::default() };
        let a = simulate_with(&spec, lo, 200, seed, &opts).unwrap().path.unwrap();
        let b = simulate_with(&spec, hi, 200, seed, &opts).unwrap().path.unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| y.theta >= x.theta));
    }

    #[test]
    fn trajectories_are_pure_functions_of_the_seed(spec in builtin(), seed in any::<u64>()) {
        let t0 = spec.tau0() / 2.0;
        let a = simulate_with(&spec, t0, 150, seed, &SimOptions::default()).unwrap();
        let b = simulate_with(&spec, t0, 150, seed, &SimOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn summary_digests_match_the_path(spec in builtin(), seed in any::<u64>(), horizon in 1u64..400) {
        let opts = SimOptions { record_path: true, ..Default::default() };
        let t = simulate_with(&spec, spec.tau0() / 2.0, horizon, seed, &opts).unwrap();
        let d = draws(t.path.as_ref().unwrap());
        let s = &t.summary;
        prop_assert_eq!(s.last_white, d.iter().rposition(|&w| w).map(|i| i as u64 + 1));
        prop_assert_eq!(s.last_black, d.iter().rposition(|&w| !w).map(|i| i as u64 + 1));
        prop_assert!(s.last_white.is_some() || s.last_black.is_some());
        for wc in &s.window_counts {
            prop_assert_eq!(wc.count, window_count(&d, wc.n, wc.n_end / wc.n).unwrap());
        }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = (trials as f64 * frac).round() as u64;
        let (lo, hi) = wilson_interval(k, trials, 0.95).unwrap();
        let p = k as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}
