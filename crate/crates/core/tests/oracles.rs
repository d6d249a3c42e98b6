//! Library values against independently computed references.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use polya_urn::ensemble::{ks_against_uniform, run_ensemble, wilson_interval, EnsembleConfig};
use polya_urn::seed::{trial_rng, trial_seed};
use polya_urn::sequence::{
    delta_tail, evaluate_condition, ConditionId, ConditionValue, SequenceSpec,
};
use polya_urn::theory::{
    check_laplace_recursion, laplace_mc, product_never_white, Horizon, SHARP_C,
};
use polya_urn::urn::{simulate, simulate_with, SimOptions, UrnState, Window};
use rand::Rng;

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact (s_n, r_n) for integer σ and τ_0.
fn exact_shares(sigma: impl Fn(u64) -> BigInt, tau0: i64, n: u64) -> (BigRational, BigRational) {
    let mut tau = rational(tau0);
    let mut prev = tau.clone();
    for i in 1..=n {
        prev = tau.clone();
        tau += BigRational::from_integer(sigma(i));
    }
    (BigRational::from_integer(sigma(n)) / &tau, prev / tau)
}

fn close(a: f64, b: &BigRational, rel: f64) -> bool {
    let b = b.to_f64().unwrap();
    (a - b).abs() <= rel * b.abs()
}

type ExactSigma = Box<dyn Fn(u64) -> BigInt>;

#[test]
fn step_shares_match_exact_rationals() {
    let cases: Vec<(SequenceSpec, ExactSigma)> = vec![
        (
            SequenceSpec::constant(1.0, 2.0).unwrap(),
            Box::new(|_| BigInt::one()),
        ),
        (
            SequenceSpec::power_law(1.0, 2.0).unwrap(),
            Box::new(BigInt::from),
        ),
        (
            SequenceSpec::power_law(2.0, 2.0).unwrap(),
            Box::new(|i| BigInt::from(i) * BigInt::from(i)),
        ),
        (
            SequenceSpec::geometric(2.0, 2.0).unwrap(),
            Box::new(|i| BigInt::from(2).pow(i as u32)),
        ),
        (
            SequenceSpec::geometric(3.0, 2.0).unwrap(),
            Box::new(|i| BigInt::from(3).pow(i as u32)),
        ),
    ];
    for (spec, sigma) in &cases {
        for n in [1u64, 2, 3, 10, 57, 200] {
            let (s, r) = spec.step_ratios(n).unwrap();
            let (es, er) = exact_shares(sigma, 2, n);
            assert!(
                close(s, &es, 1e-14) && close(r, &er, 1e-14),
                "{} n={n}: {s} {r}",
                spec.label()
            );
        }
    }
}

#[test]
fn geometric_shares_far_past_overflow() {
    // τ_n = 2^{n+1} exactly, so s_n = r_n = 1/2 for every n.
    let spec = SequenceSpec::geometric(2.0, 2.0).unwrap();
    let (es, er) = exact_shares(|i| BigInt::from(2).pow(i as u32), 2, 2000);
    assert_eq!(
        (es.clone(), er),
        (
            BigRational::new(1.into(), 2.into()),
            BigRational::new(1.into(), 2.into())
        )
    );
    for n in [1000, 1100, 2000, 10_000] {
        let (s, r) = spec.step_ratios(n).unwrap();
        assert!(
            (s - 0.5).abs() < 1e-12 && (r - 0.5).abs() < 1e-12,
            "n={n}: {s} {r}"
        );
    }
    let t = spec.tau(10_000).unwrap();
    assert!(t.saturated && t.ln.is_finite());
    assert!((t.ln - 10_001.0 * 2f64.ln()).abs() < 1e-9 * t.ln);
}

#[test]
fn geometric_liminf_evidence_matches_exact_ratios() {
    let v = evaluate_condition(
        &SequenceSpec::geometric(2.0, 2.0).unwrap(),
        ConditionId::LiminfRatioPositive,
    );
    assert_eq!(v.value, ConditionValue::Holds);
    assert_eq!(v.evidence.limit, Some(0.5));
    let (s, _) = exact_shares(|i| BigInt::from(2).pow(i as u32), 2, 60);
    assert_eq!(s, BigRational::new(1.into(), 2.into()));
}

#[test]
fn constant_rc1_envelope_brackets_exact_ratio() {
    let v = evaluate_condition(&SequenceSpec::constant(1.0, 2.0).unwrap(), ConditionId::Rc1);
    assert_eq!(v.value, ConditionValue::Holds);
    let env = v.evidence.envelope.unwrap();
    // n s_n = n/(n+2) ∈ [1/3, 1)
    assert!(env.lo > 0.0 && env.lo <= 1.0 / 3.0);
    assert!(env.hi >= 1.0 - 1.0 / 10_002.0);
}

#[test]
fn delta_tail_against_direct_summation() {
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    // Σ_{i=1}^{M} 1/(i+2)² plus the integral remainder, M large
    let m = 20_000_000u64;
    let mut direct = 0.0;
    for i in (1..=m).rev() {
        let t = 1.0 / (i as f64 + 2.0);
        direct += t * t;
    }
    direct += 1.0 / (m as f64 + 2.5);
    let d = delta_tail(&spec, 0, 1e-9).unwrap();
    assert!((d - direct).abs() < 1e-9, "{d} vs {direct}");
    assert!((d - 0.394934).abs() < 1e-6);

    let decay = SequenceSpec::decay_power(2.0, 2.0).unwrap();
    let d4 = delta_tail(&decay, 4, 1e-10).unwrap();
    let d5 = delta_tail(&decay, 5, 1e-10).unwrap();
    assert!(d5.is_finite() && d5 > 0.0 && d5 < d4);
    assert_eq!(
        delta_tail(&SequenceSpec::geometric(2.0, 2.0).unwrap(), 0, 1.0).unwrap(),
        f64::INFINITY
    );
}

#[test]
fn finite_product_equals_all_black_path_probability() {
    for spec in [
        SequenceSpec::constant(1.0, 2.0).unwrap(),
        SequenceSpec::power_law(1.0, 2.0).unwrap(),
        SequenceSpec::geometric(2.0, 2.0).unwrap(),
    ] {
        for n in [1u64, 5, 50] {
            // Probability of I_1 = ... = I_n = 0, stepping Θ along the path.
            let mut state = UrnState::initial(&spec, 1.0).unwrap();
            let mut p = 1.0;
            for k in 1..=n {
                p *= 1.0 - state.theta;
                let (s, r) = spec.step_ratios(k).unwrap();
                state.advance(s, r, 0.0, 1.0).unwrap();
            }
            let v = product_never_white(&spec, 1.0, Horizon::Finite(n), 1e-12)
                .unwrap()
                .value;
            assert!((v - p).abs() <= 1e-13, "{} n={n}: {v} vs {p}", spec.label());
        }
    }
}

#[test]
fn geometric_infinite_product_by_direct_multiplication() {
    let spec = SequenceSpec::geometric(2.0, 2.0).unwrap();
    let mut direct = 1.0;
    let mut k = 1;
    loop {
        let f = 1.0 - 0.5f64.powi(k);
        if f == 1.0 {
            break;
        }
        direct *= f;
        k += 1;
    }
    let v = product_never_white(&spec, 1.0, Horizon::Infinite, 1e-12).unwrap();
    assert!((v.value - direct).abs() < 1e-12);
    assert!((v.value - 0.288788).abs() < 1e-6);
    let c = SequenceSpec::constant(1.0, 2.0).unwrap();
    assert_eq!(
        product_never_white(&c, 1.0, Horizon::Infinite, 1e-9)
            .unwrap()
            .value,
        0.0
    );
    assert_eq!(
        product_never_white(&c, 0.0, Horizon::Infinite, 1e-9)
            .unwrap()
            .value,
        1.0
    );
}

#[test]
fn wilson_interval_closed_form() {
    let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
    let z: f64 = 1.959963984540054;
    let (n, p) = (100.0, 0.5);
    let c = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let h = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    assert!((lo - (c - h)).abs() < 1e-12 && (hi - (c + h)).abs() < 1e-12);
    assert!((lo - 0.404).abs() < 1e-3 && (hi - 0.596).abs() < 1e-3);
}

#[test]
fn ks_statistic_examples() {
    for k in [1usize, 9, 999] {
        let grid: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
        assert!(ks_against_uniform(&grid) <= 1.0 / (k + 1) as f64 + 1e-15);
    }
    assert_eq!(ks_against_uniform(&[0.5; 7]), 0.5);
    // Brute force over a fine grid of t for a small sample
    let xs = [0.1, 0.15, 0.7, 0.71, 0.9];
    let mut worst: f64 = 0.0;
    for j in 0..=100_000 {
        let t = j as f64 / 100_000.0;
        let le = xs.iter().filter(|&&x| x <= t).count() as f64 / 5.0;
        let lt = xs.iter().filter(|&&x| x < t).count() as f64 / 5.0;
        worst = worst.max((le - t).abs()).max((lt - t).abs());
    }
    assert!((ks_against_uniform(&xs) - worst).abs() < 1e-4);
}

#[test]
fn first_step_is_a_fair_coin() {
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    let trials = 100_000u64;
    let mut up = 0u64;
    for i in 0..trials {
        let s = simulate(&spec, 1.0, 1, trial_seed(17, i)).unwrap();
        let theta = s.final_theta;
        assert!((theta - 2.0 / 3.0).abs() < 1e-15 || (theta - 1.0 / 3.0).abs() < 1e-15);
        up += u64::from(theta > 0.5);
    }
    assert!((up as f64 / trials as f64 - 0.5).abs() < 0.01);
}

#[test]
fn one_step_conditional_mean_is_theta() {
    // Θ_{n+1} given Θ_n averages to Θ_n; 10⁶ draws per state.
    let spec = SequenceSpec::power_law(1.0, 2.0).unwrap();
    let draws = 1_000_000u64;
    for (k, &(n, theta)) in [(1u64, 0.5), (10, 0.1), (100, 0.73), (1000, 0.999)]
        .iter()
        .enumerate()
    {
        let (s, r) = spec.step_ratios(n + 1).unwrap();
        let mut rng = trial_rng(trial_seed(5, k as u64));
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..draws {
            let mut state = UrnState {
                n,
                theta,
                log_tau: 0.0,
            };
            state.advance(s, r, 0.0, rng.random()).unwrap();
            sum += state.theta;
            sq += state.theta * state.theta;
        }
        let mean = sum / draws as f64;
        let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!(
            (mean - theta).abs() <= 4.0 * se,
            "n={n}: {mean} vs {theta} (se {se})"
        );
    }
}

#[test]
fn window_mean_exceeds_logarithmic_floor() {
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    let mut cfg = EnsembleConfig::new(spec, 1.0, 10_000, 10_000, 3);
    cfg.windows = Some(vec![Window { start: 100, g: 100 }]);
    cfg.checkpoints = vec![10_000];
    let r = run_ensemble(&cfg).unwrap();
    let w = &r.windows[0];
    assert!(w.mean - 4.0 * w.std_error >= 0.2 * 100f64.ln(), "{w:?}");
}

#[test]
fn recursion_check_agrees_with_enumeration_at_first_step() {
    // f_1(λ) = ½(e^{-2λ/3} + e^{-λ/3}) and f_0(μ) = e^{-μ/2} with s_1 = 1/3.
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    for lambda in [0.5, 1.0, 3.0] {
        let f1 = 0.5 * ((-2.0 * lambda / 3.0f64).exp() + (-lambda / 3.0f64).exp());
        let mu = lambda - SHARP_C * lambda * lambda / 9.0;
        let f0 = (-mu / 2.0f64).exp();
        assert!(f1 <= f0);
        let r = check_laplace_recursion(&spec, 1.0, 1, lambda, 50_000, 8).unwrap();
        assert_eq!(r.rhs.unwrap().mean, f0);
        assert!((r.lhs.unwrap().mean - f1).abs() < 4.0 * r.lhs.unwrap().std_error);
        assert!(r.outcome.passed());
    }
    assert_eq!(
        laplace_mc(&spec, 1.0, 0, 1.0, 10, 0).unwrap().mean,
        (-0.5f64).exp()
    );
}

#[test]
fn recorded_paths_respect_the_recursion() {
    let spec = SequenceSpec::log_power(2.0, 3.0).unwrap();
    let t = simulate_with(
        &spec,
        1.0,
        500,
        77,
        &SimOptions {
            record_path: true,
            ..Default::default()
        },
    )
    .unwrap();
    let path = t.path.unwrap();
    let table = spec.ratio_table(500).unwrap();
    for w in path.windows(2) {
        let (s, r) = table.ratios(w[1].n);
        let white = w[1].white.unwrap();
        let expected = r * w[0].theta + if white { s } else { 0.0 };
        assert!((w[1].theta - expected).abs() <= 2e-16);
        assert_eq!(white, w[1].theta > r * w[0].theta + s / 2.0);
    }
}
