//! Self-contained oracle suite: each check compares a computed quantity with
//! an independent closed form, an exact product or a proved inequality.

use serde::{Deserialize, Serialize};

use crate::ensemble::{run_ensemble, EnsembleConfig};
use crate::error::Result;
use crate::sequence::{delta_tail, ConditionId, ConditionValue, Family, SequenceSpec};
use crate::theory::{
    check_laplace_recursion, check_lemma_inequality, classify, find_lemma_c, product_never_white,
    proposition_delta_bound, DominationVerdict, Horizon, MonopolyVerdict, DEFAULT_X_MAX, SHARP_C,
    SIGMA_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn record(
    checks: &mut Vec<CheckResult>,
    name: impl Into<String>,
    check: impl FnOnce() -> Result<(bool, String)>,
) {
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    checks.push(CheckResult {
        name: name.into(),
        passed,
        detail,
    });
}

/// (n, λ) pairs for the one-step check; `None` means λ = 1/(2 c δ_n).
const RECURSION_CASES: [(u64, Option<f64>); 3] = [(1, Some(1.0)), (20, Some(5.0)), (100, None)];

fn proposition_cases() -> [(u64, Vec<u64>); 3] {
    [
        (0, vec![10, 100]),
        (10, vec![20, 100, 1000]),
        (50, vec![100, 500]),
    ]
}

fn builtin_grid() -> Vec<(SequenceSpec, MonopolyVerdict, DominationVerdict)> {
    use DominationVerdict as D;
    use MonopolyVerdict as M;
    let s = |f: Family| SequenceSpec::new(f, 2.0).expect("valid grid spec");
    let mut grid = Vec::new();
    for c in [0.5, 1.0, 3.0] {
        grid.push((s(Family::Constant { c }), M::Zero, D::Zero));
    }
    for a in [0.5, 1.0] {
        grid.push((s(Family::LogPower { a }), M::Zero, D::Zero));
    }
    for a in [1.5, 2.0, 3.0] {
        grid.push((
            s(Family::LogPower { a }),
            M::PositiveLtOne,
            D::PositiveLtOne,
        ));
    }
    for a in [0.5, 1.0, 2.0] {
        grid.push((
            s(Family::PowerLaw { a }),
            M::PositiveLtOne,
            D::PositiveLtOne,
        ));
    }
    for r in [1.1, 2.0, 5.0] {
        grid.push((s(Family::Geometric { r }), M::One, D::One));
    }
    grid.push((s(Family::ExpSqrt), M::PositiveLeOne, D::One));
    for a in [0.25, 0.5, 1.0, 2.0] {
        grid.push((s(Family::DecayPower { a }), M::Zero, D::Zero));
    }
    grid
}

/// Runs every check. `quick` trims Monte Carlo sizes to keep the suite
/// within a few seconds.
pub fn run_verify(opts: VerifyOptions) -> VerifyReport {
    let trials: u64 = if opts.quick { 20_000 } else { 100_000 };
    let mut checks = Vec::new();

    record(&mut checks, "lemma_constant", || {
        let r = find_lemma_c(DEFAULT_X_MAX, 20);
        let g = check_lemma_inequality(SHARP_C, 100, 100, DEFAULT_X_MAX);
        Ok((
            (r.c_min - 0.5).abs() <= 1e-6 && r.check.violations == 0 && g.violations == 0,
            format!(
                "c_min = {:.12}, violations at c_min+{:e}: {}, at c = 0.5 on {} points: {}",
                r.c_min,
                r.safety,
                r.check.violations,
                g.points(),
                g.violations
            ),
        ))
    });

    record(&mut checks, "delta_tail_constant", || {
        let spec = SequenceSpec::constant(1.0, 2.0)?;
        let d = delta_tail(&spec, 0, 1e-10)?;
        // Σ_{i≥3} 1/i² = π²/6 - 1 - 1/4
        let exact = std::f64::consts::PI.powi(2) / 6.0 - 1.25;
        Ok((
            (d - exact).abs() < 1e-9,
            format!("delta_0 = {d:.12}, closed form {exact:.12}"),
        ))
    });

    record(&mut checks, "infinite_product_geometric", || {
        let spec = SequenceSpec::geometric(2.0, 2.0)?;
        let p = product_never_white(&spec, 1.0, Horizon::Infinite, 1e-12)?.value;
        let direct: f64 = (1..=80).map(|k| 1.0 - 0.5f64.powi(k)).product();
        Ok((
            (p - direct).abs() < 1e-12,
            format!("product = {p:.12}, direct {direct:.12}"),
        ))
    });

    let product_cases = [
        ("constant", SequenceSpec::constant(1.0, 2.0), 100),
        ("power_law", SequenceSpec::power_law(1.0, 2.0), 100),
        ("geometric", SequenceSpec::geometric(2.0, 2.0), 50),
    ];
    for (i, (label, spec, n)) in product_cases.into_iter().enumerate() {
        record(
            &mut checks,
            format!("never_white_frequency_{label}"),
            || {
                let spec = spec?;
                let exact = product_never_white(&spec, 1.0, Horizon::Finite(n), 1e-12)?.value;
                let mut cfg =
                    EnsembleConfig::new(spec, 1.0, n, trials, opts.seed.wrapping_add(i as u64));
                cfg.checkpoints = vec![n];
                let est = run_ensemble(&cfg)?.never_white;
                let se = (exact * (1.0 - exact) / trials as f64).sqrt();
                let z = (est.freq - exact) / se;
                Ok((
                    z.abs() <= SIGMA_THRESHOLD,
                    format!(
                        "N = {n}: frequency {:.6} vs product {exact:.6} ({z:+.2} sigma)",
                        est.freq
                    ),
                ))
            },
        );
    }

    for (label, spec) in [
        ("constant", SequenceSpec::constant(1.0, 2.0)),
        ("power_law", SequenceSpec::power_law(1.0, 2.0)),
    ] {
        for (k, &(n, lambda)) in RECURSION_CASES.iter().enumerate() {
            record(
                &mut checks,
                format!("laplace_recursion_{label}_n{n}"),
                || {
                    let spec = spec.clone()?;
                    let lambda = match lambda {
                        Some(l) => l,
                        None => 1.0 / (2.0 * SHARP_C * delta_tail(&spec, n, 1e-12)?),
                    };
                    let r = check_laplace_recursion(
                        &spec,
                        1.0,
                        n,
                        lambda,
                        trials,
                        opts.seed ^ (k as u64 + 1),
                    )?;
                    let (lhs, rhs) = (
                        r.lhs.map_or(f64::NAN, |e| e.mean),
                        r.rhs.map_or(f64::NAN, |e| e.mean),
                    );
                    Ok((
                        r.outcome.passed(),
                        format!(
                            "lambda = {lambda:.4}: f_n = {lhs:.6}, f_n-1 = {rhs:.6}, slack {:.2e}",
                            r.slack
                        ),
                    ))
                },
            );
        }
        for (k, (m, ns)) in proposition_cases().into_iter().enumerate() {
            record(
                &mut checks,
                format!("laplace_proposition_{label}_m{m}"),
                || {
                    let spec = spec.clone()?;
                    let p = proposition_delta_bound(
                        &spec,
                        1.0,
                        m,
                        &ns,
                        trials,
                        opts.seed ^ (k as u64 + 11),
                    )?;
                    let worst = p.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
                    Ok((
                        p.passed(),
                        format!(
                            "delta_m = {:.6}, bound {:.6}, n = {ns:?}, worst slack {worst:.2e}",
                            p.delta_m, p.bound.mean
                        ),
                    ))
                },
            );
        }
    }

    record(
        &mut checks,
        "proposition_refuses_square_sum_divergence",
        || {
            let spec = SequenceSpec::geometric(2.0, 2.0)?;
            let refused = proposition_delta_bound(&spec, 1.0, 5, &[10], 10, opts.seed).is_err();
            Ok((refused, "geometric r = 2 has infinite delta_m".into()))
        },
    );

    record(&mut checks, "classifier_table", || {
        let mut bad = Vec::new();
        for (spec, m, d) in builtin_grid() {
            let v = classify(&spec);
            let square = v
                .conditions
                .iter()
                .find(|c| c.condition == ConditionId::SquareSumDiverges)
                .map(|c| c.value);
            let dichotomy =
                square != Some(ConditionValue::Holds) || v.p_domination == DominationVerdict::One;
            if v.p_monopoly != m || v.p_domination != d || !v.is_consistent() || !dichotomy {
                bad.push(format!(
                    "{}: {:?}/{:?}",
                    spec.label(),
                    v.p_monopoly,
                    v.p_domination
                ));
            }
        }
        Ok((
            bad.is_empty(),
            if bad.is_empty() {
                "all grid points match".into()
            } else {
                bad.join("; ")
            },
        ))
    });

    record(&mut checks, "step_ratio_identity", || {
        let mut worst: f64 = 0.0;
        for spec in [
            SequenceSpec::constant(1.0, 2.0)?,
            SequenceSpec::power_law(2.0, 2.0)?,
            SequenceSpec::geometric(2.0, 2.0)?,
            SequenceSpec::exp_sqrt(2.0)?,
            SequenceSpec::decay_power(0.5, 2.0)?,
        ] {
            for step in spec.walk().take(10_000) {
                if !(step.s > 0.0 && step.s < 1.0 && step.r > 0.0 && step.r < 1.0) {
                    worst = f64::INFINITY;
                }
                worst = worst.max((step.s + step.r - 1.0).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max |s + r - 1| = {worst:e}")))
    });

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        options: opts,
        passed,
        checks,
    }
}
