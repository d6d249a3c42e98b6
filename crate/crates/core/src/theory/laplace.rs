//! Monte Carlo checks of the Laplace-transform inequalities for
//! f_n(λ) = E exp(-λ Θ_n):
//!
//! - one step: f_n(λ) ≤ f_{n-1}(λ - c s_n² λ²) with s_n = σ_n/τ_n;
//! - iterated: f_n(λ_m) ≤ E exp(-Θ_m / (4 c δ_m)) for n > m, λ_m = 1/(2 c δ_m),
//!   where δ_m = Σ_{i>m} s_i².
//!
//! The two sides of a check are estimated from disjoint seed streams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::seed::{stream_seed, trial_seed};
use crate::sequence::{delta_tail, SequenceSpec};
use crate::urn::Urn;

use super::lemma::SHARP_C;

/// One-sided checks pass when LHS ≤ RHS + this many combined standard errors.
pub const SIGMA_THRESHOLD: f64 = 4.0;

const DELTA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl LaplaceEstimate {
    fn exact(mean: f64, trials: u64) -> Self {
        Self {
            mean,
            std_error: 0.0,
            trials,
        }
    }

    fn from_values(values: impl Iterator<Item = f64>, trials: u64) -> Self {
        let mut sum = CompensatedSum::new();
        let mut sq = CompensatedSum::new();
        for v in values {
            sum.add(v);
            sq.add(v * v);
        }
        let k = trials as f64;
        let mean = sum.value() / k;
        let var = if trials > 1 {
            ((sq.value() - k * mean * mean) / (k - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / k).sqrt(),
            trials,
        }
    }
}

/// Θ at each of `steps` (sorted) for trials 0..trials of `base`, one row per
/// trial. Collected in trial order, so the result does not depend on the
/// thread schedule.
fn theta_samples(urn: &Urn, steps: &[u64], trials: u64, base: u64) -> Result<Vec<Vec<f64>>> {
    (0..trials)
        .into_par_iter()
        .map(|i| urn.theta_at(trial_seed(base, i), steps))
        .collect()
}

fn check_common(t0: f64, spec: &SequenceSpec, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    if !(t0.is_finite() && (0.0..=spec.tau0()).contains(&t0)) {
        return Err(Error::invalid(
            "t0",
            format!("must lie in [0, tau0 = {}]", spec.tau0()),
        ));
    }
    Ok(())
}

/// Monte Carlo estimate of E exp(-λ Θ_n) with its standard error.
pub fn laplace_mc(
    spec: &SequenceSpec,
    t0: f64,
    n: u64,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<LaplaceEstimate> {
    check_common(t0, spec, trials)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be finite and >= 0"));
    }
    if lambda == 0.0 {
        return Ok(LaplaceEstimate::exact(1.0, trials));
    }
    if n == 0 {
        return Ok(LaplaceEstimate::exact(
            (-lambda * t0 / spec.tau0()).exp(),
            trials,
        ));
    }
    let urn = Urn::new(spec, t0, n)?;
    let rows = theta_samples(&urn, &[n], trials, seed)?;
    Ok(LaplaceEstimate::from_values(
        rows.iter().map(|r| (-lambda * r[0]).exp()),
        trials,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "detail", rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    PreconditionUnmet(String),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

fn judge(lhs: &LaplaceEstimate, rhs: &LaplaceEstimate) -> (f64, CheckOutcome) {
    let combined = lhs.std_error.hypot(rhs.std_error);
    let slack = rhs.mean + SIGMA_THRESHOLD * combined - lhs.mean;
    // Exact sides still get a rounding allowance.
    let outcome = if slack >= -1e-12 {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    };
    (slack, outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionCheck {
    pub n: u64,
    pub lambda: f64,
    /// λ - c s_n² λ²
    pub lambda_prev: f64,
    pub c: f64,
    pub s_n: f64,
    /// f_n(λ)
    pub lhs: Option<LaplaceEstimate>,
    /// f_{n-1}(λ - c s_n² λ²)
    pub rhs: Option<LaplaceEstimate>,
    /// RHS + 4 combined standard errors - LHS
    pub slack: f64,
    pub outcome: CheckOutcome,
}

/// Checks f_n(λ) ≤ f_{n-1}(λ - c s_n² λ²) at [`SIGMA_THRESHOLD`] standard
/// errors with c = 1/2.
pub fn check_laplace_recursion(
    spec: &SequenceSpec,
    t0: f64,
    n: u64,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<RecursionCheck> {
    check_common(t0, spec, trials)?;
    if n == 0 {
        return Err(Error::invalid("n", "the recursion starts at n = 1"));
    }
    let c = SHARP_C;
    let (s_n, _) = spec.step_ratios(n)?;
    let lambda_prev = lambda - c * s_n * s_n * lambda * lambda;
    let mut report = RecursionCheck {
        n,
        lambda,
        lambda_prev,
        c,
        s_n,
        lhs: None,
        rhs: None,
        slack: f64::NAN,
        outcome: CheckOutcome::Pass,
    };
    if !(lambda > 0.0 && lambda_prev > 0.0) {
        report.outcome = CheckOutcome::PreconditionUnmet(format!(
            "need lambda > 0 and lambda - c s_n^2 lambda^2 > 0, got {lambda} and {lambda_prev}"
        ));
        return Ok(report);
    }
    let lhs = laplace_mc(spec, t0, n, lambda, trials, stream_seed(seed, 0))?;
    let rhs = laplace_mc(spec, t0, n - 1, lambda_prev, trials, stream_seed(seed, 1))?;
    let (slack, outcome) = judge(&lhs, &rhs);
    report.lhs = Some(lhs);
    report.rhs = Some(rhs);
    report.slack = slack;
    report.outcome = outcome;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionRow {
    pub n: u64,
    /// f_n(λ_m)
    pub estimate: LaplaceEstimate,
    pub slack: f64,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionCheck {
    pub m: u64,
    pub c: f64,
    pub delta_m: f64,
    /// 1/(2 c δ_m)
    pub lambda_m: f64,
    /// E exp(-Θ_m / (4 c δ_m))
    pub bound: LaplaceEstimate,
    pub rows: Vec<PropositionRow>,
}

impl PropositionCheck {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.passed())
    }
}

/// Checks f_n(λ_m) ≤ E exp(-Θ_m / (4 c δ_m)) for each n in `ns` (all > m).
///
/// Refuses with [`Error::HypothesisUnmet`] when δ_m is infinite.
pub fn proposition_delta_bound(
    spec: &SequenceSpec,
    t0: f64,
    m: u64,
    ns: &[u64],
    trials: u64,
    seed: u64,
) -> Result<PropositionCheck> {
    check_common(t0, spec, trials)?;
    if ns.is_empty() || ns.iter().any(|&n| n <= m) {
        return Err(Error::invalid(
            "ns",
            format!("need at least one step, all > m = {m}"),
        ));
    }
    let delta_m = delta_tail(spec, m, DELTA_TOL)?;
    if delta_m.is_infinite() {
        return Err(Error::HypothesisUnmet(format!(
            "delta_{m} is infinite: the squared step shares are not summable"
        )));
    }
    let c = SHARP_C;
    let lambda_m = 1.0 / (2.0 * c * delta_m);
    let bound = laplace_mc(spec, t0, m, lambda_m / 2.0, trials, stream_seed(seed, 0))?;

    let mut steps = ns.to_vec();
    steps.sort_unstable();
    steps.dedup();
    let urn = Urn::new(spec, t0, *steps.last().expect("non-empty"))?;
    let samples = theta_samples(&urn, &steps, trials, stream_seed(seed, 1))?;
    let rows = steps
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let estimate = LaplaceEstimate::from_values(
                samples.iter().map(|r| (-lambda_m * r[j]).exp()),
                trials,
            );
            let (slack, outcome) = judge(&estimate, &bound);
            PropositionRow {
                n,
                estimate,
                slack,
                outcome,
            }
        })
        .collect();
    Ok(PropositionCheck {
        m,
        c,
        delta_m,
        lambda_m,
        bound,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant() -> SequenceSpec {
        SequenceSpec::constant(1.0, 2.0).unwrap()
    }

    #[test]
    fn deterministic_cases_are_exact() {
        let e = laplace_mc(&constant(), 1.0, 0, 1.0, 10, 0).unwrap();
        assert_eq!(e.mean, (-0.5f64).exp());
        assert_eq!(e.std_error, 0.0);
        assert_eq!(
            laplace_mc(&constant(), 1.0, 40, 0.0, 10, 0).unwrap().mean,
            1.0
        );
    }

    #[test]
    fn one_step_matches_enumeration() {
        // Θ_1 = 2/3 or 1/3 with probability 1/2 each.
        let (lambda, trials) = (3.0, 200_000);
        let exact = 0.5 * ((-lambda * 2.0 / 3.0f64).exp() + (-lambda / 3.0f64).exp());
        let e = laplace_mc(&constant(), 1.0, 1, lambda, trials, 42).unwrap();
        assert!(
            (e.mean - exact).abs() < 4.0 * e.std_error,
            "{e:?} vs {exact}"
        );
    }

    #[test]
    fn recursion_holds_on_constant() {
        let r = check_laplace_recursion(&constant(), 1.0, 50, 3.0, 20_000, 9).unwrap();
        assert!(r.outcome.passed(), "{r:?}");
    }

    #[test]
    fn recursion_reports_unmet_precondition() {
        let r = check_laplace_recursion(&constant(), 1.0, 1, 100.0, 10, 0).unwrap();
        assert!(matches!(r.outcome, CheckOutcome::PreconditionUnmet(_)));
        assert!(r.lhs.is_none());
    }

    #[test]
    fn proposition_refuses_without_square_summability() {
        let g = SequenceSpec::geometric(2.0, 2.0).unwrap();
        assert!(matches!(
            proposition_delta_bound(&g, 1.0, 5, &[10], 10, 0),
            Err(Error::HypothesisUnmet(_))
        ));
    }

    #[test]
    fn proposition_holds_on_constant() {
        let p = proposition_delta_bound(&constant(), 1.0, 10, &[20, 100], 20_000, 3).unwrap();
        assert!(p.passed(), "{p:?}");
    }

    #[test]
    fn estimates_are_reproducible() {
        let a = laplace_mc(&constant(), 1.0, 30, 2.0, 1000, 5).unwrap();
        let b = laplace_mc(&constant(), 1.0, 30, 2.0, 1000, 5).unwrap();
        assert_eq!(a, b);
    }
}
