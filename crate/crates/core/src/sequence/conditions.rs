//! Summability and regularity conditions on (σ_n).
//!
//! Built-in families are classified from their asymptotics, never from
//! probes. The table below is what [`evaluate_condition`] returns
//! (`g(n) = n` for the window condition):
//!
//! | family            | Σ(σ_{n+1}/τ_n)²=∞ | Σ1/τ_n=∞ | liminf σ/τ>0 | σ/τ≍1/n | σ_i/σ_n bounded | σ→0 |
//! |-------------------|-------------------|----------|--------------|---------|-----------------|-----|
//! | constant          | no                | yes      | no           | yes     | yes             | no  |
//! | log_power a       | no                | a ≤ 1    | no           | yes     | yes             | no  |
//! | power_law a       | no                | no       | no           | yes     | no              | no  |
//! | geometric r       | yes               | no       | (r−1)/r      | no      | no              | no  |
//! | exp_sqrt          | yes               | no       | no           | no      | no              | no  |
//! | decay_power a     | no                | yes      | no           | a < 1   | no              | yes |
//!
//! A custom table is classified through its extrapolation rule, which maps
//! onto one of the rows above (geometric decay with ratio < 1 behaves like
//! `decay_power` with a convergent τ). The rule is only trusted if the last
//! half of the tabulated prefix agrees with it; otherwise, or without a
//! rule, every condition is [`ConditionValue::Inconclusive`].
//!
//! Evidence is always numeric (partial sums, envelopes over probe points)
//! and is reported next to the verdict, not used to decide it.

use serde::{Deserialize, Serialize};

use super::{Extrapolation, Family, SequenceSpec};
use crate::numerics::{geometric_probes, CompensatedSum};

/// Probes walk the sequence up to this index.
pub const PROBE_HORIZON: u64 = 10_000;

const PARTIAL_SUM_MARKS: [u64; 4] = [10, 100, 1_000, 10_000];
const FIT_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// Σ_{n≥0} (σ_{n+1}/τ_n)² = ∞
    SquareSumDiverges,
    /// Σ_{n≥1} 1/τ_n = ∞
    HarmonicTauDiverges,
    /// liminf σ_n/τ_n > 0
    LiminfRatioPositive,
    /// σ_n/τ_n ≍ 1/n
    #[serde(rename = "RC1")]
    Rc1,
    /// α < σ_i/σ_n < β for all n and n ≤ i ≤ n g(n)
    #[serde(rename = "RC2")]
    Rc2,
    /// σ_n → 0
    SigmaVanishes,
}

impl ConditionId {
    pub const ALL: [ConditionId; 6] = [
        ConditionId::SquareSumDiverges,
        ConditionId::HarmonicTauDiverges,
        ConditionId::LiminfRatioPositive,
        ConditionId::Rc1,
        ConditionId::Rc2,
        ConditionId::SigmaVanishes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionId::SquareSumDiverges => "SquareSumDiverges",
            ConditionId::HarmonicTauDiverges => "HarmonicTauDiverges",
            ConditionId::LiminfRatioPositive => "LiminfRatioPositive",
            ConditionId::Rc1 => "RC1",
            ConditionId::Rc2 => "RC2",
            ConditionId::SigmaVanishes => "SigmaVanishes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionValue {
    Holds,
    Fails,
    Inconclusive,
}

impl From<bool> for ConditionValue {
    fn from(b: bool) -> Self {
        if b {
            ConditionValue::Holds
        } else {
            ConditionValue::Fails
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvidenceBasis {
    /// Built-in family, decided from its asymptotics.
    ClosedForm,
    /// Custom table, decided from an extrapolation rule the prefix agrees with.
    Extrapolation,
    /// Probes only; the verdict is inconclusive.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub n: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub basis: EvidenceBasis,
    pub probe_range: (u64, u64),
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub partial_sums: Vec<PartialSum>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope: Option<Envelope>,
    /// Analytic limit where one is known (for example liminf σ_n/τ_n).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limit: Option<f64>,
    /// Fitted log-log slope of σ over the last half of a custom prefix.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: ConditionId,
    pub value: ConditionValue,
    pub evidence: Evidence,
}

/// Asymptotic class of σ, shared by built-ins and extrapolated tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TailClass {
    Bounded,
    LogPower { a: f64 },
    PowerGrowth { a: f64 },
    Exponential { ratio: f64 },
    ExpSqrt,
    PowerDecay { a: f64 },
    GeometricDecay,
}

impl TailClass {
    pub(crate) fn of(spec: &SequenceSpec) -> Option<TailClass> {
        Some(match spec.family() {
            Family::Constant { .. } => TailClass::Bounded,
            Family::LogPower { a } => TailClass::LogPower { a: *a },
            Family::PowerLaw { a } => TailClass::PowerGrowth { a: *a },
            Family::Geometric { r } => TailClass::Exponential { ratio: *r },
            Family::ExpSqrt => TailClass::ExpSqrt,
            Family::DecayPower { a } => TailClass::PowerDecay { a: *a },
            Family::Custom(table) => {
                if !custom_fit(table.values(), table.extrapolation()).agrees {
                    return None;
                }
                match table.extrapolation() {
                    Extrapolation::None => return None,
                    Extrapolation::Hold => TailClass::Bounded,
                    Extrapolation::Power { exponent: 0.0 } => TailClass::Bounded,
                    Extrapolation::Power { exponent } if exponent > 0.0 => {
                        TailClass::PowerGrowth { a: exponent }
                    }
                    Extrapolation::Power { exponent } => TailClass::PowerDecay { a: -exponent },
                    Extrapolation::Geometric { ratio: 1.0 } => TailClass::Bounded,
                    Extrapolation::Geometric { ratio } if ratio > 1.0 => {
                        TailClass::Exponential { ratio }
                    }
                    Extrapolation::Geometric { .. } => TailClass::GeometricDecay,
                }
            }
        })
    }

    pub(crate) fn square_sum_diverges(self) -> bool {
        matches!(self, TailClass::Exponential { .. } | TailClass::ExpSqrt)
    }

    pub(crate) fn harmonic_tau_diverges(self) -> bool {
        match self {
            TailClass::Bounded | TailClass::PowerDecay { .. } | TailClass::GeometricDecay => true,
            TailClass::LogPower { a } => a <= 1.0,
            _ => false,
        }
    }

    /// liminf σ_n/τ_n.
    fn liminf_ratio(self) -> f64 {
        match self {
            TailClass::Exponential { ratio } => (ratio - 1.0) / ratio,
            _ => 0.0,
        }
    }

    fn rc1(self) -> bool {
        match self {
            TailClass::Bounded | TailClass::LogPower { .. } | TailClass::PowerGrowth { .. } => true,
            TailClass::PowerDecay { a } => a < 1.0,
            _ => false,
        }
    }

    /// Window regularity with the default witness g(n) = n.
    fn rc2_default(self) -> bool {
        matches!(self, TailClass::Bounded | TailClass::LogPower { .. })
    }

    fn sigma_vanishes(self) -> bool {
        matches!(
            self,
            TailClass::PowerDecay { .. } | TailClass::GeometricDecay
        )
    }
}

struct CustomFit {
    agrees: bool,
    slope: Option<f64>,
    range: (u64, u64),
}

/// Least-squares slope of ln σ over the last half of the prefix, against
/// ln n (power rules) or n (geometric rules), compared with the rule.
fn custom_fit(values: &[f64], rule: Extrapolation) -> CustomFit {
    let k = values.len() as u64;
    let lo = (k / 2).max(1);
    let range = (lo, k);
    if k < 8 || matches!(rule, Extrapolation::None) {
        return CustomFit {
            agrees: false,
            slope: None,
            range,
        };
    }
    let geometric = matches!(rule, Extrapolation::Geometric { .. });
    let pts: Vec<(f64, f64)> = (lo..=k)
        .map(|n| {
            let x = if geometric { n as f64 } else { (n as f64).ln() };
            (x, values[n as usize - 1].ln())
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let agrees = match rule {
        Extrapolation::None => false,
        Extrapolation::Hold => slope.abs() <= FIT_TOLERANCE,
        Extrapolation::Power { exponent } => (slope - exponent).abs() <= FIT_TOLERANCE,
        Extrapolation::Geometric { ratio } => {
            (slope - ratio.ln()).abs() <= 0.1 * ratio.ln().abs() + 0.01
        }
    };
    CustomFit {
        agrees,
        slope: Some(slope),
        range,
    }
}

/// Evaluates one condition; the window condition uses g(n) = n.
pub fn evaluate_condition(spec: &SequenceSpec, condition: ConditionId) -> ConditionVerdict {
    evaluate_condition_with(spec, condition, &|n| n)
}

/// As [`evaluate_condition`], with a caller-supplied window witness `g`
/// for the σ_i/σ_n condition.
pub fn evaluate_condition_with(
    spec: &SequenceSpec,
    condition: ConditionId,
    witness: &dyn Fn(u64) -> u64,
) -> ConditionVerdict {
    let class = spec.tail_class();
    let horizon = spec
        .max_index()
        .map_or(PROBE_HORIZON, |k| k.min(PROBE_HORIZON));
    let (basis, tail_exponent) = match spec.family() {
        Family::Custom(t) => {
            let fit = custom_fit(t.values(), t.extrapolation());
            let basis = if class.is_some() {
                EvidenceBasis::Extrapolation
            } else {
                EvidenceBasis::Probe
            };
            (basis, fit.slope.map(|s| (s, fit.range)))
        }
        _ => (EvidenceBasis::ClosedForm, None),
    };
    let mut evidence = Evidence {
        basis,
        probe_range: (1, horizon),
        partial_sums: Vec::new(),
        envelope: None,
        limit: None,
        tail_exponent: tail_exponent.map(|t| t.0),
    };
    if let Some((_, range)) = tail_exponent {
        if class.is_none() {
            evidence.probe_range = range;
        }
    }

    let decided: Option<bool> = match condition {
        ConditionId::SquareSumDiverges => {
            evidence.partial_sums =
                partial_sums(spec, horizon, |st| st.sigma_over_prev_tau().powi(2));
            class.map(TailClass::square_sum_diverges)
        }
        ConditionId::HarmonicTauDiverges => {
            evidence.partial_sums = partial_sums(spec, horizon, |st| st.tau.recip());
            class.map(TailClass::harmonic_tau_diverges)
        }
        ConditionId::LiminfRatioPositive => {
            let lo = (horizon / 2).max(1);
            let (mn, mx) = spec
                .walk()
                .take(horizon as usize)
                .skip(lo as usize - 1)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), st| {
                    (a.min(st.s), b.max(st.s))
                });
            evidence.probe_range = (lo, horizon);
            evidence.envelope = Some(Envelope { lo: mn, hi: mx });
            evidence.limit = class.map(TailClass::liminf_ratio);
            class.map(|c| c.liminf_ratio() > 0.0)
        }
        ConditionId::Rc1 => {
            let probes = geometric_probes(1, horizon, 24);
            let mut next = probes.iter().peekable();
            let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
            for st in spec.walk().take(horizon as usize) {
                if next.peek() == Some(&&st.n) {
                    next.next();
                    let v = st.n as f64 * st.s;
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
            }
            evidence.envelope = Some(Envelope {
                lo: 0.5 * mn,
                hi: 2.0 * mx,
            });
            class.map(TailClass::rc1)
        }
        ConditionId::Rc2 => {
            let (env, range, growth) = window_envelope(spec, witness);
            evidence.envelope = Some(env);
            evidence.probe_range = range;
            class.map(|c| match c {
                // Monotone classes: the verdict does not depend on g.
                TailClass::LogPower { .. } if !is_default_witness(witness) => growth,
                _ => c.rc2_default(),
            })
        }
        ConditionId::SigmaVanishes => {
            let lo = (horizon / 2).max(1);
            let probes = geometric_probes(lo, horizon, 8);
            let vals: Vec<f64> = probes.iter().map(|&n| spec.sigma_unchecked(n)).collect();
            evidence.probe_range = (lo, horizon);
            evidence.envelope = Some(Envelope {
                lo: vals.iter().cloned().fold(f64::INFINITY, f64::min),
                hi: vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            });
            if class.map(TailClass::sigma_vanishes) == Some(true) {
                evidence.limit = Some(0.0);
            }
            class.map(TailClass::sigma_vanishes)
        }
    };

    ConditionVerdict {
        condition,
        value: decided.map_or(ConditionValue::Inconclusive, ConditionValue::from),
        evidence,
    }
}

fn is_default_witness(witness: &dyn Fn(u64) -> u64) -> bool {
    [1u64, 2, 7, 100, 12345].iter().all(|&n| witness(n) == n)
}

fn partial_sums(
    spec: &SequenceSpec,
    horizon: u64,
    term: impl Fn(&super::Step) -> f64,
) -> Vec<PartialSum> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::new();
    for st in spec.walk().take(horizon as usize) {
        acc.add(term(&st));
        if PARTIAL_SUM_MARKS.contains(&st.n) || st.n == horizon {
            out.push(PartialSum {
                n: st.n,
                value: acc.value(),
            });
        }
    }
    out.dedup_by_key(|p| p.n);
    out
}

/// Envelope of σ_i/σ_n over windows [n, n g(n)] at probe points, plus
/// whether the window ratio for log-power growth stays bounded (used only
/// for caller-supplied witnesses).
fn window_envelope(
    spec: &SequenceSpec,
    witness: &dyn Fn(u64) -> u64,
) -> (Envelope, (u64, u64), bool) {
    let cap = spec.max_index().unwrap_or(u64::MAX);
    let starts = geometric_probes(1, 1 << 10, 11);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut last_end = 1;
    let mut spans = Vec::new();
    for &n in starts.iter().filter(|&&n| n <= cap) {
        let end = n.saturating_mul(witness(n).max(1)).min(cap).min(1 << 40);
        last_end = last_end.max(end);
        let ln_base = spec.ln_sigma_unchecked(n);
        for i in geometric_probes(n, end, 16) {
            let ratio = (spec.ln_sigma_unchecked(i) - ln_base).exp();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        spans.push(((end as f64 + 2.0).ln() / (n as f64 + 2.0).ln()).max(1.0));
    }
    let bounded = match spans.len() {
        0 | 1 => true,
        k => spans[k - 1] <= 1.5 * spans[k / 2],
    };
    (Envelope { lo, hi }, (1, last_end), bounded)
}
