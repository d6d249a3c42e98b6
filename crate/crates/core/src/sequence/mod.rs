//! Reinforcement sequences σ_n and the total mass τ_n = τ_0 + Σ_{i≤n} σ_i.
//!
//! Indexing follows the process: σ is defined from n = 1, τ from n = 0.
//! All masses are real valued.
//!
//! Derived ratios are produced by [`Walk`], a single forward pass that keeps
//! τ_n in linear scale (compensated sum) while it is comfortably
//! representable and switches to log scale once it would approach the
//! `f64` range. In log scale the step shares are logistic functions of
//! `d = ln τ_{n-1} - ln σ_n`, so they stay accurate for geometric growth far
//! past the point where τ_n itself overflows.

mod conditions;
mod custom;
mod tail;

pub use conditions::{
    evaluate_condition, evaluate_condition_with, ConditionId, ConditionValue, ConditionVerdict,
    Envelope, Evidence, EvidenceBasis, PartialSum, PROBE_HORIZON,
};
pub use custom::{CustomTable, Extrapolation};
pub use tail::{delta_tail, inverse_tau_tail_bound};

pub(crate) use conditions::TailClass;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{complementary_shares, logistic_pair, softplus, CompensatedSum};

/// Linear τ is abandoned once it would exceed this.
const LINEAR_LIMIT: f64 = 1e300;

/// Shape of σ_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// σ_n = c
    Constant { c: f64 },
    /// σ_n = (ln(n + 2))^a. The shift keeps σ_1 positive.
    LogPower { a: f64 },
    /// σ_n = n^a, a > 0
    PowerLaw { a: f64 },
    /// σ_n = r^n, r > 1
    Geometric { r: f64 },
    /// σ_n = e^{√n}
    ExpSqrt,
    /// σ_n = n^{-a}, a > 0
    DecayPower { a: f64 },
    /// Tabulated prefix σ_1..σ_K plus an extrapolation rule.
    Custom(CustomTable),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "constant",
            Family::LogPower { .. } => "log_power",
            Family::PowerLaw { .. } => "power_law",
            Family::Geometric { .. } => "geometric",
            Family::ExpSqrt => "exp_sqrt",
            Family::DecayPower { .. } => "decay_power",
            Family::Custom(_) => "custom",
        }
    }

    /// Named parameters, in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Family::Constant { c } => vec![("c", *c)],
            Family::LogPower { a } | Family::PowerLaw { a } | Family::DecayPower { a } => {
                vec![("a", *a)]
            }
            Family::Geometric { r } => vec![("r", *r)],
            Family::ExpSqrt => vec![],
            Family::Custom(t) => {
                let mut p = vec![("len", t.len() as f64)];
                p.extend(t.extrapolation().params());
                p
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        match self {
            Family::Constant { c } => positive("c", *c),
            Family::LogPower { a } | Family::PowerLaw { a } | Family::DecayPower { a } => {
                positive("a", *a)
            }
            Family::Geometric { r } => {
                if r.is_finite() && *r > 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "r",
                        format!("must be finite and > 1, got {r}"),
                    ))
                }
            }
            Family::ExpSqrt => Ok(()),
            Family::Custom(t) => t.validate(),
        }
    }
}

/// A reinforcement sequence together with the initial mass τ_0.
///
/// Immutable after construction; cheap to clone (custom tables are shared).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    family: Family,
    tau0: f64,
}

impl SequenceSpec {
    pub fn new(family: Family, tau0: f64) -> Result<Self> {
        family.validate()?;
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(Error::invalid(
                "tau0",
                format!("must be finite and > 0, got {tau0}"),
            ));
        }
        Ok(Self { family, tau0 })
    }

    pub fn constant(c: f64, tau0: f64) -> Result<Self> {
        Self::new(Family::Constant { c }, tau0)
    }

    pub fn log_power(a: f64, tau0: f64) -> Result<Self> {
        Self::new(Family::LogPower { a }, tau0)
    }

    pub fn power_law(a: f64, tau0: f64) -> Result<Self> {
        Self::new(Family::PowerLaw { a }, tau0)
    }

    pub fn geometric(r: f64, tau0: f64) -> Result<Self> {
        Self::new(Family::Geometric { r }, tau0)
    }

    pub fn exp_sqrt(tau0: f64) -> Result<Self> {
        Self::new(Family::ExpSqrt, tau0)
    }

    pub fn decay_power(a: f64, tau0: f64) -> Result<Self> {
        Self::new(Family::DecayPower { a }, tau0)
    }

    pub fn custom(table: CustomTable, tau0: f64) -> Result<Self> {
        Self::new(Family::Custom(table), tau0)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Human-readable `name(k=v,...)` label.
    pub fn label(&self) -> String {
        let params: Vec<String> = self
            .family
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!(
            "{}({}) tau0={}",
            self.family.name(),
            params.join(","),
            self.tau0
        )
    }

    /// Largest n at which σ_n is defined, or `None` if defined for all n.
    pub fn max_index(&self) -> Option<u64> {
        match &self.family {
            Family::Custom(t) if matches!(t.extrapolation(), Extrapolation::None) => {
                Some(t.len() as u64)
            }
            _ => None,
        }
    }

    fn check_defined(&self, n: u64) -> Result<()> {
        match self.max_index() {
            Some(len) if n > len => Err(Error::BeyondTable { n, len }),
            _ => Ok(()),
        }
    }

    /// σ_n for n ≥ 1. Saturates to `f64::MAX` when the value is not
    /// representable; [`ln_sigma`](Self::ln_sigma) is exact in that range.
    pub fn sigma(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        self.check_defined(n)?;
        Ok(self.sigma_unchecked(n))
    }

    /// ln σ_n for n ≥ 1.
    pub fn ln_sigma(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        self.check_defined(n)?;
        Ok(self.ln_sigma_unchecked(n))
    }

    pub(crate) fn sigma_unchecked(&self, n: u64) -> f64 {
        let x = n as f64;
        let v = match &self.family {
            Family::Constant { c } => *c,
            Family::LogPower { a } => (x + 2.0).ln().powf(*a),
            Family::PowerLaw { a } => x.powf(*a),
            Family::Geometric { r } => r.powf(x),
            Family::ExpSqrt => x.sqrt().exp(),
            Family::DecayPower { a } => x.powf(-*a),
            Family::Custom(t) => t.sigma(n),
        };
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    }

    pub(crate) fn ln_sigma_unchecked(&self, n: u64) -> f64 {
        let x = n as f64;
        match &self.family {
            Family::Constant { c } => c.ln(),
            Family::LogPower { a } => a * (x + 2.0).ln().ln(),
            Family::PowerLaw { a } => a * x.ln(),
            Family::Geometric { r } => x * r.ln(),
            Family::ExpSqrt => x.sqrt(),
            Family::DecayPower { a } => -a * x.ln(),
            Family::Custom(t) => t.ln_sigma(n),
        }
    }

    /// τ_n. O(n): walks the sequence from the start.
    pub fn tau(&self, n: u64) -> Result<Tau> {
        if n == 0 {
            return Ok(Tau::linear(self.tau0));
        }
        self.check_defined(n)?;
        Ok(self
            .walk()
            .nth((n - 1) as usize)
            .expect("defined index")
            .tau)
    }

    /// `(σ_n/τ_n, τ_{n-1}/τ_n)` for n ≥ 1. The pair sums to one up to a
    /// single rounding and is accurate even where τ_n overflows.
    pub fn step_ratios(&self, n: u64) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        self.check_defined(n)?;
        let step = self.walk().nth((n - 1) as usize).expect("defined index");
        Ok((step.s, step.r))
    }

    /// Iterator over steps n = 1, 2, ... (ends only for tables without
    /// extrapolation).
    pub fn walk(&self) -> Walk<'_> {
        Walk {
            spec: self,
            n: 0,
            tau: CompensatedSum::from_value(self.tau0),
            ln_tau: self.tau0.ln(),
            linear: true,
        }
    }

    /// Precomputes the step shares for n = 1..=horizon.
    pub fn ratio_table(&self, horizon: u64) -> Result<RatioTable> {
        self.check_defined(horizon)?;
        let cap = horizon as usize;
        let mut table = RatioTable {
            s: Vec::with_capacity(cap),
            r: Vec::with_capacity(cap),
            ln_tau: Vec::with_capacity(cap + 1),
        };
        table.ln_tau.push(self.tau0.ln());
        for step in self.walk().take(cap) {
            table.s.push(step.s);
            table.r.push(step.r);
            table.ln_tau.push(step.tau.ln);
        }
        Ok(table)
    }

    pub(crate) fn tail_class(&self) -> Option<TailClass> {
        TailClass::of(self)
    }
}

/// τ_n in both scales. `value` saturates to `f64::MAX` (with `saturated`
/// set) once the linear value is no longer tracked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau {
    pub value: f64,
    pub ln: f64,
    pub saturated: bool,
}

impl Tau {
    fn linear(value: f64) -> Self {
        Self {
            value,
            ln: value.ln(),
            saturated: false,
        }
    }

    /// 1/τ_n, accurate in both regimes.
    pub fn recip(&self) -> f64 {
        if self.saturated {
            (-self.ln).exp()
        } else {
            1.0 / self.value
        }
    }
}

/// One step of the sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub n: u64,
    pub sigma: f64,
    pub ln_sigma: f64,
    pub tau: Tau,
    /// σ_n / τ_n
    pub s: f64,
    /// τ_{n-1} / τ_n
    pub r: f64,
}

impl Step {
    /// σ_n / τ_{n-1}
    pub fn sigma_over_prev_tau(&self) -> f64 {
        self.s / self.r
    }
}

/// Forward pass over the sequence; see the module docs.
#[derive(Debug, Clone)]
pub struct Walk<'a> {
    spec: &'a SequenceSpec,
    n: u64,
    tau: CompensatedSum,
    ln_tau: f64,
    linear: bool,
}

impl Iterator for Walk<'_> {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        let n = self.n + 1;
        if matches!(self.spec.max_index(), Some(len) if n > len) {
            return None;
        }
        self.n = n;
        let ln_sigma = self.spec.ln_sigma_unchecked(n);
        let sigma = self.spec.sigma_unchecked(n);
        if self.linear {
            let prev = self.tau.value();
            if sigma < f64::MAX && prev + sigma < LINEAR_LIMIT {
                self.tau.add(sigma);
                let total = self.tau.value();
                let (s, r) = complementary_shares(sigma, prev, total);
                self.ln_tau = total.ln();
                return Some(Step {
                    n,
                    sigma,
                    ln_sigma,
                    tau: Tau::linear(total),
                    s,
                    r,
                });
            }
            self.linear = false;
        }
        let d = self.ln_tau - ln_sigma;
        let (s, r) = logistic_pair(d);
        self.ln_tau = ln_sigma + softplus(d);
        Some(Step {
            n,
            sigma,
            ln_sigma,
            tau: Tau {
                value: f64::MAX,
                ln: self.ln_tau,
                saturated: true,
            },
            s,
            r,
        })
    }
}

/// Step shares for n = 1..=N, built once and shared read-only by trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    s: Vec<f64>,
    r: Vec<f64>,
    ln_tau: Vec<f64>,
}

impl RatioTable {
    pub fn horizon(&self) -> u64 {
        self.s.len() as u64
    }

    /// `(s_n, r_n)` for 1 ≤ n ≤ horizon.
    pub fn ratios(&self, n: u64) -> (f64, f64) {
        let i = (n - 1) as usize;
        (self.s[i], self.r[i])
    }

    pub fn ln_tau(&self, n: u64) -> f64 {
        self.ln_tau[n as usize]
    }

    /// 1/τ_n for 0 ≤ n ≤ horizon.
    pub fn inv_tau(&self, n: u64) -> f64 {
        (-self.ln_tau[n as usize]).exp()
    }

    /// Iterator over `(n, s_n, r_n)`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.s
            .iter()
            .zip(&self.r)
            .enumerate()
            .map(|(i, (&s, &r))| (i as u64 + 1, s, r))
    }

    /// Shares for the first `horizon` steps only.
    pub fn truncated(&self, horizon: u64) -> RatioTable {
        let h = (horizon as usize).min(self.s.len());
        RatioTable {
            s: self.s[..h].to_vec(),
            r: self.r[..h].to_vec(),
            ln_tau: self.ln_tau[..=h].to_vec(),
        }
    }
}
