//! Tail sums with certified truncation.
//!
//! δ_n = Σ_{i>n} (σ_i/τ_i)² is summed term by term up to some M and the
//! remainder R_M is bracketed by a family-specific bound:
//!
//! * harmonic tails (σ_i/τ_i ≍ 1/i): write the term as w_i / i² with
//!   w_i = (i σ_i/τ_i)² eventually monotone and converging to a known κ²;
//!   then R_M lies between min(w_M, κ²) and max(w_M, κ²) times Σ_{i>M} 1/i².
//! * summable-mass tails (σ decays like i^{-a}, a ≥ 1, or geometrically):
//!   write the term as σ_i² / τ_i² with τ_M ≤ τ_i ≤ τ_M + Σ_{i>M} σ_i, and
//!   Σ_{i>M} σ_i² in closed form.
//!
//! Summation stops once the half-width of the bracket is below `tol`, and
//! the bracket midpoint is added.

use super::{Extrapolation, Family, SequenceSpec, Step, TailClass};
use crate::error::{Error, Result};
use crate::numerics::{power_tail, CompensatedSum};

/// Harmonic brackets assume w_i monotone from here on.
const MIN_BRACKET_INDEX: u64 = 64;
const CHECK_EVERY: u64 = 16;
pub(crate) const MAX_TERMS: u64 = 500_000_000;

enum Remainder {
    Harmonic { limit_sq: f64 },
    Mass,
}

fn remainder_model(class: TailClass) -> Remainder {
    match class {
        TailClass::Bounded | TailClass::LogPower { .. } => Remainder::Harmonic { limit_sq: 1.0 },
        TailClass::PowerGrowth { a } => Remainder::Harmonic {
            limit_sq: (a + 1.0).powi(2),
        },
        TailClass::PowerDecay { a } if a < 1.0 => Remainder::Harmonic {
            limit_sq: (1.0 - a).powi(2),
        },
        TailClass::PowerDecay { .. } | TailClass::GeometricDecay => Remainder::Mass,
        TailClass::Exponential { .. } | TailClass::ExpSqrt => {
            unreachable!("square sum diverges")
        }
    }
}

/// First index where the custom extrapolation (or nothing) governs σ.
fn tail_start(spec: &SequenceSpec) -> u64 {
    match spec.family() {
        Family::Custom(t) => t.len() as u64,
        _ => 1,
    }
}

/// `(Σ_{i>m} σ_i², Σ_{i>m} σ_i)` for decaying tails, the second possibly ∞.
fn decaying_mass_tails(spec: &SequenceSpec, m: u64) -> (f64, f64) {
    match spec.family() {
        Family::DecayPower { a } => {
            let mass = if *a > 1.0 {
                power_tail(*a, m)
            } else {
                f64::INFINITY
            };
            (power_tail(2.0 * a, m), mass)
        }
        Family::Custom(t) => {
            let k = t.len() as u64;
            let last = t.values()[t.len() - 1];
            match t.extrapolation() {
                Extrapolation::Power { exponent } => {
                    let a = -exponent;
                    let scale = last * (k as f64).powf(a);
                    let mass = if a > 1.0 {
                        scale * power_tail(a, m)
                    } else {
                        f64::INFINITY
                    };
                    (scale * scale * power_tail(2.0 * a, m), mass)
                }
                Extrapolation::Geometric { ratio } => {
                    let sigma_m = spec.sigma_unchecked(m);
                    (
                        sigma_m * sigma_m * ratio * ratio / (1.0 - ratio * ratio),
                        sigma_m * ratio / (1.0 - ratio),
                    )
                }
                _ => unreachable!("not a decaying tail"),
            }
        }
        _ => unreachable!("not a decaying tail"),
    }
}

fn remainder_bracket(spec: &SequenceSpec, model: &Remainder, step: &Step) -> (f64, f64) {
    let m = step.n;
    match model {
        Remainder::Harmonic { limit_sq } => {
            let w = (m as f64 * step.s).powi(2);
            let t2 = power_tail(2.0, m);
            (w.min(*limit_sq) * t2, w.max(*limit_sq) * t2)
        }
        Remainder::Mass => {
            let (sq, mass) = decaying_mass_tails(spec, m);
            let inv_hi = step.tau.recip();
            let inv_lo = if mass.is_finite() {
                1.0 / (step.tau.value + mass)
            } else {
                0.0
            };
            (sq * inv_lo * inv_lo, sq * inv_hi * inv_hi)
        }
    }
}

/// δ_n = Σ_{i>n} (σ_i/τ_i)², with absolute truncation error below `tol`.
///
/// Returns `f64::INFINITY` when the square sum diverges. Custom tables
/// without a trusted extrapolation rule are an error.
pub fn delta_tail(spec: &SequenceSpec, n: u64, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let class = spec.tail_class().ok_or_else(|| {
        Error::Inconclusive(format!(
            "{} has no trusted extrapolation rule; delta_n needs a tail model",
            spec.label()
        ))
    })?;
    if class.square_sum_diverges() {
        return Ok(f64::INFINITY);
    }
    let model = remainder_model(class);
    let first_check = n.max(tail_start(spec)).max(MIN_BRACKET_INDEX);
    let mut sum = CompensatedSum::new();
    let mut last_bound = f64::INFINITY;
    for step in spec.walk() {
        if step.n > n {
            sum.add(step.s * step.s);
        }
        if step.n >= first_check && (step.n - first_check).is_multiple_of(CHECK_EVERY) {
            let (lo, hi) = remainder_bracket(spec, &model, &step);
            last_bound = 0.5 * (hi - lo);
            if last_bound < tol {
                sum.add(0.5 * (lo + hi));
                return Ok(sum.value());
            }
        }
        if step.n >= MAX_TERMS {
            break;
        }
    }
    Err(Error::ToleranceUnreachable {
        tol,
        terms: MAX_TERMS,
        bound: last_bound,
    })
}

/// Upper bound on Σ_{n≥m} 1/τ_n.
///
/// `None` when the series diverges or the tail is not determined;
/// `Some(∞)` when `m` is too small for the family's bound to apply yet.
pub fn inverse_tau_tail_bound(spec: &SequenceSpec, m: u64) -> Option<f64> {
    let class = spec.tail_class()?;
    if class.harmonic_tau_diverges() {
        return None;
    }
    let m = m.max(1);
    let mf = m as f64;
    let bound = match (spec.family(), class) {
        (Family::PowerLaw { a }, _) => {
            // τ_n ≥ ∫_0^n x^a dx
            (a + 1.0) * power_tail(a + 1.0, m - 1)
        }
        (Family::Geometric { r }, _) => r.powf(-mf) / (1.0 - 1.0 / r),
        (Family::ExpSqrt, _) => {
            if m < 2 {
                return Some(f64::INFINITY);
            }
            // Σ_{n≥m} e^{-√n} ≤ ∫_{m-1}^∞ e^{-√x} dx
            let y = (mf - 1.0).sqrt();
            2.0 * (y + 1.0) * (-y).exp()
        }
        (Family::LogPower { a }, _) => {
            // τ_n ≥ (n/2) ln(n/2 + 2)^a, then an integral comparison
            if m < 4 {
                return Some(f64::INFINITY);
            }
            2.0 * ((mf - 1.0) / 2.0).ln().powf(1.0 - a) / (a - 1.0)
        }
        (Family::Custom(t), TailClass::PowerGrowth { a: b }) => {
            let k = t.len() as u64;
            if m < 2 * k {
                return Some(f64::INFINITY);
            }
            let last = t.values()[t.len() - 1];
            let c = (b + 1.0) * (k as f64).powf(b) / (last * (1.0 - 2f64.powf(-(b + 1.0))));
            c * power_tail(b + 1.0, m - 1)
        }
        (Family::Custom(t), TailClass::Exponential { ratio }) => {
            let k = t.len() as u64;
            if m < k {
                return Some(f64::INFINITY);
            }
            let last = t.values()[t.len() - 1];
            ratio.powf(k as f64 - mf) / (last * (1.0 - 1.0 / ratio))
        }
        _ => return None,
    };
    Some(bound)
}
