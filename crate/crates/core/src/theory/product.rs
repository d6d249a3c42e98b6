use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::sequence::{inverse_tau_tail_bound, SequenceSpec};

/// Steps between tail-bound evaluations.
const TAIL_CHECK_EVERY: u64 = 16;
const MAX_FACTORS: u64 = 500_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeverWhiteProduct {
    pub value: f64,
    /// Factors actually multiplied.
    pub factors: u64,
    /// Bound on the neglected part of -ln(product); zero when exact.
    pub log_tail_bound: f64,
    pub note: Option<String>,
}

/// ∏_{n<N} (1 - t0/τ_n): the probability that none of the first N draws is
/// white, and for N = ∞ a lower bound on P(M).
///
/// For N = ∞ the product is truncated once the remaining log-factor is
/// certified below `tol`; when Σ 1/τ_n diverges the product is exactly 0.
pub fn product_never_white(
    spec: &SequenceSpec,
    t0: f64,
    horizon: Horizon,
    tol: f64,
) -> Result<NeverWhiteProduct> {
    let tau0 = spec.tau0();
    if !(t0.is_finite() && (0.0..=tau0).contains(&t0)) {
        return Err(Error::invalid(
            "t0",
            format!("must lie in [0, tau0 = {tau0}], got {t0}"),
        ));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let exact = |value, factors| NeverWhiteProduct {
        value,
        factors,
        log_tail_bound: 0.0,
        note: None,
    };
    if t0 == 0.0 || horizon == Horizon::Finite(0) {
        return Ok(exact(1.0, 0));
    }
    if t0 == tau0 {
        return Ok(NeverWhiteProduct {
            note: Some("t0 = tau0: the first draw is white with probability one".into()),
            ..exact(0.0, 1)
        });
    }

    let limit = match horizon {
        Horizon::Finite(n) => {
            if let Some(len) = spec.max_index() {
                if n - 1 > len {
                    return Err(Error::BeyondTable { n: n - 1, len });
                }
            }
            Some(n)
        }
        Horizon::Infinite => {
            if spec.max_index().is_some() {
                return Err(Error::Inconclusive(
                    "custom table has no extrapolation rule, so the infinite product is undefined"
                        .into(),
                ));
            }
            if spec.tail_class().is_none() {
                return Err(Error::Inconclusive(
                    "the extrapolation rule is not supported by the tabulated values".into(),
                ));
            }
            if inverse_tau_tail_bound(spec, 1).is_none() {
                return Ok(NeverWhiteProduct {
                    note: Some("sum of 1/tau_n diverges, so the product is 0".into()),
                    ..exact(0.0, 0)
                });
            }
            None
        }
    };

    let ln_t0 = t0.ln();
    let mut log_sum = CompensatedSum::from_value((-t0 / tau0).ln_1p());
    let mut factors = 1u64;
    let mut bound = f64::INFINITY;
    for step in spec.walk() {
        if let Some(n) = limit {
            if factors >= n {
                break;
            }
        }
        let q = if step.tau.saturated {
            (ln_t0 - step.tau.ln).exp()
        } else {
            t0 / step.tau.value
        };
        log_sum.add((-q).ln_1p());
        factors += 1;
        if limit.is_none() && factors.is_multiple_of(TAIL_CHECK_EVERY) {
            // -ln(1 - x) ≤ x / (1 - x) and x ≤ q for the remaining factors.
            if let Some(b) = inverse_tau_tail_bound(spec, factors) {
                bound = t0 * b / (1.0 - q);
                if bound < tol {
                    break;
                }
            }
            if factors >= MAX_FACTORS {
                return Err(Error::ToleranceUnreachable {
                    tol,
                    terms: factors,
                    bound,
                });
            }
        }
    }
    let log_tail_bound = if limit.is_some() { 0.0 } else { bound };
    Ok(NeverWhiteProduct {
        value: log_sum.value().exp(),
        factors,
        log_tail_bound,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn infinite(spec: &SequenceSpec, t0: f64) -> f64 {
        product_never_white(spec, t0, Horizon::Infinite, 1e-12)
            .unwrap()
            .value
    }

    #[test]
    fn geometric_infinite_product() {
        let spec = SequenceSpec::geometric(2.0, 2.0).unwrap();
        // ∏_{n≥1} (1 - 2^{-n}) by direct multiplication
        let oracle: f64 = (1..200).map(|n| 1.0 - 0.5f64.powi(n)).product();
        assert!((infinite(&spec, 1.0) - oracle).abs() < 1e-12);
        assert!((oracle - 0.288788).abs() < 1e-6);
    }

    #[test]
    fn trivial_cases() {
        let c = SequenceSpec::constant(1.0, 2.0).unwrap();
        assert_eq!(infinite(&c, 0.0), 1.0);
        assert_eq!(infinite(&c, 1.0), 0.0);
        let full = product_never_white(&c, 2.0, Horizon::Finite(5), 1e-9).unwrap();
        assert_eq!(full.value, 0.0);
        assert!(full.note.is_some());
    }

    #[test]
    fn finite_product_matches_direct_formula() {
        let c = SequenceSpec::constant(1.0, 2.0).unwrap();
        // τ_n = n + 2: ∏_{n<N} (n+1)/(n+2) = 1/(N+1)
        for n in [1u64, 2, 10, 100] {
            let v = product_never_white(&c, 1.0, Horizon::Finite(n), 1e-9)
                .unwrap()
                .value;
            assert!((v - 1.0 / (n as f64 + 1.0)).abs() < 1e-14, "{n}: {v}");
        }
    }

    #[test]
    fn power_law_infinite_product_is_positive_and_below_finite() {
        let p = SequenceSpec::power_law(2.0, 2.0).unwrap();
        let inf = infinite(&p, 1.0);
        let fin = product_never_white(&p, 1.0, Horizon::Finite(1000), 1e-9)
            .unwrap()
            .value;
        assert!(inf > 0.0 && inf <= fin);
        assert!(fin - inf < 1e-4);
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = SequenceSpec::constant(1.0, 2.0).unwrap();
        assert!(product_never_white(&c, 3.0, Horizon::Infinite, 1e-9).is_err());
        assert!(product_never_white(&c, 1.0, Horizon::Infinite, 0.0).is_err());
    }
}
