//! The constant c in 1 - p + p e^{-x} ≤ exp(-p x + c p x²), p ∈ [0, 1], x > 0.
//!
//! Writing e^{-x} - 1 = -x + x² h(x) with h(x) = (x - 1 + e^{-x})/x² and
//! using ln(1 + y) ≤ y, any c ≥ sup h works. h decreases from its limit 1/2
//! at 0⁺, and the p → 0, x → 0 corner shows no smaller c does.

use serde::{Deserialize, Serialize};

/// sup_{x>0} h(x), attained as x → 0⁺.
pub const SHARP_C: f64 = 0.5;

pub const DEFAULT_X_MAX: f64 = 50.0;

/// Smallest grid abscissa.
const X_MIN: f64 = 1e-10;

/// Checks at the located c are run with this much added on top.
const SAFETY: f64 = 1e-9;

/// h(x) = (x - 1 + e^{-x}) / x², with its Taylor series near 0.
pub fn lemma_h(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // 1/2 - x/6 + x²/24 - x³/120 + x⁴/720 - x⁵/5040
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 3..=7 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// z - ln(1 + z) for z > -1, accurate for small |z|.
fn log_slack(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        // z²/2 - z³/3 + z⁴/4 - z⁵/5
        z * z * (0.5 - z * (1.0 / 3.0 - z * (0.25 - z / 5.0)))
    } else {
        z - z.ln_1p()
    }
}

/// Right side minus left side of the inequality after taking logs:
/// -p x + c p x² - ln(1 - p + p e^{-x}) = [z - ln(1 + z)] + p x² (c - h(x))
/// with z = p (e^{-x} - 1).
fn margin(c: f64, p: f64, x: f64) -> f64 {
    let z = p * (-x).exp_m1();
    log_slack(z) + p * x * x * (c - lemma_h(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub c: f64,
    pub p_points: usize,
    pub x_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub violations: u64,
    /// Smallest log-form slack over the grid.
    pub worst_margin: f64,
    pub worst_at: (f64, f64),
}

impl GridCheck {
    pub fn points(&self) -> usize {
        self.p_points * self.x_points
    }
}

/// Counts (p, x) grid points where the inequality fails at `c`. p runs over
/// i/p_points for i = 1..=p_points, x over a log grid on [x_min, x_max].
pub fn check_lemma_inequality(c: f64, p_points: usize, x_points: usize, x_max: f64) -> GridCheck {
    let xs = log_grid(X_MIN.max(x_max * 1e-12), x_max, x_points);
    let mut violations = 0;
    let mut worst = (f64::INFINITY, (f64::NAN, f64::NAN));
    for i in 1..=p_points {
        let p = i as f64 / p_points as f64;
        for &x in &xs {
            let m = margin(c, p, x);
            if m < 0.0 {
                violations += 1;
            }
            if m < worst.0 {
                worst = (m, (p, x));
            }
        }
    }
    GridCheck {
        c,
        p_points,
        x_points,
        x_min: xs[0],
        x_max,
        violations,
        worst_margin: worst.0,
        worst_at: worst.1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCReport {
    /// max of h over the grid
    pub c_min: f64,
    pub argmax: f64,
    /// The x → 0⁺ limit of h, for comparison.
    pub limit_at_zero: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    /// Added to `c_min` for the two-variable check.
    pub safety: f64,
    pub check: GridCheck,
    /// Worst slack of the two-variable inequality at `c_min + safety`.
    pub margin: f64,
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Locates sup h on a log grid over (0, x_max] with `grid_density` points
/// per decade, then verifies the two-variable inequality on a square grid
/// at the located constant.
pub fn find_lemma_c(x_max: f64, grid_density: usize) -> LemmaCReport {
    let decades = (x_max / X_MIN).log10().max(1.0);
    let count = ((decades * grid_density.max(1) as f64).ceil() as usize).max(2);
    let xs = log_grid(X_MIN, x_max, count);
    let (argmax, c_min) =
        xs.iter()
            .map(|&x| (x, lemma_h(x)))
            .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    let side = grid_density.clamp(10, 200);
    let check = check_lemma_inequality(c_min + SAFETY, side, side, x_max);
    LemmaCReport {
        c_min,
        argmax,
        limit_at_zero: lemma_h(0.0),
        x_min: X_MIN,
        x_max,
        x_points: count,
        safety: SAFETY,
        margin: check.worst_margin,
        check,
    }
}
