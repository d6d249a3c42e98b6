//! Small floating-point helpers shared by the sequence, urn and ensemble code.

use serde::{Deserialize, Serialize};

/// Neumaier-compensated running sum.
///
/// Addition order still matters in the last bit, so reductions that must be
/// schedule independent feed values in a fixed (trial index) order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_value(value: f64) -> Self {
        Self {
            sum: value,
            comp: 0.0,
        }
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + e^d)`.
pub fn softplus(d: f64) -> f64 {
    d.max(0.0) + (-d.abs()).exp().ln_1p()
}

/// Returns `(1 / (1 + e^d), e^d / (1 + e^d))`, i.e. the pair `(p, 1 - p)`.
///
/// The smaller member is computed directly and the larger one as its
/// complement, so the two sum to one up to a single rounding.
pub fn logistic_pair(d: f64) -> (f64, f64) {
    if d >= 0.0 {
        let e = (-d).exp();
        let small = e / (1.0 + e);
        (small, 1.0 - small)
    } else {
        let e = d.exp();
        let small = e / (1.0 + e);
        (1.0 - small, small)
    }
}

/// Splits `(num_a, num_b) / (num_a + num_b)` so the two shares sum to one
/// up to a single rounding.
pub fn complementary_shares(a: f64, b: f64, total: f64) -> (f64, f64) {
    if a <= b {
        let sa = a / total;
        (sa, 1.0 - sa)
    } else {
        let sb = b / total;
        (1.0 - sb, sb)
    }
}

// B_{2j} / (2j)! for j = 1..=7.
const EM_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

/// Hurwitz zeta `Σ_{k≥0} (x + k)^{-s}` for `s > 1`, `x > 0`.
///
/// Direct summation up to `x + K ≥ 16`, then an Euler–Maclaurin tail with
/// seven Bernoulli corrections. Relative error is near machine precision
/// for `s` up to roughly 20.
pub fn hurwitz_zeta(s: f64, x: f64) -> f64 {
    debug_assert!(s > 1.0 && x > 0.0);
    let mut head = CompensatedSum::new();
    let mut base = x;
    while base < 16.0 {
        head.add(base.powf(-s));
        base += 1.0;
    }
    let mut tail = base.powf(1.0 - s) / (s - 1.0) + 0.5 * base.powf(-s);
    // rising factorial s (s+1) ... (s + 2j - 2), times base^{-s-2j+1}
    let mut rising = s;
    let mut pow = base.powf(-s - 1.0);
    let inv_sq = 1.0 / (base * base);
    for (j, coeff) in EM_COEFFS.iter().enumerate() {
        tail += coeff * rising * pow;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        pow *= inv_sq;
    }
    head.add(tail);
    head.value()
}

/// `Σ_{i > m} i^{-s}` for `s > 1`.
pub fn power_tail(s: f64, m: u64) -> f64 {
    hurwitz_zeta(s, m as f64 + 1.0)
}

/// Geometrically spaced integer probe points in `[lo, hi]`, deduplicated,
/// always containing both endpoints.
pub fn geometric_probes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo);
    if count <= 1 || lo == hi {
        return if lo == hi { vec![lo] } else { vec![lo, hi] };
    }
    let (l, h) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64;
            ((l + t * (h - l)).exp().round() as u64).clamp(lo, hi)
        })
        .collect();
    out.push(lo);
    out.push(hi);
    out.sort_unstable();
    out.dedup();
    out
}
