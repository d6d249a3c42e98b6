//! Single trajectories of the proportion process
//! Θ_n = (τ_{n-1}/τ_n) Θ_{n-1} + (σ_n/τ_n) I_n, with I_n ~ Bernoulli(Θ_{n-1}).
//!
//! The state is Θ itself, never the white mass T_n, so fast-growing
//! sequences cannot overflow it. Draws are inverse-transform on the trial's
//! uniform stream, I_n = 1{U_n < Θ_{n-1}}: two trajectories fed the same
//! seed are monotonically coupled in their starting mass.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::seed::{trial_rng, TrialRng};
use crate::sequence::{RatioTable, SequenceSpec};

/// Rounding slack tolerated when Θ leaves [0, 1].
pub const CLAMP_SLACK: f64 = 1e-15;

/// Default monopoly cut: the draw colour must be constant after this
/// fraction of the horizon.
pub const DEFAULT_MONOPOLY_CUT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrnState {
    pub n: u64,
    pub theta: f64,
    /// ln τ_n, informational.
    pub log_tau: f64,
}

impl UrnState {
    pub fn initial(spec: &SequenceSpec, t0: f64) -> Result<Self> {
        check_t0(spec, t0)?;
        Ok(Self {
            n: 0,
            theta: t0 / spec.tau0(),
            log_tau: spec.tau0().ln(),
        })
    }

    /// Advances one step with step shares `(s, r)` for step `n + 1` and
    /// uniform `u`. Returns the draw I_{n+1}.
    pub fn advance(&mut self, s: f64, r: f64, ln_tau: f64, u: f64) -> Result<bool> {
        let white = u < self.theta;
        self.n += 1;
        self.theta = settle(r * self.theta + if white { s } else { 0.0 }, self.n)?;
        self.log_tau = ln_tau;
        Ok(white)
    }
}

fn check_t0(spec: &SequenceSpec, t0: f64) -> Result<()> {
    if t0.is_finite() && (0.0..=spec.tau0()).contains(&t0) {
        Ok(())
    } else {
        Err(Error::invalid(
            "t0",
            format!("must lie in [0, tau0 = {}], got {t0}", spec.tau0()),
        ))
    }
}

#[inline]
fn settle(theta: f64, n: u64) -> Result<f64> {
    if theta > 1.0 {
        if theta - 1.0 <= CLAMP_SLACK {
            Ok(1.0)
        } else {
            Err(Error::ThetaOutOfRange { n, theta })
        }
    } else if theta < 0.0 {
        if theta >= -CLAMP_SLACK {
            Ok(0.0)
        } else {
            Err(Error::ThetaOutOfRange { n, theta })
        }
    } else {
        Ok(theta)
    }
}

/// A white-draw counting window (start, start * g].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: u64,
    pub g: u64,
}

impl Window {
    pub fn end(&self) -> u64 {
        self.start.saturating_mul(self.g)
    }
}

/// Windows (n, n²] for n = 2, 4, 8, ... that fit in the horizon.
pub fn default_windows(horizon: u64) -> Vec<Window> {
    (1..32)
        .map(|k| 1u64 << k)
        .take_while(|&n| n.saturating_mul(n) <= horizon)
        .map(|n| Window { start: n, g: n })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCount {
    pub n: u64,
    pub n_end: u64,
    pub count: u64,
}

/// State of the trajectory at an intermediate horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub n: u64,
    pub theta: f64,
    pub last_flip: Option<u64>,
    pub first_white: Option<u64>,
    pub first_black: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub final_theta: f64,
    /// Largest n ≤ N with I_n ≠ I_{n-1}.
    pub last_flip: Option<u64>,
    pub last_white: Option<u64>,
    pub last_black: Option<u64>,
    pub first_white: Option<u64>,
    /// Σ_{n=1}^N Θ_n
    pub theta_partial_sum: f64,
    /// Extrema of Θ_n over n > N/2.
    pub min_theta_after: f64,
    pub max_theta_after: f64,
    pub window_counts: Vec<WindowCount>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checkpoints: Vec<CheckpointRecord>,
    pub seed: u64,
    pub horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub n: u64,
    pub theta: f64,
    /// `None` at n = 0.
    pub white: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub summary: TrajectorySummary,
    pub path: Option<Vec<PathRow>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOptions {
    /// `None` uses [`default_windows`].
    pub windows: Option<Vec<Window>>,
    /// Intermediate horizons to snapshot, each ≤ horizon.
    pub checkpoints: Vec<u64>,
    pub record_path: bool,
}

/// A started urn: the sequence's step shares up to the horizon and Θ_0.
///
/// Building it costs one pass over the sequence; runs are then cheap and
/// share the table read-only.
#[derive(Debug, Clone)]
pub struct Urn {
    table: RatioTable,
    theta0: f64,
}

impl Urn {
    pub fn new(spec: &SequenceSpec, t0: f64, horizon: u64) -> Result<Self> {
        check_t0(spec, t0)?;
        Ok(Self {
            table: spec.ratio_table(horizon)?,
            theta0: t0 / spec.tau0(),
        })
    }

    pub fn horizon(&self) -> u64 {
        self.table.horizon()
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn table(&self) -> &RatioTable {
        &self.table
    }

    pub fn run(&self, seed: u64, opts: &SimOptions) -> Result<Trajectory> {
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        let windows = match &opts.windows {
            Some(w) => w.clone(),
            None => default_windows(horizon),
        };
        for w in &windows {
            if w.end() > horizon || w.start == 0 {
                return Err(Error::WindowOutOfRange {
                    start: w.start,
                    end: w.end(),
                    horizon,
                });
            }
        }
        let mut checkpoints = opts.checkpoints.clone();
        checkpoints.sort_unstable();
        checkpoints.dedup();
        if let Some(&c) = checkpoints.last() {
            if c > horizon {
                return Err(Error::invalid(
                    "checkpoints",
                    format!("{c} exceeds horizon {horizon}"),
                ));
            }
        }

        let mut rng = trial_rng(seed);
        let mut state = UrnState {
            n: 0,
            theta: self.theta0,
            log_tau: self.table.ln_tau(0),
        };
        let half = horizon / 2;
        let mut prev: Option<bool> = None;
        let (mut last_flip, mut last_white, mut last_black) = (None, None, None);
        let (mut first_white, mut first_black) = (None, None);
        let mut partial = CompensatedSum::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut counts = vec![0u64; windows.len()];
        let mut snaps = Vec::with_capacity(checkpoints.len());
        let mut next_cp = checkpoints.iter().peekable();
        if next_cp.peek() == Some(&&0) {
            next_cp.next();
            snaps.push(CheckpointRecord {
                n: 0,
                theta: state.theta,
                last_flip: None,
                first_white: None,
                first_black: None,
            });
        }
        let mut path = opts.record_path.then(|| {
            let mut p = Vec::with_capacity(horizon as usize + 1);
            p.push(PathRow {
                n: 0,
                theta: state.theta,
                white: None,
            });
            p
        });

        for (n, s, r) in self.table.iter() {
            let u: f64 = rng.random();
            let white = state.advance(s, r, self.table.ln_tau(n), u)?;
            if let Some(p) = prev {
                if p != white {
                    last_flip = Some(n);
                }
            }
            prev = Some(white);
            if white {
                last_white = Some(n);
                first_white.get_or_insert(n);
            } else {
                last_black = Some(n);
                first_black.get_or_insert(n);
            }
            partial.add(state.theta);
            if n > half {
                lo = lo.min(state.theta);
                hi = hi.max(state.theta);
            }
            if white {
                for (c, w) in counts.iter_mut().zip(&windows) {
                    if n > w.start && n <= w.end() {
                        *c += 1;
                    }
                }
            }
            if next_cp.peek() == Some(&&n) {
                next_cp.next();
                snaps.push(CheckpointRecord {
                    n,
                    theta: state.theta,
                    last_flip,
                    first_white,
                    first_black,
                });
            }
            if let Some(p) = path.as_mut() {
                p.push(PathRow {
                    n,
                    theta: state.theta,
                    white: Some(white),
                });
            }
        }

        let summary = TrajectorySummary {
            final_theta: state.theta,
            last_flip,
            last_white,
            last_black,
            first_white,
            theta_partial_sum: partial.value(),
            min_theta_after: lo,
            max_theta_after: hi,
            window_counts: windows
                .iter()
                .zip(counts)
                .map(|(w, count)| WindowCount {
                    n: w.start,
                    n_end: w.end(),
                    count,
                })
                .collect(),
            checkpoints: snaps,
            seed,
            horizon,
        };
        Ok(Trajectory { summary, path })
    }

    /// Θ at each requested step (sorted, ≤ horizon) of the trajectory for
    /// `seed`; the lean kernel behind the Laplace-transform estimators.
    pub fn theta_at(&self, seed: u64, steps: &[u64]) -> Result<Vec<f64>> {
        debug_assert!(steps.windows(2).all(|w| w[0] <= w[1]));
        let mut out = Vec::with_capacity(steps.len());
        let mut wanted = steps.iter().peekable();
        let mut theta = self.theta0;
        while wanted.peek() == Some(&&0) {
            wanted.next();
            out.push(theta);
        }
        let last = match steps.last() {
            Some(&l) if l > 0 => l,
            _ => return Ok(out),
        };
        if last > self.horizon() {
            return Err(Error::invalid(
                "steps",
                format!("{last} exceeds horizon {}", self.horizon()),
            ));
        }
        let mut rng: TrialRng = trial_rng(seed);
        for (n, s, r) in self.table.iter().take(last as usize) {
            let u: f64 = rng.random();
            theta = settle(r * theta + if u < theta { s } else { 0.0 }, n)?;
            while wanted.peek() == Some(&&n) {
                wanted.next();
                out.push(theta);
            }
        }
        Ok(out)
    }
}

/// Simulates one trajectory with default windows and no path.
pub fn simulate(
    spec: &SequenceSpec,
    t0: f64,
    horizon: u64,
    seed: u64,
) -> Result<TrajectorySummary> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    Ok(Urn::new(spec, t0, horizon)?
        .run(seed, &SimOptions::default())?
        .summary)
}

/// Simulates one trajectory with explicit options.
pub fn simulate_with(
    spec: &SequenceSpec,
    t0: f64,
    horizon: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    Urn::new(spec, t0, horizon)?.run(seed, opts)
}

/// Number of white draws I_i = 1 with n < i ≤ n g. `draws[i - 1]` is I_i.
pub fn window_count(draws: &[bool], n: u64, g: u64) -> Result<u64> {
    let end = n.saturating_mul(g);
    if end > draws.len() as u64 || n == 0 {
        return Err(Error::WindowOutOfRange {
            start: n,
            end,
            horizon: draws.len() as u64,
        });
    }
    Ok(draws[n as usize..end as usize]
        .iter()
        .filter(|&&w| w)
        .count() as u64)
}

/// Draw colour constant over the second half of the horizon.
///
/// Over-estimates the asymptotic monopoly event at any finite horizon.
pub fn monopoly_proxy(summary: &TrajectorySummary) -> bool {
    monopoly_proxy_with_cut(summary, DEFAULT_MONOPOLY_CUT)
}

/// As [`monopoly_proxy`] with the cut at `cut * horizon`.
pub fn monopoly_proxy_with_cut(summary: &TrajectorySummary, cut: f64) -> bool {
    flip_free_after(summary.last_flip, summary.horizon, cut)
}

pub(crate) fn flip_free_after(last_flip: Option<u64>, horizon: u64, cut: f64) -> bool {
    let cut_index = (horizon as f64 * cut).floor() as u64;
    last_flip.is_none_or(|f| f <= cut_index)
}

/// Θ_N within `eps` of {0, 1}.
pub fn domination_proxy(summary: &TrajectorySummary, eps: f64) -> bool {
    is_dominated(summary.final_theta, eps)
}

pub(crate) fn is_dominated(theta: f64, eps: f64) -> bool {
    theta <= eps || theta >= 1.0 - eps
}

/// Writes a path as CSV with header `n,theta,i_n` (`i_n` empty at n = 0).
pub fn write_path_csv<W: Write>(rows: &[PathRow], mut out: W) -> Result<()> {
    writeln!(out, "n,theta,i_n")?;
    for row in rows {
        match row.white {
            Some(w) => writeln!(out, "{},{},{}", row.n, row.theta, u8::from(w))?,
            None => writeln!(out, "{},{},", row.n, row.theta)?,
        }
    }
    Ok(())
}

/// Draw sequence I_1..I_N of a recorded path.
pub fn draws(rows: &[PathRow]) -> Vec<bool> {
    rows.iter().filter_map(|r| r.white).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant() -> SequenceSpec {
        SequenceSpec::constant(1.0, 2.0).unwrap()
    }

    #[test]
    fn zero_start_absorbs() {
        let s = simulate(&constant(), 0.0, 100, 3).unwrap();
        assert_eq!(s.final_theta, 0.0);
        assert_eq!(s.last_white, None);
        assert_eq!(s.last_black, Some(100));
        assert_eq!(s.last_flip, None);
        assert!(monopoly_proxy(&s));
        assert!(domination_proxy(&s, 0.01));
    }

    #[test]
    fn full_start_absorbs() {
        let spec = SequenceSpec::geometric(2.0, 2.0).unwrap();
        let s = simulate(&spec, 2.0, 100, 11).unwrap();
        assert_eq!(s.final_theta, 1.0);
        assert_eq!(s.last_black, None);
        assert_eq!(s.last_white, Some(100));
    }

    #[test]
    fn rejects_t0_outside_range() {
        assert!(simulate(&constant(), -0.1, 10, 0).is_err());
        assert!(simulate(&constant(), 2.5, 10, 0).is_err());
        assert!(simulate(&constant(), 1.0, 0, 0).is_err());
    }

    #[test]
    fn window_count_examples() {
        let white = vec![true; 100];
        let black = vec![false; 100];
        assert_eq!(window_count(&white, 10, 10).unwrap(), 90);
        assert_eq!(window_count(&black, 10, 10).unwrap(), 0);
        assert!(matches!(
            window_count(&white, 10, 11),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn online_window_counts_match_recorded_path() {
        let opts = SimOptions {
            windows: Some(vec![Window { start: 10, g: 10 }, Window { start: 3, g: 7 }]),
            checkpoints: vec![],
            record_path: true,
        };
        let t = simulate_with(&constant(), 1.0, 100, 99, &opts).unwrap();
        let d = draws(t.path.as_ref().unwrap());
        assert_eq!(d.len(), 100);
        for wc in &t.summary.window_counts {
            assert_eq!(wc.count, window_count(&d, wc.n, wc.n_end / wc.n).unwrap());
        }
    }

    #[test]
    fn proxies_follow_definitions() {
        let mut s = simulate(&constant(), 1.0, 10, 1).unwrap();
        s.last_flip = Some(10);
        assert!(!monopoly_proxy(&s));
        s.last_flip = Some(5);
        assert!(monopoly_proxy(&s));
        s.final_theta = 0.5;
        assert!(!domination_proxy(&s, 0.01));
        s.final_theta = 0.0;
        assert!(domination_proxy(&s, 0.01));
    }

    #[test]
    fn summary_is_consistent_with_path() {
        let opts = SimOptions {
            record_path: true,
            checkpoints: vec![0, 25, 50],
            ..Default::default()
        };
        let t = simulate_with(&constant(), 1.0, 50, 5, &opts).unwrap();
        let path = t.path.unwrap();
        let sum: f64 = path[1..].iter().map(|r| r.theta).sum();
        assert!((sum - t.summary.theta_partial_sum).abs() < 1e-12);
        assert_eq!(path.last().unwrap().theta, t.summary.final_theta);
        let cps: Vec<u64> = t.summary.checkpoints.iter().map(|c| c.n).collect();
        assert_eq!(cps, vec![0, 25, 50]);
        assert_eq!(t.summary.checkpoints[1].theta, path[25].theta);
        let d = draws(&path);
        let expect_flip = (2..=50u64)
            .rev()
            .find(|&n| d[n as usize - 1] != d[n as usize - 2]);
        assert_eq!(t.summary.last_flip, expect_flip);
    }

    #[test]
    fn theta_at_agrees_with_run() {
        let urn = Urn::new(&constant(), 1.0, 40).unwrap();
        let run = urn
            .run(
                8,
                &SimOptions {
                    record_path: true,
                    ..Default::default()
                },
            )
            .unwrap();
        let path = run.path.unwrap();
        let got = urn.theta_at(8, &[0, 1, 17, 40]).unwrap();
        assert_eq!(
            got,
            vec![path[0].theta, path[1].theta, path[17].theta, path[40].theta]
        );
    }

    #[test]
    fn path_csv_format() {
        let rows = [
            PathRow {
                n: 0,
                theta: 0.5,
                white: None,
            },
            PathRow {
                n: 1,
                theta: 2.0 / 3.0,
                white: Some(true),
            },
        ];
        let mut buf = Vec::new();
        write_path_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,theta,i_n\n0,0.5,\n1,0.6666666666666666,1\n"
        );
    }

    #[test]
    fn settle_distinguishes_rounding_from_bugs() {
        assert_eq!(settle(1.0 + 5e-16, 1).unwrap(), 1.0);
        assert_eq!(settle(-5e-16, 1).unwrap(), 0.0);
        assert!(settle(1.0 + 1e-12, 1).is_err());
        assert!(settle(-1e-9, 1).is_err());
    }
}
