//! Deterministic parallel Monte Carlo over independent trajectories.
//!
//! Trial `i` runs on the generator seeded by [`trial_seed`]`(base_seed, i)`.
//! Trials are mapped in parallel, collected in index order and reduced
//! sequentially, so a report depends only on the configuration and never on
//! the worker count.
//!
//! Defaults: `eps = 1e-3`, checkpoints `{N/4, N/2, N}`, monopoly cut at half
//! of each checkpoint, 100 histogram bins on [0, 1], 95% Wilson intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::seed::{trial_seed, MIXER};
use crate::sequence::SequenceSpec;
use crate::urn::{
    default_windows, flip_free_after, is_dominated, PathRow, SimOptions, Urn, Window,
    DEFAULT_MONOPOLY_CUT,
};

pub const DEFAULT_EPS: f64 = 1e-3;
pub const HISTOGRAM_BINS: usize = 100;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Default ceiling on the estimated size of dumped paths.
pub const DEFAULT_DUMP_BUDGET: u64 = 256 << 20;
/// Estimated CSV bytes per dumped path row.
const BYTES_PER_ROW: u64 = 32;

pub const CSV_HEADER: &str = "family,params,tau0,t0,horizon,trials,eps,monopoly_freq,mono_lo,mono_hi,domination_freq,dom_lo,dom_hi,ks_stat";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub spec: SequenceSpec,
    pub t0: f64,
    pub horizon: u64,
    pub trials: u64,
    pub base_seed: u64,
    pub eps: f64,
    /// Intermediate horizons; empty means `{N/4, N/2, N}`.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    /// Monopoly proxy: no flip after `cut * n` at checkpoint n.
    pub monopoly_cut: f64,
    /// `None` uses windows (n, n²] for n = 2, 4, 8, ...
    #[serde(default)]
    pub windows: Option<Vec<Window>>,
    /// 0 picks the rayon default.
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub dump_paths: bool,
    #[serde(skip)]
    pub dump_budget: u64,
}

impl EnsembleConfig {
    pub fn new(spec: SequenceSpec, t0: f64, horizon: u64, trials: u64, base_seed: u64) -> Self {
        Self {
            spec,
            t0,
            horizon,
            trials,
            base_seed,
            eps: DEFAULT_EPS,
            checkpoints: Vec::new(),
            monopoly_cut: DEFAULT_MONOPOLY_CUT,
            windows: None,
            workers: 0,
            dump_paths: false,
            dump_budget: DEFAULT_DUMP_BUDGET,
        }
    }

    /// Checkpoints actually reported: sorted, deduplicated, always ending at
    /// the horizon.
    pub fn effective_checkpoints(&self) -> Vec<u64> {
        let mut cps = if self.checkpoints.is_empty() {
            vec![self.horizon / 4, self.horizon / 2, self.horizon]
        } else {
            self.checkpoints.clone()
        };
        cps.push(self.horizon);
        cps.retain(|&c| c > 0);
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::invalid(
                "eps",
                format!("must lie in (0, 1/2), got {}", self.eps),
            ));
        }
        if !(self.monopoly_cut > 0.0 && self.monopoly_cut < 1.0) {
            return Err(Error::invalid("monopoly_cut", "must lie in (0, 1)"));
        }
        if let Some(&c) = self.checkpoints.iter().max() {
            if c > self.horizon {
                return Err(Error::invalid(
                    "checkpoints",
                    format!("{c} exceeds horizon {}", self.horizon),
                ));
            }
        }
        if !self.checkpoints.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::invalid("checkpoints", "must be sorted"));
        }
        if self.dump_paths {
            let needed = self
                .trials
                .saturating_mul(self.horizon + 1)
                .saturating_mul(BYTES_PER_ROW);
            if needed > self.dump_budget {
                return Err(Error::DumpBudgetExceeded {
                    needed,
                    budget: self.dump_budget,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub freq: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        let (lo, hi) = wilson_interval(successes, trials, DEFAULT_LEVEL)?;
        Ok(Self {
            successes,
            trials,
            freq: successes as f64 / trials as f64,
            lo,
            hi,
        })
    }

    /// Binomial standard error of the frequency.
    pub fn std_error(&self) -> f64 {
        (self.freq * (1.0 - self.freq) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut sum, mut sq) = (CompensatedSum::new(), CompensatedSum::new());
        let (mut lo, mut hi, mut k) = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
        for v in values {
            sum.add(v);
            sq.add(v * v);
            lo = lo.min(v);
            hi = hi.max(v);
            k += 1;
        }
        let kf = k as f64;
        let mean = sum.value() / kf;
        let var = if k > 1 {
            ((sq.value() - kf * mean * mean) / (kf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_dev: var.sqrt(),
            min: lo,
            max: hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub n: u64,
    pub monopoly: Proportion,
    pub domination: Proportion,
    /// No white draw among the first n.
    pub never_white: Proportion,
    pub ks_uniform_stat: f64,
    /// τ_cut/τ_n. A flip-free stretch after the cut forces Θ_n within this
    /// of {0, 1}, so monopoly implies domination whenever eps is above it.
    pub proxy_consistency_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub n: u64,
    pub n_end: u64,
    pub mean: f64,
    pub std_error: f64,
    /// ln g(n), the shape of the lower bound on the expected count.
    pub log_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: EnsembleConfig,
    pub version: String,
    pub seed_mixer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    /// Proxies at the horizon.
    pub monopoly: Proportion,
    pub domination: Proportion,
    pub never_white: Proportion,
    /// One row per checkpoint, the horizon last.
    pub checkpoints: Vec<CheckpointRow>,
    pub theta_histogram: Vec<u64>,
    pub final_theta: Moments,
    pub theta_partial_sum: Moments,
    pub ks_uniform_stat: f64,
    pub windows: Vec<WindowSummary>,
    pub provenance: Provenance,
}

/// Everything a trial contributes to the report.
struct TrialDigest {
    final_theta: f64,
    partial_sum: f64,
    /// Per checkpoint: (Θ_n, monopoly, never white).
    at: Vec<(f64, bool, bool)>,
    windows: Vec<u64>,
    path: Option<Vec<PathRow>>,
}

/// Recorded paths, keyed by trial index.
pub type PathDump = Vec<(u64, Vec<PathRow>)>;

/// Runs the ensemble and returns the report.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleReport> {
    Ok(run_ensemble_with_paths(config)?.0)
}

/// As [`run_ensemble`], also returning each trial's path when
/// `config.dump_paths` is set (trial index, rows).
pub fn run_ensemble_with_paths(config: &EnsembleConfig) -> Result<(EnsembleReport, PathDump)> {
    config.validate()?;
    let urn = Urn::new(&config.spec, config.t0, config.horizon)?;
    let cps = config.effective_checkpoints();
    let windows = config
        .windows
        .clone()
        .unwrap_or_else(|| default_windows(config.horizon));
    let opts = SimOptions {
        windows: Some(windows.clone()),
        checkpoints: cps.clone(),
        record_path: config.dump_paths,
    };
    let trial = |i: u64| -> Result<TrialDigest> {
        let t = urn.run(trial_seed(config.base_seed, i), &opts)?;
        let s = t.summary;
        let at = s
            .checkpoints
            .iter()
            .map(|c| {
                (
                    c.theta,
                    flip_free_after(c.last_flip, c.n, config.monopoly_cut),
                    c.first_white.is_none(),
                )
            })
            .collect();
        Ok(TrialDigest {
            final_theta: s.final_theta,
            partial_sum: s.theta_partial_sum,
            at,
            windows: s.window_counts.iter().map(|w| w.count).collect(),
            path: t.path,
        })
    };
    let map =
        || -> Result<Vec<TrialDigest>> { (0..config.trials).into_par_iter().map(trial).collect() };
    let digests = if config.workers == 0 {
        map()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(map)?
    };
    reduce(config, &urn, &cps, &windows, digests)
}

fn reduce(
    config: &EnsembleConfig,
    urn: &Urn,
    cps: &[u64],
    windows: &[Window],
    mut digests: Vec<TrialDigest>,
) -> Result<(EnsembleReport, PathDump)> {
    let trials = config.trials;
    let mut rows = Vec::with_capacity(cps.len());
    for (j, &n) in cps.iter().enumerate() {
        let (mut mono, mut dom, mut never) = (0u64, 0u64, 0u64);
        let mut thetas = Vec::with_capacity(digests.len());
        for d in &digests {
            let (theta, m, w) = d.at[j];
            mono += u64::from(m);
            dom += u64::from(is_dominated(theta, config.eps));
            never += u64::from(w);
            thetas.push(theta);
        }
        let cut = (n as f64 * config.monopoly_cut).floor() as u64;
        let table = urn.table();
        rows.push(CheckpointRow {
            n,
            monopoly: Proportion::new(mono, trials)?,
            domination: Proportion::new(dom, trials)?,
            never_white: Proportion::new(never, trials)?,
            ks_uniform_stat: ks_against_uniform(&thetas),
            proxy_consistency_bound: (table.ln_tau(cut) - table.ln_tau(n)).exp(),
        });
    }
    let last = rows.last().expect("horizon checkpoint").clone();

    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    for d in &digests {
        let bin = ((d.final_theta * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    let window_summaries = windows
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let m = Moments::of(digests.iter().map(|d| d.windows[k] as f64));
            WindowSummary {
                n: w.start,
                n_end: w.end(),
                mean: m.mean,
                std_error: m.std_dev / (trials as f64).sqrt(),
                log_g: (w.g as f64).ln(),
            }
        })
        .collect();
    let paths = digests
        .iter_mut()
        .enumerate()
        .filter_map(|(i, d)| d.path.take().map(|p| (i as u64, p)))
        .collect();

    let report = EnsembleReport {
        monopoly: last.monopoly,
        domination: last.domination,
        never_white: last.never_white,
        ks_uniform_stat: last.ks_uniform_stat,
        checkpoints: rows,
        theta_histogram: histogram,
        final_theta: Moments::of(digests.iter().map(|d| d.final_theta)),
        theta_partial_sum: Moments::of(digests.iter().map(|d| d.partial_sum)),
        windows: window_summaries,
        provenance: Provenance {
            config: config.clone(),
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
            seed_mixer: MIXER.into(),
        },
    };
    Ok((report, paths))
}

/// Wilson score interval for `successes` out of `trials` at two-sided
/// confidence `level`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    if successes > trials {
        return Err(Error::invalid("successes", "must not exceed trials"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "must lie in (0, 1)"));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// Uniform(0, 1). Zero for an empty sample.
pub fn ks_against_uniform(samples: &[f64]) -> f64 {
    let mut x: Vec<f64> = samples.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    x.sort_unstable_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

impl EnsembleReport {
    /// One CSV line per checkpoint, matching [`CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<String> {
        let cfg = &self.provenance.config;
        let params = cfg
            .spec
            .family()
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        self.checkpoints
            .iter()
            .map(|row| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    cfg.spec.family().name(),
                    params,
                    cfg.spec.tau0(),
                    cfg.t0,
                    row.n,
                    cfg.trials,
                    cfg.eps,
                    row.monopoly.freq,
                    row.monopoly.lo,
                    row.monopoly.hi,
                    row.domination.freq,
                    row.domination.lo,
                    row.domination.hi,
                    row.ks_uniform_stat,
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!(
            (lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3,
            "{lo} {hi}"
        );
        assert_eq!(wilson_interval(0, 30, 0.95).unwrap().0, 0.0);
        assert_eq!(wilson_interval(30, 30, 0.95).unwrap().1, 1.0);
        assert!(wilson_interval(1, 0, 0.95).is_err());
        assert!(wilson_interval(3, 2, 0.95).is_err());
    }

    #[test]
    fn ks_examples() {
        let k = 99;
        let grid: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
        assert!(ks_against_uniform(&grid) <= 1.0 / (k + 1) as f64 + 1e-15);
        assert_eq!(ks_against_uniform(&[0.5; 10]), 0.5);
    }

    #[test]
    fn absorbed_at_zero() {
        let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
        let r = run_ensemble(&EnsembleConfig::new(spec, 0.0, 50, 100, 1)).unwrap();
        assert_eq!(r.monopoly.freq, 1.0);
        assert_eq!(r.domination.freq, 1.0);
        assert_eq!(r.never_white.freq, 1.0);
        assert_eq!(r.theta_histogram[0], 100);
        assert_eq!(r.theta_histogram.iter().sum::<u64>(), 100);
    }

    #[test]
    fn default_checkpoints_and_csv_shape() {
        let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
        let r = run_ensemble(&EnsembleConfig::new(spec, 1.0, 100, 20, 1)).unwrap();
        let ns: Vec<u64> = r.checkpoints.iter().map(|c| c.n).collect();
        assert_eq!(ns, vec![25, 50, 100]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("constant,c=1,2,1,100,20,0.001,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 14));
    }

    #[test]
    fn dump_budget_is_enforced() {
        let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
        let mut cfg = EnsembleConfig::new(spec, 1.0, 1000, 1000, 1);
        cfg.dump_paths = true;
        cfg.dump_budget = 1 << 20;
        assert!(matches!(
            run_ensemble(&cfg),
            Err(Error::DumpBudgetExceeded { .. })
        ));
        cfg.trials = 2;
        let (_, paths) = run_ensemble_with_paths(&cfg).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[1].1.len(), 1001);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
        let mut cfg = EnsembleConfig::new(spec, 1.0, 10, 0, 1);
        assert!(cfg.validate().is_err());
        cfg.trials = 5;
        cfg.eps = 0.7;
        assert!(cfg.validate().is_err());
        cfg.eps = 0.01;
        cfg.checkpoints = vec![5, 20];
        assert!(cfg.validate().is_err());
        cfg.checkpoints = vec![8, 4];
        assert!(cfg.validate().is_err());
    }
}
