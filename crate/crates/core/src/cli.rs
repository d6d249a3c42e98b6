//! Command-line driver: `classify`, `simulate`, `ensemble`, `verify`.
//!
//! Settings come from an optional flat `key = value` file (`--config`) and
//! are overridden by flags. The effective settings are echoed, in the same
//! format, into the `provenance.config` field of every JSON report; saving
//! that text and passing it back with `--config` reproduces the run.
//!
//! Exit codes: 0 success, 1 failed verification or runtime failure,
//! 2 configuration error. Errors go to stderr as `error[<kind>]: <message>`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ensemble::{run_ensemble_with_paths, EnsembleConfig, DEFAULT_DUMP_BUDGET, DEFAULT_EPS};
use crate::error::Error;
use crate::sequence::{CustomTable, Extrapolation, Family, SequenceSpec};
use crate::theory::classify;
use crate::urn::{simulate_with, write_path_csv, SimOptions, DEFAULT_MONOPOLY_CUT};
use crate::verify::{run_verify, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Simulate,
    Ensemble,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Simulate => "simulate",
            Command::Ensemble => "ensemble",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "polya-urn",
    version,
    about = "Time-dependent Polya urn: classify, simulate, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Print the regime verdict for a sequence.
    Classify(Flags),
    /// Run one trajectory and print its summary.
    Simulate(Flags),
    /// Run many trajectories and print aggregate estimates.
    Ensemble(Flags),
    /// Run the oracle suite; exit status 1 if any check fails.
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key = value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// constant, log_power, power_law, geometric, exp_sqrt, decay_power, custom
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Two-column `n sigma_n` table for the custom family.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Overrides the table's rule: none, hold, "power <b>", "geometric <rho>".
    #[arg(long)]
    extrapolate: Option<String>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated intermediate horizons.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Fraction of the horizon after which the draw colour must be constant.
    #[arg(long)]
    monopoly_cut: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write per-step paths (n, theta, i_n) as CSV to `paths_out`.
    #[arg(long)]
    dump_paths: bool,
    #[arg(long)]
    paths_out: Option<PathBuf>,
    /// Byte ceiling for path dumps.
    #[arg(long)]
    dump_budget: Option<u64>,
    /// Worker threads for Monte Carlo (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Smaller Monte Carlo sizes for `verify`.
    #[arg(long)]
    quick: bool,
}

/// Effective settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Command,
    pub family: String,
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub r: Option<f64>,
    pub table: Option<PathBuf>,
    pub extrapolate: Option<String>,
    pub tau0: f64,
    pub t0: f64,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub eps: f64,
    pub checkpoints: Vec<u64>,
    pub monopoly_cut: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub dump_paths: bool,
    pub paths_out: PathBuf,
    pub dump_budget: u64,
    pub workers: usize,
    pub quick: bool,
}

impl RunConfig {
    fn defaults(subcommand: Command) -> Self {
        Self {
            subcommand,
            family: "constant".into(),
            c: None,
            a: None,
            r: None,
            table: None,
            extrapolate: None,
            tau0: 2.0,
            t0: 1.0,
            horizon: 1000,
            trials: 1000,
            seed: 0,
            eps: DEFAULT_EPS,
            checkpoints: Vec::new(),
            monopoly_cut: DEFAULT_MONOPOLY_CUT,
            out: None,
            format: Format::Json,
            dump_paths: false,
            paths_out: PathBuf::from("paths.csv"),
            dump_budget: DEFAULT_DUMP_BUDGET,
            workers: 0,
            quick: false,
        }
    }

    /// Settings as `key = value` lines, in a fixed order. `out` is omitted
    /// since it does not affect results.
    pub fn to_kv(&self) -> String {
        let mut lines = vec![
            ("subcommand", self.subcommand.name().to_string()),
            ("family", self.family.clone()),
        ];
        let opt = |k: &'static str, v: Option<f64>| v.map(|v| (k, v.to_string()));
        lines.extend(opt("c", self.c));
        lines.extend(opt("a", self.a));
        lines.extend(opt("r", self.r));
        if let Some(t) = &self.table {
            lines.push(("table", t.display().to_string()));
        }
        if let Some(e) = &self.extrapolate {
            lines.push(("extrapolate", e.clone()));
        }
        let cps = self
            .checkpoints
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        lines.extend([
            ("tau0", self.tau0.to_string()),
            ("t0", self.t0.to_string()),
            ("horizon", self.horizon.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("eps", self.eps.to_string()),
            ("checkpoints", cps),
            ("monopoly_cut", self.monopoly_cut.to_string()),
            ("format", format!("{:?}", self.format).to_lowercase()),
            ("dump_paths", self.dump_paths.to_string()),
            ("paths_out", self.paths_out.display().to_string()),
            ("dump_budget", self.dump_budget.to_string()),
            ("workers", self.workers.to_string()),
            ("quick", self.quick.to_string()),
        ]);
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn apply_kv(&mut self, text: &str) -> Result<(), Error> {
        for (k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Error>
        where
            T::Err: std::fmt::Display,
        {
            v.parse()
                .map_err(|e| Error::Parse(format!("`{key}`: cannot parse {v:?}: {e}")))
        }
        fn flag(key: &str, v: &str) -> Result<bool, Error> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Parse(format!(
                    "`{key}`: expected true or false, got {v:?}"
                ))),
            }
        }
        match key {
            "subcommand" => {
                let cmd = Command::from_str(value, true)
                    .map_err(|_| Error::Parse(format!("unknown subcommand {value:?}")))?;
                if cmd != self.subcommand {
                    return Err(Error::Parse(format!(
                        "config file is for `{}`, but `{}` was requested",
                        cmd.name(),
                        self.subcommand.name()
                    )));
                }
            }
            "family" => self.family = value.to_string(),
            "c" => self.c = Some(num(key, value)?),
            "a" => self.a = Some(num(key, value)?),
            "r" => self.r = Some(num(key, value)?),
            "table" => self.table = Some(PathBuf::from(value)),
            "extrapolate" => self.extrapolate = Some(value.to_string()),
            "tau0" => self.tau0 = num(key, value)?,
            "t0" => self.t0 = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "checkpoints" => self.checkpoints = parse_list(value)?,
            "monopoly_cut" => self.monopoly_cut = num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = Format::from_str(value, true)
                    .map_err(|_| Error::Parse(format!("unknown format {value:?}")))?
            }
            "dump_paths" => self.dump_paths = flag(key, value)?,
            "paths_out" => self.paths_out = PathBuf::from(value),
            "dump_budget" => self.dump_budget = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "quick" => self.quick = flag(key, value)?,
            _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: Flags) -> Result<(), Error> {
        if let Some(v) = f.family {
            self.family = v;
        }
        if f.c.is_some() {
            self.c = f.c;
        }
        if f.a.is_some() {
            self.a = f.a;
        }
        if f.r.is_some() {
            self.r = f.r;
        }
        if f.table.is_some() {
            self.table = f.table;
        }
        if f.extrapolate.is_some() {
            self.extrapolate = f.extrapolate;
        }
        macro_rules! take {
            ($($field:ident),*) => {$(if let Some(v) = f.$field { self.$field = v; })*};
        }
        take!(
            tau0,
            t0,
            horizon,
            trials,
            seed,
            eps,
            monopoly_cut,
            format,
            paths_out,
            dump_budget,
            workers
        );
        if let Some(v) = f.checkpoints {
            self.checkpoints = parse_list(&v)?;
        }
        if f.out.is_some() {
            self.out = f.out;
        }
        self.dump_paths |= f.dump_paths;
        self.quick |= f.quick;
        Ok(())
    }

    /// The sequence these settings describe.
    pub fn spec(&self) -> Result<SequenceSpec, Error> {
        let need = |name: &'static str, v: Option<f64>| {
            v.ok_or_else(|| {
                Error::invalid(name, format!("family `{}` needs --{name}", self.family))
            })
        };
        let family = match self.family.as_str() {
            "constant" => Family::Constant {
                c: self.c.unwrap_or(1.0),
            },
            "log_power" => Family::LogPower {
                a: need("a", self.a)?,
            },
            "power_law" => Family::PowerLaw {
                a: need("a", self.a)?,
            },
            "geometric" => Family::Geometric {
                r: need("r", self.r)?,
            },
            "exp_sqrt" => Family::ExpSqrt,
            "decay_power" => Family::DecayPower {
                a: need("a", self.a)?,
            },
            "custom" => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::invalid("table", "family `custom` needs --table"))?;
                let table = CustomTable::from_path(path)?;
                let table = match &self.extrapolate {
                    Some(rule) => CustomTable::new(table.values().to_vec(), parse_rule(rule)?)?,
                    None => table,
                };
                Family::Custom(table)
            }
            other => {
                return Err(Error::invalid(
                    "family",
                    format!("unknown family `{other}`"),
                ))
            }
        };
        SequenceSpec::new(family, self.tau0)
    }

    fn ensemble_config(&self, spec: SequenceSpec) -> EnsembleConfig {
        let mut cfg = EnsembleConfig::new(spec, self.t0, self.horizon, self.trials, self.seed);
        cfg.eps = self.eps;
        cfg.checkpoints = self.checkpoints.clone();
        cfg.monopoly_cut = self.monopoly_cut;
        cfg.workers = self.workers;
        cfg.dump_paths = self.dump_paths;
        cfg.dump_budget = self.dump_budget;
        cfg
    }

    /// Checks every field that does not need the run itself.
    fn validate(&self) -> Result<(), Error> {
        if self.format == Format::Csv && self.subcommand != Command::Ensemble {
            return Err(Error::invalid(
                "format",
                "csv output is only available for `ensemble`",
            ));
        }
        if matches!(self.subcommand, Command::Verify) {
            return Ok(());
        }
        let spec = self.spec()?;
        if matches!(self.subcommand, Command::Classify) {
            return Ok(());
        }
        if !(self.t0.is_finite() && (0.0..=spec.tau0()).contains(&self.t0)) {
            return Err(Error::invalid(
                "t0",
                format!("must lie in [0, tau0 = {}]", spec.tau0()),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        if let Some(len) = spec.max_index() {
            if self.horizon > len {
                return Err(Error::BeyondTable {
                    n: self.horizon,
                    len,
                });
            }
        }
        if self.subcommand == Command::Ensemble {
            self.ensemble_config(spec).validate()?;
        }
        Ok(())
    }
}

fn parse_list(v: &str) -> Result<Vec<u64>, Error> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| Error::Parse(format!("checkpoint {s:?}: {e}")))
        })
        .collect()
}

fn parse_rule(rule: &str) -> Result<Extrapolation, Error> {
    let text = format!("1 1\nextrapolate {rule}\n");
    Ok(CustomTable::parse(&text)?.extrapolation())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[derive(Serialize)]
struct RunProvenance {
    config: String,
    version: &'static str,
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    provenance: RunProvenance,
}

enum Failure {
    Config(Error),
    Io(Error),
    Runtime(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e),
            Error::InvalidParameter { .. }
            | Error::Parse(_)
            | Error::BeyondTable { .. }
            | Error::WindowOutOfRange { .. }
            | Error::DumpBudgetExceeded { .. }
            | Error::HypothesisUnmet(_)
            | Error::ZeroIndex => Failure::Config(e),
            _ => Failure::Runtime(e),
        }
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, Error> {
    let (cmd, flags) = match cli.command {
        Sub::Classify(f) => (Command::Classify, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Ensemble(f) => (Command::Ensemble, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let mut cfg = RunConfig::defaults(cmd);
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    cfg.apply_flags(flags)?;
    cfg.validate()?;
    Ok(cfg)
}

fn emit<T: Serialize>(cfg: &RunConfig, body: &T, stdout: &mut dyn Write) -> Result<(), Error> {
    let out = Output {
        body,
        provenance: RunProvenance {
            config: cfg.to_kv(),
            version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
        },
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_text(cfg, &text, stdout)
}

fn write_text(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cfg.subcommand {
        Command::Classify => emit(cfg, &classify(&cfg.spec()?), stdout)?,
        Command::Simulate => {
            let opts = SimOptions {
                record_path: cfg.dump_paths,
                ..Default::default()
            };
            let t = simulate_with(&cfg.spec()?, cfg.t0, cfg.horizon, cfg.seed, &opts)?;
            if let Some(path) = &t.path {
                write_path_csv(
                    path,
                    BufWriter::new(File::create(&cfg.paths_out).map_err(Error::from)?),
                )?;
            }
            emit(cfg, &t.summary, stdout)?;
        }
        Command::Ensemble => {
            let (report, paths) = run_ensemble_with_paths(&cfg.ensemble_config(cfg.spec()?))?;
            if cfg.dump_paths {
                let mut w = BufWriter::new(File::create(&cfg.paths_out).map_err(Error::from)?);
                writeln!(w, "trial,n,theta,i_n").map_err(Error::from)?;
                for (trial, rows) in &paths {
                    for row in rows {
                        let i_n = row.white.map_or(String::new(), |w| u8::from(w).to_string());
                        writeln!(w, "{trial},{},{},{i_n}", row.n, row.theta)
                            .map_err(Error::from)?;
                    }
                }
                w.flush().map_err(Error::from)?;
            }
            match cfg.format {
                Format::Json => emit(cfg, &report, stdout)?,
                Format::Csv => write_text(cfg, &report.to_csv(), stdout)?,
            }
        }
        Command::Verify => {
            let run = || {
                run_verify(VerifyOptions {
                    quick: cfg.quick,
                    seed: cfg.seed,
                })
            };
            let report = if cfg.workers == 0 {
                run()
            } else {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| Error::invalid("workers", e.to_string()))?
                    .install(run)
            };
            emit(cfg, &report, stdout)?;
            if !report.passed {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let msg = msg.trim_start_matches("error: ").trim_end();
            let _ = writeln!(stderr, "error[config]: {msg}");
            return 2;
        }
    };
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(stderr, "error[config]: {e}");
            return 2;
        }
    };
    match execute(&cfg, stdout) {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            let _ = writeln!(stderr, "error[config]: {e}");
            2
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error[io]: {e}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error[runtime]: {e}");
            1
        }
        Err(Failure::Verification) => {
            let _ = writeln!(stderr, "error[verify]: one or more checks failed");
            1
        }
    }
}
