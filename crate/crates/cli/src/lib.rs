//! Command-line front end for the `csa-pcs` experiment protocols.
//!
//! `csa-pcs <experiment> [--config FILE] [--set key=value]... [flags]`
//! resolves a flat key-value configuration (defaults < preset < file <
//! flags), runs the experiment and writes `<out>/<experiment>.csv` plus
//! `<out>/<experiment>.json`.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.

pub mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{run_command, Experiment, RunError, Written};
pub use config::{parse_pairs, resolve, ConfigError, RunConfig};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CSA_PCS_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "csa-pcs", version, about = "CSA-ES population control experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment.
    #[command(flatten)]
    Run(RunCommand),
    /// List every configuration key.
    Keys,
}

#[derive(Debug, Subcommand)]
pub enum RunCommand {
    /// One-generation oracle against the progress-rate formula.
    ProgressRate(RunArgs),
    /// Steady-state σ* ratio of a fixed-μ CSA on the sphere.
    Gamma(RunArgs),
    /// Generations to shrink R by a target ratio.
    GenCount(RunArgs),
    /// Deterministic μ up/down schedule on the sphere.
    Schedule(RunArgs),
    /// Fixed-μ traces of the population-control signals.
    Signals(RunArgs),
    /// μ-percentiles and evaluations on sphere and random objective.
    PcsTable(RunArgs),
    /// Rastrigin success rates and expected runtimes.
    Benchmark(RunArgs),
    /// PSA path norms in the sphere steady state.
    PsaSteady(RunArgs),
    /// Selected offspring medians across a μ-increase.
    MedianShift(RunArgs),
}

impl RunCommand {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            RunCommand::ProgressRate(a) => (Experiment::ProgressRate, a),
            RunCommand::Gamma(a) => (Experiment::Gamma, a),
            RunCommand::GenCount(a) => (Experiment::GenCount, a),
            RunCommand::Schedule(a) => (Experiment::Schedule, a),
            RunCommand::Signals(a) => (Experiment::Signals, a),
            RunCommand::PcsTable(a) => (Experiment::PcsTable, a),
            RunCommand::Benchmark(a) => (Experiment::Benchmark, a),
            RunCommand::PsaSteady(a) => (Experiment::PsaSteady, a),
            RunCommand::MedianShift(a) => (Experiment::MedianShift, a),
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` settings; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long = "N", alias = "n")]
    pub n: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub csa: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Write per-trial trace files.
    #[arg(long)]
    pub trace: bool,
    /// Worker threads (default: $CSA_PCS_WORKERS, else all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Do not print the written file paths.
    #[arg(long, short)]
    pub quiet: bool,
}

impl RunArgs {
    /// Merges the config file with the flags; flags win.
    pub fn merged(&self) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut map = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError {
                    problems: vec![format!("cannot read {}: {e}", p.display())],
                })?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        let mut problems = Vec::new();
        for kv in &self.set {
            match kv.split_once('=') {
                Some((k, v)) => {
                    map.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
                }
                None => problems.push(format!("--set expects key=value, got {kv:?}")),
            }
        }
        let flags = [
            ("n", &self.n),
            ("mu", &self.mu),
            ("csa", &self.csa),
            ("method", &self.method),
            ("preset", &self.preset),
            ("objective", &self.objective),
            ("suite", &self.suite),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if self.trace {
            map.insert("trace".to_string(), "true".to_string());
        }
        if problems.is_empty() {
            Ok(map)
        } else {
            Err(ConfigError { problems })
        }
    }
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, ConfigError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| ConfigError {
            problems: vec![format!("{WORKERS_ENV} must be a positive integer, got {v:?}")],
        }),
        Err(_) => Ok(None),
    }
}

/// Parses the arguments, runs and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (exp, args) = match cli.command {
        Command::Keys => {
            for (k, doc) in config::KEYS {
                println!("{k:<14} {doc}");
            }
            return EXIT_OK;
        }
        Command::Run(r) => r.split(),
    };
    let prepared = args
        .merged()
        .and_then(|m| resolve(&m))
        .and_then(|cfg| workers(args.workers).map(|w| (cfg, w)));
    let (cfg, workers) = match prepared {
        Ok(x) => x,
        Err(e) => {
            eprint!("{e}");
            return EXIT_CONFIG;
        }
    };
    match csa_pcs::experiments::with_workers(workers, || run_command(exp, &cfg)) {
        Ok(w) => {
            if !args.quiet {
                println!("{}", w.csv.display());
                println!("{}", w.json.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
