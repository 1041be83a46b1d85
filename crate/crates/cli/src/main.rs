//! `tfe`: drives the verification suites of tfe-core and writes their reports.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::{Failure, Sink};
use tfe_core::exec::{self, Execution};

#[derive(Parser)]
#[command(name = "tfe", version, about = "Thin-film equation verification laboratory")]
struct Cli {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON reports and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n0: Option<u32>,
    /// Initial-data amplitude.
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Print the JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Run batches on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity suite: roots, operator identities, slot-sum, commutators, Hardy and coercivity benches.
    Verify {
        /// Replace β in the root check (fault injection).
        #[arg(long, hide = true)]
        inject_beta: Option<f64>,
    },
    /// Lattice, index sets, weights, ℓ/k tables and the schedule conditions.
    Schedule,
    /// Linear solve of the bump data, or the manufactured-solution study.
    Linear {
        #[arg(long)]
        mms: bool,
    },
    /// Picard solve with a-priori, coefficient and decay reports.
    Nonlinear {
        /// ε values, e.g. "eps=1e-4,1e-3,1e-2".
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
    },
    /// Fit and transport the expansion of a physical profile (CSV z,h).
    Expansion {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Decay slopes of the expansion coefficients and the contact-line law.
    Decay,
}

#[derive(Clone, Debug)]
struct Sweep(Vec<f64>);

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let list = s.strip_prefix("eps=").ok_or("expected eps=v1,v2,...")?;
    let v: Vec<f64> = list
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err("sweep values must be finite".into());
    }
    Ok(Sweep(v))
}

fn configure(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.n0 {
        if v != cfg.n0 {
            cfg.delta = None;
        }
        cfg.n0 = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    cfg.resolve().map_err(Failure::Usage)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.sequential {
        exec::set_mode(Execution::Sequential);
    }
    let sink = Sink::new(configure(&cli)?, cli.json)?;
    match cli.command {
        Command::Verify { inject_beta } => commands::verify::run(&sink, inject_beta),
        Command::Schedule => commands::schedule::run(&sink),
        Command::Linear { mms } => commands::runs::linear(&sink, mms),
        Command::Nonlinear { sweep } => commands::runs::nonlinear(&sink, sweep.map(|s| s.0)),
        Command::Expansion { profile } => commands::expansion::run(&sink, &profile),
        Command::Decay => commands::runs::decay(&sink),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tfe: {}", f.message());
            f.code()
        }
    }
}
