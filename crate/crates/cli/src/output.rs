use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use serde::Serialize;

use crate::config::RunConfig;

/// Why a command did not succeed, and the exit code that goes with it.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files.
    Usage(String),
    /// The command ran but a check did not pass.
    Check(String),
    /// A numerical routine returned an error.
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<tfe_core::Error> for Failure {
    fn from(e: tfe_core::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("output: {e}"))
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct Resolution {
    s_min: f64,
    s_max: f64,
    count: usize,
    h: f64,
    dt: f64,
    t_end: f64,
    stride: usize,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    resolution: Resolution,
    config: &'a RunConfig,
    report: &'a T,
}

/// Where reports go: text to stdout, or JSON to stdout with `--json`, and
/// JSON/CSV files under the output directory when one is set.
pub struct Sink {
    pub cfg: RunConfig,
    hash: String,
    json: bool,
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(cfg: RunConfig, json: bool) -> Result<Self, Failure> {
        let out = cfg.out.clone();
        if let Some(dir) = &out {
            fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        }
        Ok(Sink {
            hash: cfg.hash(),
            cfg,
            json,
            out,
        })
    }

    /// Human-readable line, suppressed under `--json`.
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.json {
            println!("{}", line.as_ref());
        }
    }

    pub fn report<T: Serialize>(&self, command: &str, report: &T) -> Outcome {
        let g = self.cfg.grid();
        let env = Envelope {
            command,
            config_hash: &self.hash,
            resolution: Resolution {
                s_min: g.s_min,
                s_max: g.s_max,
                count: g.count,
                h: g.h(),
                dt: self.cfg.dt,
                t_end: self.cfg.t_end,
                stride: self.cfg.stride,
            },
            config: &self.cfg,
            report,
        };
        let text = serde_json::to_string_pretty(&env).map_err(|e| Failure::Numerical(e.to_string()))?;
        if self.json {
            println!("{text}");
        }
        if let Some(dir) = &self.out {
            fs::write(dir.join(format!("{command}.json")), text + "\n")?;
        }
        Ok(())
    }

    /// Hands a buffered writer for `name` to `f`, if there is an output directory.
    pub fn csv(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
        if let Some(dir) = &self.out {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            f(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}
