//! Command-line front end: `forward`, `reconstruct`, `sweep` and
//! `oracle-check` over a TOML run configuration.
//!
//! Exit status is 0 on success, 2 for configuration or input errors and 3
//! for numerical failures.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::reconstruct::CoefficientVariant;
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cavity", version, about = "Cavity reconstruction from boundary measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the measurement matrix and the outer tensor.
    Forward(Overrides),
    /// Recover the conformal map of the cavity.
    Reconstruct {
        #[command(flatten)]
        overrides: Overrides,
        /// Directory holding the output of `forward`; the forward problem is
        /// solved in-process when omitted.
        #[arg(long, value_name = "DIR")]
        measurement: Option<PathBuf>,
    },
    /// Reconstruct over a grid of centers and noise levels.
    Sweep(Overrides),
    /// Compare the inversion formula with independent oracles.
    OracleCheck(Overrides),
}

/// Flags that override the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "M")]
    pub order: Option<usize>,
    /// Center of the shifted polynomials.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, value_name = "DELTA")]
    pub noise: Option<f64>,
    /// Comma-separated seeds; `a..b` expands to a range.
    #[arg(long, value_name = "LIST")]
    pub seeds: Option<String>,
    #[arg(long, value_name = "literal|corrected")]
    pub variant: Option<CoefficientVariant>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Defaults, then the configuration file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.order {
            cfg.order = m;
        }
        if let Some(c) = &self.center {
            cfg.center = config::parse_center(c)?;
        }
        if let Some(d) = self.noise {
            cfg.noise = d;
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = config::parse_seeds(s)?;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Forward(o) => {
            let meta = commands::forward(&o.resolve()?)?;
            println!("forward: order {} scale {} hash {}", meta.order, meta.scale, meta.config_hash);
        }
        Command::Reconstruct { overrides, measurement } => {
            let cfg = overrides.resolve()?;
            let report = commands::reconstruct(&cfg, measurement.as_deref())?;
            let map = &report.result.map;
            println!(
                "reconstruct: a1 = {:.6}, a0 = {:.6}, {} negative coefficients",
                map.a1(),
                map.a0(),
                map.order()
            );
        }
        Command::Sweep(o) => {
            let s = commands::sweep(&o.resolve()?)?;
            println!("sweep: {} grid points, {} failed", s.points, s.failures);
        }
        Command::OracleCheck(o) => {
            let checks = commands::oracle_check(&o.resolve()?)?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
            for c in failed.iter().filter(|c| !c.is_diagnostic()) {
                println!("FAIL {} {}: error {:.3e} > {:.1e}", c.check, c.index, c.error, c.tolerance);
            }
            let worst = checks
                .iter()
                .filter(|c| c.is_diagnostic())
                .map(|c| c.error)
                .fold(0.0, f64::max);
            println!("BEM vs oracle moments: largest relative difference {worst:.3e}");
            if failed.iter().any(|c| !c.is_diagnostic()) {
                return Ok(EXIT_NUMERICAL);
            }
            println!("oracle-check: all oracle comparisons passed");
        }
    }
    Ok(EXIT_OK)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs them. Usage errors
/// exit with status 2.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}
