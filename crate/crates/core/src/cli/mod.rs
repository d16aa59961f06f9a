//! Command-line front end for the `spade` binary.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data-format or
//! I/O error, 3 numerical failure.

mod commands;
mod config;
mod counts;
mod table;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{cmd_compare, cmd_crlb_curves, cmd_estimate, cmd_matrices, cmd_simulate};
pub use config::{parse_config, Convention, RunConfig, SeparationGrid, SourceSpec};
pub use counts::{CountRow, CountsFile};
pub use table::Table;

/// Default grid for `matrices`: 0 to 0.93 in quarter steps.
pub const MATRICES_GRID: (f64, f64, f64) = (0.0, 0.93, 0.2325);
/// Default grid for every other subcommand: 0 to 1.35 in steps of 0.0465.
pub const EXPERIMENT_GRID: (f64, f64, f64) = (0.0, 1.35, 0.0465);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn from_core(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::TruncationCap { .. } | Error::QuadratureOrder { .. } => {
                CliError::Usage(e.to_string())
            }
            Error::Parse(_) | Error::ShapeMismatch { .. } => CliError::Data(e.to_string()),
            Error::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spade", version, about = "Bi-photon mode-sorting separation estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-photon bound and total information against the Schmidt number.
    CrlbCurves {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated Schmidt numbers.
        #[arg(long, value_delimiter = ',')]
        k_values: Option<Vec<f64>>,
    },
    /// Theory coincidence matrices over the separation grid.
    Matrices {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Maximum-likelihood separation estimates from counts files.
    Estimate {
        #[command(flatten)]
        run: RunArgs,
        /// Fit a per-entry detector calibration on the labeled files first.
        #[arg(long)]
        calibrate: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Monte-Carlo comparison of mode sorting and direct imaging.
    Compare {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write sampled, labeled counts files over the separation grid.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Per-entry gain of the simulated detector.
        #[arg(long)]
        alpha: Option<f64>,
        /// Per-entry background of the simulated detector.
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub pump_waist_um: Option<f64>,
    #[arg(long)]
    pub crystal_length_mm: Option<f64>,
    #[arg(long)]
    pub pump_wavelength_nm: Option<f64>,
    #[arg(long)]
    pub schmidt_waist_um: Option<f64>,
    /// Highest Hermite-Gauss index along x.
    #[arg(long)]
    pub modes_k: Option<usize>,
    /// Highest Hermite-Gauss index along y.
    #[arg(long)]
    pub modes_l: Option<usize>,
    #[arg(long)]
    pub sep_start: Option<f64>,
    #[arg(long)]
    pub sep_stop: Option<f64>,
    #[arg(long)]
    pub sep_step: Option<f64>,
    /// `d` for per-arm shift or `delta` for total separation.
    #[arg(long)]
    pub sep_convention: Option<String>,
    #[arg(long)]
    pub photons: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("pump_waist_um", self.pump_waist_um.map(|v| v.to_string()));
        put("crystal_length_mm", self.crystal_length_mm.map(|v| v.to_string()));
        put("pump_wavelength_nm", self.pump_wavelength_nm.map(|v| v.to_string()));
        put("schmidt_waist_um", self.schmidt_waist_um.map(|v| v.to_string()));
        put("modes_k", self.modes_k.map(|v| v.to_string()));
        put("modes_l", self.modes_l.map(|v| v.to_string()));
        put("sep_start", self.sep_start.map(|v| v.to_string()));
        put("sep_stop", self.sep_stop.map(|v| v.to_string()));
        put("sep_step", self.sep_step.map(|v| v.to_string()));
        put("sep_convention", self.sep_convention.clone());
        put("photons", self.photons.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("out_dir", self.out_dir.as_ref().map(|p| p.display().to_string()));
        m
    }

    pub fn resolve(&self, extra: BTreeMap<String, String>, grid: (f64, f64, f64)) -> Result<RunConfig, CliError> {
        let mut flags = self.to_map();
        flags.extend(extra);
        RunConfig::resolve(&flags, self.config.as_deref(), grid)
    }
}

/// Runs one parsed command, returning the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut extra = BTreeMap::new();
    match &cli.command {
        Command::CrlbCurves { run, k_values } => {
            if let Some(ks) = k_values {
                let list: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                extra.insert("k_values".to_string(), list.join(","));
            }
            cmd_crlb_curves(&run.resolve(extra, EXPERIMENT_GRID)?)
        }
        Command::Matrices { run } => cmd_matrices(&run.resolve(extra, MATRICES_GRID)?),
        Command::Estimate { run, calibrate, files } => {
            if *calibrate {
                extra.insert("calibrate".to_string(), "true".to_string());
            }
            cmd_estimate(&run.resolve(extra, EXPERIMENT_GRID)?, files)
        }
        Command::Compare { run } => cmd_compare(&run.resolve(extra, EXPERIMENT_GRID)?),
        Command::Simulate { run, alpha, beta } => {
            if let Some(a) = alpha {
                extra.insert("alpha".to_string(), a.to_string());
            }
            if let Some(b) = beta {
                extra.insert("beta".to_string(), b.to_string());
            }
            cmd_simulate(&run.resolve(extra, EXPERIMENT_GRID)?)
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
