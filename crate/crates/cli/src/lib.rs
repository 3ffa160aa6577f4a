//! Front end of the `ans` binary: argument parsing, configuration, output
//! conventions and exit codes.

pub mod commands;
pub mod config;
pub mod data;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ans_core::AnsError;

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    BlowUp(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::BlowUp(_) => EXIT_BLOW_UP,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<AnsError> for CliError {
    fn from(e: AnsError) -> Self {
        match e {
            AnsError::BlowUp { .. } => CliError::BlowUp(e.to_string()),
            AnsError::Io(_) | AnsError::Format(_) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ans", version, about = "Anisotropic Navier-Stokes simulator and Besov toolkit")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Config file (`key = value` lines in `[section]`s).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir` and ANS_OUTPUT_DIR).
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Extra override `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate the equations and write diagnostics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial field file.
        #[arg(long)]
        field: Option<String>,
        /// Initial data spec, used when no field file is given.
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        dt: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<String>,
    },
    /// Simulate while tracking the vertical analyticity radius.
    Radius {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        data: Option<String>,
    },
    /// Anisotropic Besov norm of a saved field.
    Norms {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// Use the inhomogeneous norm.
        #[arg(long)]
        inhomogeneous: bool,
    },
    /// Randomized check of one estimate.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lemma: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        /// Grid as `nx,ny,nz`.
        #[arg(long)]
        resolution: Option<String>,
    },
    /// Write an initial field file.
    MakeData {
        #[command(flatten)]
        common: Common,
        /// Data spec, e.g. "analytic-vertical rho=1 amp=1e-3 seed=3".
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        /// Grid as `nx,ny,nz`.
        #[arg(long)]
        n: Option<String>,
        /// Box lengths as `l1,l2,l3`.
        #[arg(long)]
        lengths: Option<String>,
        /// Output file; relative paths are taken inside the output directory.
        #[arg(long)]
        out: Option<String>,
    },
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ans: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cli.command))
}
