//! Command-line front end: `report`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 entangled (only with
//! `--status-exit`), 64 usage error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;

use config::{load_config, Axis, ConfigValues, LengthScale};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_ENTANGLED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] disentangle::Error),
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_VERIFY_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "disentangle",
    version,
    about = "Thermal disentanglement of two free particles in a Gaussian state"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments, invariants, standard form and the Duan decision at one point.
    Report(CommonArgs),
    /// CSV of the invariants and Duan decision along one axis.
    Sweep(SweepArgs),
    /// Cross-check the closed forms against the Monte Carlo and quadrature oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Gaussian coefficient of x1^2 and x2^2 [default: 2]
    #[arg(long, allow_hyphen_values = true)]
    pub a11: Option<f64>,
    /// Gaussian cross coefficient [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub a12: Option<f64>,
    /// Temperature [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub temp: Option<f64>,
    /// Evolution time [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Particle mass [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Reduced Planck constant [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub hbar: Option<f64>,
    /// Boltzmann constant [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub kb: Option<f64>,
    /// Length scale L of the variance matrix, or "auto" for 1/sqrt(a11)
    #[arg(long, allow_hyphen_values = true)]
    pub length_scale: Option<LengthScale>,
    /// Monte Carlo seed [default: 24301]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count [default: 200000]
    #[arg(long)]
    pub samples: Option<u64>,
    /// Decision tolerance on the Duan value, also the closed-form bound in verify [default: 1e-9]
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance: Option<f64>,
    /// key=value file with the same keys as the long flags; flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit 2 when the state is entangled
    #[arg(long)]
    pub status_exit: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// temperature, a12 or time
    #[arg(long)]
    pub axis: Option<Axis>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run only the named check (repeatable); see --list-checks
    #[arg(long = "check")]
    pub checks: Vec<String>,
    /// Print the registered checks and exit
    #[arg(long)]
    pub list_checks: bool,
}

impl CommonArgs {
    fn values(&self) -> Result<ConfigValues, CliError> {
        let flags = ConfigValues {
            a11: self.a11,
            a12: self.a12,
            temp: self.temp,
            time: self.time,
            mass: self.mass,
            hbar: self.hbar,
            kb: self.kb,
            length_scale: self.length_scale,
            seed: self.seed,
            samples: self.samples,
            tolerance: self.tolerance,
            status_exit: self.status_exit.then_some(true),
            ..Default::default()
        };
        match &self.config {
            Some(path) => Ok(flags.over(load_config(path)?)),
            None => Ok(flags),
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Report(args) => {
            commands::cmd_report(&config::RunConfig::resolve(&args.values()?)?, out)
        }
        Command::Sweep(args) => {
            let file_and_flags = args.common.values()?;
            let values = ConfigValues {
                axis: args.axis,
                start: args.start,
                stop: args.stop,
                steps: args.steps,
                ..Default::default()
            }
            .over(file_and_flags);
            let cfg = config::RunConfig::resolve(&values)?;
            let spec = config::SweepSpec::resolve(&values)?;
            commands::cmd_sweep(&cfg, &spec, out)
        }
        Command::Verify(args) => {
            if args.list_checks {
                return commands::list_checks(out);
            }
            let cfg = config::RunConfig::resolve(&args.common.values()?)?;
            commands::cmd_verify(&cfg, &args.checks, out)
        }
    }
}
