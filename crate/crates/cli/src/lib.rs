//! Command-line front end for the turbcloud experiments.
//!
//! Every subcommand resolves a flat config (file, then flags), runs one
//! experiment, writes its table as CSV or TSV and a `<out>.json` sidecar
//! with the resolved config and summary metrics.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "turbcloud", version, about = "Particle clouds in synthetic turbulence, mean-field limits and two-way coupled Burgers flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every experiment; not part of the recorded config.
#[derive(Debug, Clone, Args, Default)]
pub struct Common {
    /// Flat TOML config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample or evaluate a synthetic turbulent field.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Track a particle cloud through one field realization.
    Disperse(commands::disperse::DisperseArgs),
    /// Coupled interacting / mean-field systems over a range of N.
    Chaos(commands::chaos::ChaosArgs),
    /// One particle in a single travelling sine.
    Sine1d(commands::sine1d::Sine1dArgs),
    /// Two-way coupled Burgers gas and particles.
    Burgers(commands::burgers::BurgersArgs),
    /// Collect the sidecars of earlier runs into a claim manifest.
    Report(commands::report::ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    /// Write the modes of one realization.
    Sample(commands::field::FieldArgs),
    /// Write velocities on a uniform grid.
    Eval(commands::field::FieldArgs),
}

pub fn run_command(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Field(FieldCommand::Sample(a)) => commands::field::sample(a),
        Command::Field(FieldCommand::Eval(a)) => commands::field::eval(a),
        Command::Disperse(a) => commands::disperse::run(a),
        Command::Chaos(a) => commands::chaos::run(a),
        Command::Sine1d(a) => commands::sine1d::run(a),
        Command::Burgers(a) => commands::burgers::run(a),
        Command::Report(a) => commands::report::run(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::config(e.to_string()))?;
    run_command(cli)
}

/// Entry point of the binary: exit code 0 on success, 2 config, 3 stability,
/// 4 fit failure, 1 anything else.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
