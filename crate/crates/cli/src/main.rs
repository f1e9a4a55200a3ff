//! `aerosurvey`: command-line front end to `aerosurvey-core`.

mod commands;
mod error;
mod files;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{EmiCmd, GridCmd, PipelineArgs, QcCmd, SimCmd, VersionArgs, VibCmd};
use error::exit;

#[derive(Parser)]
#[command(name = "aerosurvey", version, about = "UAV geophysical survey engineering and QC toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accelerometer spectra and isolator ranking
    #[command(subcommand)]
    Vib(VibCmd),
    /// Buzz-test noise curve and threshold separation
    #[command(subcommand)]
    Emi(EmiCmd),
    /// Synthetic survey flight
    #[command(subcommand)]
    Sim(SimCmd),
    /// Survey data quality control
    #[command(subcommand)]
    Qc(QcCmd),
    /// Gridding and grayscale comparison
    #[command(subcommand)]
    Grid(GridCmd),
    /// Simulate, run every QC stage, grid and compare
    Pipeline(PipelineArgs),
    /// Tool and schema versions
    Version(VersionArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Vib(c) => commands::vib(c),
        Command::Emi(c) => commands::emi(c),
        Command::Sim(c) => commands::sim(c),
        Command::Qc(c) => commands::qc(c),
        Command::Grid(c) => commands::grid(c),
        Command::Pipeline(a) => commands::pipeline(a),
        Command::Version(a) => commands::version(a),
    };
    match result {
        Ok(true) => ExitCode::from(exit::OK),
        Ok(false) => ExitCode::from(exit::QC_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
