//! `fermi-ot`: flows, distances, geodesics, Hessian sweeps and property
//! checks for fermionic density matrices, with CSV and JSON output.
//!
//! Exit codes: 0 success, 1 failed verification or computation, 2 usage or input error.

mod commands;
mod config;
mod error;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};
use error::CliError;

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    match cfg.command {
        Command::Flow => commands::flow(&cfg)?,
        Command::Distance => commands::distance_cmd(&cfg)?,
        Command::Geodesic => commands::geodesic(&cfg)?,
        Command::Hessian => commands::hessian(&cfg)?,
        Command::SweepEssential => commands::sweep_essential(&cfg)?,
        Command::Verify => {
            if !verify::run(&cfg)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
