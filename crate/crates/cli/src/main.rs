mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use error::{CliError, EXIT_INVARIANT, EXIT_OK};

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::ListModels { json } => commands::list_models(json),
        Command::Simulate(a) => commands::simulate(&a),
        Command::TransformCheck(a) => commands::transform_check(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::MapTable(a) => commands::map_table_cmd(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => {
            let err = CliError::validation("usage", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.code as u8);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::from(EXIT_OK as u8),
        Ok(Outcome::InvariantFailure) => ExitCode::from(EXIT_INVARIANT as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
