mod cli;
mod commands;
mod error;
mod format;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use crate::error::Status;

fn main() -> ExitCode {
    let cli = match cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed(msg)) => {
            eprintln!("mlexp: check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("mlexp: {e}");
            if e.exit_code() == 2 {
                eprintln!("Usage: mlexp <COMMAND> [OPTIONS]; see `mlexp --help`");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
