use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = blurcap::cli::Cli::parse();
    match blurcap::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
