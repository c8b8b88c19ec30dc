use std::process::ExitCode;

use clap::Parser;
use schur_core::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("schur: enumeration truncated by its budget");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("schur: {e}");
            ExitCode::FAILURE
        }
    }
}
