use std::process::ExitCode;

use clap::Parser;
use lxray_cli::{configure_threads, exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
