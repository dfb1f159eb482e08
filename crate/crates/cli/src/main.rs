use std::process::ExitCode;

use clap::Parser;
use trip_cli::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
