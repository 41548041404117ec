use std::process::ExitCode;

use anisomin::cli::{self, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = cli::configure_threads().and_then(|()| cli::run(&args.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anisomin {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
