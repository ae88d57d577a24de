use std::process::ExitCode;

use clap::Parser;
use purikit_cli::args::Cli;

fn main() -> ExitCode {
    match purikit_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("purikit: {e}");
            e.to_exit()
        }
    }
}
