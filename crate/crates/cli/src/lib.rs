//! Experiment runner behind the `purikit` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::time::Instant;

pub use error::CliError;

use args::{Cli, Command};
use output::{emit, ExperimentConfig};

/// Validates, runs and writes one invocation.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.global.jobs == Some(0) {
        return Err(error::validation("--jobs must be positive"));
    }
    if !(cli.global.tol > 0.0 && cli.global.tol < 1.0) {
        return Err(error::validation("--tol must lie in (0, 1)"));
    }
    cli.command.validate()?;
    let config = ExperimentConfig::new(cli.command.clone(), &cli.global);
    let pool = commands::pool(cli.global.jobs)?;
    let start = Instant::now();
    let g = &cli.global;
    pool.install(|| match &cli.command {
        Command::Counterexample(a) => emit(&config, &commands::counterexample::run(a, g)?, start.elapsed()),
        Command::BenchDistributions(a) => emit(&config, &commands::bench::run(a, g)?, start.elapsed()),
        Command::PolyExport(a) => emit(&config, &commands::poly::run(a, g)?, start.elapsed()),
        Command::CompareMethods(a) => emit(&config, &commands::compare::run(a, g)?, start.elapsed()),
        Command::Purify(a) => emit(&config, &commands::purify::run(a, g)?, start.elapsed()),
    })
}
