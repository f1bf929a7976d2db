mod batch;
mod cli;
mod commands;
mod error;
mod logging;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use error::{CliError, CliResult};

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Calibrate(a) => commands::calibrate::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Deglare(a) => commands::deglare::run(a),
        Command::Encode(a) => commands::encode::run(a),
        Command::Score(a) => commands::score::run(a),
        Command::Synth(a) => commands::synth::run(a, cli.seed),
        Command::Merge(a) => commands::merge::run(a),
        Command::Pipeline(a) => commands::pipeline::run(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    logging::init(cli.log_level);
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", CliError::Config(format!("cannot start {n} workers: {e}")).to_json());
            return ExitCode::FAILURE;
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
