mod args;
mod commands;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use graphw_core::Error;

use args::{Cli, Command};
use commands::UsageError;
use output::Sink;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_REFUSED: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::EnumerationRefused { .. }
            | Error::Configuration(_)
            | Error::InvalidParameter(_)
            | Error::InvalidProbability(_)
            | Error::InsufficientSample { .. },
        ) => EXIT_REFUSED,
        _ => EXIT_DATA,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let started = output::now();
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    let sink = Sink::new(cli.global.out.clone(), cli.global.manifest.clone());
    let seed = cli.global.seed;
    match &cli.command {
        Command::Sample(a) => commands::sample(a, seed, &sink)?,
        Command::Test(a) => commands::test(a, seed, &sink)?,
        Command::Power(a) => commands::power(a, seed, &sink)?,
        Command::DensitySweep(a) => commands::density_sweep(a, seed, &sink)?,
        Command::BuildGraphs(a) => commands::build(a, &sink)?,
        Command::Summary(a) => commands::summary(a, &sink)?,
    }
    sink.write_manifest(cli, started)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
