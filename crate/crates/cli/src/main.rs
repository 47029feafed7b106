mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::InvariantError;
use config::{ConfigError, Needs};
use output::{RunManifest, Sink};

fn run(cli: Cli) -> anyhow::Result<Sink> {
    let common = cli.command.common();
    let file = match &common.config {
        Some(path) => config::load(path)?,
        None => config::Config::default(),
    };
    let name = cli.command.name();
    match &cli.command {
        Command::Estimate(_) => {
            let cfg = config::resolve(common, file, Needs::Estimate);
            commands::estimate(&cfg, RunManifest::new(name, &cfg))
        }
        Command::Simulate(_) => {
            let cfg = config::resolve(common, file, Needs::Simulate);
            commands::simulate(&cfg, RunManifest::new(name, &cfg))
        }
        Command::Tables(args) => {
            let mut cfg = config::resolve(common, file, Needs::Tables);
            let (tables, _) = commands::tables(args, &mut cfg)?;
            commands::write_tables(&tables, &cfg, RunManifest::new(name, &cfg))
        }
        Command::Compare(args) => {
            let mut cfg = config::resolve(common, file, Needs::Compare);
            let names = commands::compare_names(args, &mut cfg)?;
            let entries = commands::compare(&names, &cfg)?;
            commands::write_compare(&entries, &cfg, RunManifest::new(name, &cfg))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(sink) => {
            for path in &sink.written {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<InvariantError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
