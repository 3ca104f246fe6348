mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;

/// Error carried to the process exit: code 2 for usage, 1 for data.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<walign::Error> for Failure {
    fn from(e: walign::Error) -> Self {
        match e {
            walign::Error::Config(_) => Failure::usage(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

fn run() -> Result<(), Failure> {
    let raw: Vec<String> = std::env::args().collect();
    let argv = config::merge_config_file(&raw)?;
    let matches = match config::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.format(&mut Cli::command()).exit());
    let common = cli.command.common();
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build_global()
        .map_err(|e| Failure::data(format!("cannot start worker pool: {e}")))?;
    let provenance = config::provenance(&matches, common.seed);
    commands::dispatch(&cli.command, &provenance)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("walign: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
