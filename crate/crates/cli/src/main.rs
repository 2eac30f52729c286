mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, RunConfig};
use crate::error::Result;

fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig::resolve(cli.command.kind(), cli.command.args())?;
    let manifest = match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| commands::run(&config))?
        }
        None => commands::run(&config)?,
    };
    eprintln!(
        "{}: wrote {} to {}",
        manifest.command,
        manifest.outputs.join(", "),
        config.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
