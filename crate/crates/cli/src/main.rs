mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{load_config, Cli, Command};
use output::{CliError, CliResult};

/// Caps the rayon pool; 0 or unset keeps the default.
const THREADS_ENV: &str = "MATHIEU_LATTICE_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("{THREADS_ENV} must be a non-negative integer, got `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let config = cli.config.as_deref();
    match cli.command {
        Command::Spectrum(a) => commands::spectrum(&a.resolve(load_config(config)?), &cli.out_dir, config),
        Command::Propagate(a) => commands::propagate_cmd(&a.resolve(load_config(config)?)?, &cli.out_dir, config),
        Command::Bragg(a) => commands::bragg(&a.resolve(load_config(config)?), &cli.out_dir, config),
        Command::Mathieu(a) => commands::mathieu(&a.resolve(load_config(config)?), &cli.out_dir, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
