use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qrelay::experiment::{read_config, render_report, run, Command, RunError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Polarize,
    Sets,
    Capacity,
    RelaySim,
    Superactivate,
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Polarize => Command::Polarize,
            Cmd::Sets => Command::Sets,
            Cmd::Capacity => Command::Capacity,
            Cmd::RelaySim => Command::RelaySim,
            Cmd::Superactivate => Command::Superactivate,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Polar-code and relay-channel experiments driven by a JSON config.
///
/// Set QRELAY_THREADS to fix the worker count. Exit status is 2 for
/// configuration errors and 3 for failures during the run.
#[derive(Debug, Parser)]
#[command(name = "qrelay", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("QRELAY_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("QRELAY_THREADS = {v:?} is not a positive integer")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);

    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut config = match read_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(existing) = config.command {
        if existing != command {
            eprintln!(
                "error: config is for `{}` but `{}` was requested",
                existing.name(),
                command.name()
            );
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    config.command = Some(command);
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    let manifest = match run(&config, threads) {
        Ok(m) => m,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    match render_report(&manifest) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
