use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdqn_core::experiment::{self, ExperimentConfig};
use rdqn_core::verify::{self, Suite};
use rdqn_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

/// Return-based deep Q-learning experiments.
#[derive(Debug, Parser)]
#[command(name = "rdqn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every seed of one experiment config and write its CSVs.
    Run { config: PathBuf },
    /// Run a verification suite: oracle, bounds, gradients, envs or all.
    Verify { suite: String },
    /// Run several configs and print a summary table.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = fs::read_to_string(path)?;
    experiment::parse_config(&text)
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_validation() {
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn run(path: &Path) -> ExitCode {
    let config = match load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}:", path.display());
            return exit_for(&e);
        }
    };
    match experiment::run_experiment(&config) {
        Ok(out) => {
            print!("{}", experiment::render_table(std::slice::from_ref(&out.summary)));
            println!("wrote {}", out.output_dir.display());
            ExitCode::SUCCESS
        }
        // A failing trial is a runtime failure even if its cause was a bad value.
        Err(e @ Error::Trial { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(e) => exit_for(&e),
    }
}

fn verify_cmd(name: &str) -> ExitCode {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        match Suite::from_name(name) {
            Some(s) => vec![s],
            None => {
                eprintln!("error: unknown suite {name:?}; expected oracle, bounds, gradients, envs or all");
                return ExitCode::from(EXIT_VALIDATION);
            }
        }
    };
    let mut ok = true;
    for suite in suites {
        match verify::run_suite(suite) {
            Ok(report) => {
                println!("{report}");
                ok &= report.passed();
            }
            Err(e) => {
                eprintln!("error: {} suite could not run: {e}", suite.name());
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFICATION)
    }
}

fn compare(paths: &[PathBuf]) -> ExitCode {
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        match load(p) {
            Ok(c) => configs.push(c),
            Err(e) => {
                eprintln!("{}:", p.display());
                return exit_for(&e);
            }
        }
    }
    match experiment::compare(&configs) {
        Ok((_, table)) => {
            print!("{table}");
            ExitCode::SUCCESS
        }
        Err(e) => exit_for(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => run(&config),
        Command::Verify { suite } => verify_cmd(&suite),
        Command::Compare { configs } => compare(&configs),
    }
}
