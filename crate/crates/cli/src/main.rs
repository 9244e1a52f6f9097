//! `lie-poisson <command> --config <path> [--out <dir>]`
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 configuration
//! error (nothing written), 3 numerical abort.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lie_poisson_core::Error;

use crate::config::{Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "lie-poisson", version, about = "Lie-Poisson experiment runner and invariant verifier")]
struct Cli {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Directory that `output_path` is resolved against.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match RunConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.command != cli.command {
        eprintln!("error: config is for {:?}, but {:?} was requested", cfg.command, cli.command);
        return ExitCode::from(EXIT_CONFIG);
    }
    let plan = match cfg.plan() {
        Ok(plan) => plan,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match commands::run(&cfg, plan) {
        Ok(o) => o,
        Err(e) => {
            match &e {
                Error::NonFiniteState { .. } | Error::Overflow(_) => eprintln!("numerical abort: {e}"),
                _ => eprintln!("aborted: {e}"),
            }
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    for (rel, bytes) in &outcome.files {
        let path = cli.out.join(rel);
        let written = path
            .parent()
            .map_or(Ok(()), std::fs::create_dir_all)
            .and_then(|_| std::fs::write(&path, bytes));
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
        println!("wrote {}", path.display());
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("some checks failed");
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
