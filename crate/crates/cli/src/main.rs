use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod config;
mod run;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Sample,
    Sweep,
    Deff,
    Phase,
    Tail,
    Mixing,
    Certify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Sample => "sample",
            Subcommand::Sweep => "sweep",
            Subcommand::Deff => "deff",
            Subcommand::Phase => "phase",
            Subcommand::Tail => "tail",
            Subcommand::Mixing => "mixing",
            Subcommand::Certify => "certify",
        }
    }
}

/// Monte Carlo and quadrature experiments for continuum percolation.
#[derive(Debug, Parser)]
#[command(name = "perc-lab", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// JSON run config, or a manifest from an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { run::EXIT_CONFIG } else { 0 });
        }
    };
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("perc-lab: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
