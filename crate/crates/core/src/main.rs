use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crystal_homog::cli::{self, Command};
use crystal_homog::config::SimulationConfig;

#[derive(Parser)]
#[command(name = "crystal-homog", version, about = "Two-scale reactive transport with dissolution and precipitation")]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve the cell problems and write effective tensors
    Cell(Flags),
    /// Run the resolved microscale problem at the configured epsilon
    Micro(Flags),
    /// Run the homogenized problem
    Macro(Flags),
    /// Micro vs macro errors over a sequence of epsilons
    Sweep(Flags),
    /// Limit-order study in (epsilon, delta)
    Commute(Flags),
    /// Tabulate the reaction rate and the regularized dissolution term
    KineticsTable(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.directory` from the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value`, may be repeated
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Re-solve the cell flow problems as the mineral evolves
    #[arg(long)]
    time_dependent_cells: bool,
}

fn main() -> ExitCode {
    let (command, flags) = match Args::parse().command {
        Sub::Cell(f) => (Command::Cell, f),
        Sub::Micro(f) => (Command::Micro, f),
        Sub::Macro(f) => (Command::Macro, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Commute(f) => (Command::Commute, f),
        Sub::KineticsTable(f) => (Command::KineticsTable, f),
    };
    let mut overrides = flags.overrides;
    if flags.time_dependent_cells {
        overrides.push("macro.time_dependent_cells=true".into());
    }
    let result = SimulationConfig::load(&flags.config, &overrides).and_then(|cfg| {
        let out = flags.out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
        println!("{command}: writing to {}", out.display());
        cli::run(command, &cfg, &out)
    });
    match &result {
        Ok(outcome) => {
            for (name, ok) in &outcome.checks {
                println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            println!("wrote {} files", outcome.files.len());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(cli::exit_code(&result) as u8)
}
