//! Order of the limits delta -> 0 and epsilon -> 0: gap between the micro
//! problem with the exact dissolution graph and the homogenized problem with
//! the regularized term along a diagonal in (epsilon, delta), plus a control
//! with delta frozen. Takes a few minutes; pass `quick` to use two levels.

use std::path::Path;

use crystal_homog::cli::{run, Command};
use crystal_homog::config::SimulationConfig;

fn main() -> crystal_homog::Result<()> {
    let mut overrides = Vec::new();
    if std::env::args().any(|a| a == "quick") {
        overrides.push("sweep.epsilons=[0.25, 0.125]".to_string());
        overrides.push("sweep.deltas=[0.1, 0.05]".to_string());
    }
    let cfg = SimulationConfig::parse_with(include_str!("configs/commute.toml"), &overrides)?;
    let out = Path::new("out/limit_order");
    let outcome = run(Command::Commute, &cfg, out)?;
    print!("{}", std::fs::read_to_string(out.join("report.txt")).unwrap_or_default());
    if !outcome.passed() {
        std::process::exit(4);
    }
    Ok(())
}
