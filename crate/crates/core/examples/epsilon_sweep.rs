//! Micro vs homogenized error for epsilon = 1/4, 1/8, 1/16 on the disk
//! fixture. Writes `errors.csv` and `report.txt`; takes about a minute.

use std::path::Path;

use crystal_homog::cli::{run, Command};
use crystal_homog::config::SimulationConfig;

fn main() -> crystal_homog::Result<()> {
    let cfg = SimulationConfig::parse(include_str!("configs/sweep.toml"))?;
    let out = Path::new("out/epsilon_sweep");
    let outcome = run(Command::Sweep, &cfg, out)?;
    print!("{}", std::fs::read_to_string(out.join("report.txt")).unwrap_or_default());
    if !outcome.passed() {
        std::process::exit(4);
    }
    Ok(())
}
