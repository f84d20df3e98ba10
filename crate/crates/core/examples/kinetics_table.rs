//! Langmuir precipitation rate and the regularized dissolution term.
//! Writes `kinetics.csv` through the `kinetics-table` driver.

use std::path::Path;

use crystal_homog::cli::{run, Command};
use crystal_homog::config::SimulationConfig;
use crystal_homog::kinetics::{langmuir_rate, psi_delta, psi_multivalued, DissolutionMode, KineticsParams};

fn main() -> crystal_homog::Result<()> {
    let p = KineticsParams::new(2.0, 1.0, 1.0, 1.0, 0.1, DissolutionMode::Regularized)?;
    println!("k = {}  bound k/4 = {}", p.k(), p.rate_bound());
    for (u, v) in [(0.0, 1.0), (1.0, 1.0), (0.5, 2.0), (4.0, 4.0)] {
        println!("  R({u}, {v}) = {:.6}", langmuir_rate(u, v, &p));
    }
    println!("psi_delta and the multivalued graph at delta = {}:", p.delta);
    for w in [-1.0, 0.0, 0.05, 0.1, 0.2] {
        let g = psi_multivalued(w);
        println!("  w = {w:5}: psi_delta = {:.3}  psi(w) = [{}, {}]", psi_delta(w, p.delta), g.lo, g.hi);
    }

    let text = include_str!("configs/kinetics_table.toml");
    let cfg = SimulationConfig::parse(text)?;
    let out = Path::new("out/kinetics_table");
    let outcome = run(Command::KineticsTable, &cfg, out)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
