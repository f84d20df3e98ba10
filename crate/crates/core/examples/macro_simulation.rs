//! Homogenized problem for the disk fixture, first with the regularized
//! dissolution term and then with the exact graph.

use crystal_homog::config::SimulationConfig;
use crystal_homog::kinetics::DissolutionMode;
use crystal_homog::macro_solver::MacroSolver;

fn main() -> crystal_homog::Result<()> {
    let cfg = SimulationConfig::parse(include_str!("configs/macro.toml"))?;
    let scenario = cfg.scenario()?;
    let coefficients = scenario.effective()?;
    let e = &coefficients[0];
    println!(
        "A = [[{:.6}, {:.1e}], [{:.1e}, {:.6}]]  B11 = {:.6}  porosity {:.6}  |Gamma|/|Y^p| = {:.6}",
        e.a[0][0],
        e.a[0][1],
        e.a[1][0],
        e.a[1][1],
        e.b[0][0],
        e.porosity,
        e.surface_ratio()
    );
    for mode in [DissolutionMode::Regularized, DissolutionMode::Event] {
        let problem = scenario.macro_problem_with(cfg.kinetics.with_mode(mode), coefficients.clone())?;
        let mut solver = MacroSolver::new(problem)?;
        println!("{mode}:");
        solver.run_with(|s| {
            let d = s.diagnostics();
            if d.step % 25 == 0 {
                println!(
                    "  t = {:.4}  |u| = {:.6}  |v| = {:.6}  |w| = {:.6}  max |P| = {:.6}  min w = {:.6}",
                    d.t, d.l2_u, d.l2_v, d.l2_w, d.max_abs_p, d.min_w
                );
            }
            Ok(())
        })?;
    }
    Ok(())
}
