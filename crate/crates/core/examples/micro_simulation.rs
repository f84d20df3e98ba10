//! Resolved microscale run at epsilon = 1/8: diffusion of both species,
//! precipitation and dissolution on the inclusion boundaries, and the mass
//! budget along the way.

use crystal_homog::config::SimulationConfig;
use crystal_homog::micro::{mass_audit, MicroSolver};

fn main() -> crystal_homog::Result<()> {
    let cfg = SimulationConfig::parse(include_str!("configs/micro.toml"))?;
    let problem = cfg.scenario()?.micro_problem(cfg.geometry.epsilon, cfg.kinetics)?;
    let mut solver = MicroSolver::new(problem)?;
    let dom = solver.domain();
    println!(
        "grid {}^2, {} pore cells, {} interface faces, {} steps",
        dom.n(),
        dom.pore_mask().iter().filter(|&&p| p).count(),
        dom.gamma_faces().len(),
        solver.total_steps()
    );
    println!("{:>5} {:>7} {:>10} {:>10} {:>10} {:>10} {:>12}", "step", "t", "|u|", "|v|", "max w", "min w", "u + eps w");
    solver.run_with(|s| {
        let d = s.diagnostics();
        if d.step % 10 == 0 {
            println!(
                "{:5} {:7.4} {:10.6} {:10.6} {:10.6} {:10.6} {:12.8}",
                d.step, d.t, d.l2_u, d.l2_v, d.max_w, d.min_w, d.mass.combined_u
            );
        }
        Ok(())
    })?;
    let m = mass_audit(solver.state(), solver.domain());
    println!("final: mobile u {:.8}, mobile v {:.8}, mineral {:.8}", m.mobile_u, m.mobile_v, m.mineral);
    Ok(())
}
