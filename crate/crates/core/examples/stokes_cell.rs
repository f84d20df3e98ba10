//! Stokes flow on the staggered grid: plane Poiseuille in a channel and
//! the periodic cell flow around a disk.

use crystal_homog::cell_solver::solve_stokes_cell;
use crystal_homog::geometry::{Inclusion, UnitCell};
use crystal_homog::mac::{MacGrid, MacSystem};

fn main() -> crystal_homog::Result<()> {
    let mu = 1.0;
    for n in [16, 32, 64] {
        let grid = MacGrid::channel(n);
        let sys = MacSystem::new(grid);
        let (q, _) = sys.steady_stokes(mu, [1.0, 0.0])?;
        let mean = sys.mean_velocity(&q)[0];
        println!(
            "channel {n:3}^2: mean velocity {mean:.8}  exact 1/(12 mu) = {:.8}  rel. error {:.2e}",
            1.0 / (12.0 * mu),
            (mean * 12.0 * mu - 1.0).abs()
        );
    }
    for res in [16, 32, 64] {
        let cell = UnitCell::new(res, Inclusion::Disk { radius: 0.25 })?;
        let flow = solve_stokes_cell(&cell, mu, [1.0, 0.0])?;
        println!(
            "disk cell {res:3}^2: q_bar = ({:.8}, {:+.1e})",
            flow.q_bar[0], flow.q_bar[1]
        );
    }
    Ok(())
}

