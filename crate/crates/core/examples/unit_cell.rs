//! Builds disk and square unit cells, tiles them over the unit square and
//! prints the discrete measures.

use crystal_homog::geometry::{Inclusion, PerforatedDomain, UnitCell};

fn main() -> crystal_homog::Result<()> {
    for inclusion in [
        Inclusion::Square { side: 0.5 },
        Inclusion::Disk { radius: 0.25 },
    ] {
        println!("{inclusion}");
        for res in [16, 32, 64, 128] {
            let cell = UnitCell::new(res, inclusion)?;
            println!(
                "  resolution {res:4}: |Y^p| = {:.6}  |Gamma| = {:.6}  boundary faces = {}",
                cell.pore_volume(),
                cell.boundary_measure(),
                cell.boundary_faces().len()
            );
        }
        let cell = UnitCell::new(16, inclusion)?;
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let dom = PerforatedDomain::new(&cell, eps, 1.0)?;
            println!(
                "  eps = {eps:<7} grid {:4}^2  inclusions {:4}  pore fraction {:.6}  eps*|Gamma_eps| = {:.6}",
                dom.n(),
                dom.inclusion_count(),
                dom.pore_fraction(),
                dom.eps_gamma_length()
            );
        }
    }
    println!("exact disk area fraction: {:.6}", 1.0 - std::f64::consts::PI / 16.0);
    Ok(())
}
