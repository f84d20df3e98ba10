//! Effective tensors from the periodic cell problems: the laminate oracle,
//! a disk inclusion under grid refinement, and the separable case.

use crystal_homog::cell_solver::{assemble_effective, symmetric_eigenvalues, CellDiffusivity};
use crystal_homog::data::CellProfile;
use crystal_homog::geometry::{Inclusion, UnitCell};

fn main() -> crystal_homog::Result<()> {
    let lam = UnitCell::new(128, Inclusion::None)?;
    let d = CellDiffusivity::from_profile(&lam, &CellProfile::Laminate { d1: 1.0, d2: 4.0 }, 1.0)?;
    let (eff, _) = assemble_effective(&lam, &d, &d, None)?;
    println!("laminate (1, 4): a11 = {:.12}  a22 = {:.12}", eff.a[0][0], eff.a[1][1]);
    println!("  harmonic mean 1.6, arithmetic mean 2.5");

    println!("disk r = 0.25, D = 1:");
    for res in [16, 32, 64, 128] {
        let cell = UnitCell::new(res, Inclusion::Disk { radius: 0.25 })?;
        let one = CellDiffusivity::constant(&cell, 1.0)?;
        let (eff, _) = assemble_effective(&cell, &one, &one, None)?;
        let (l1, l2) = symmetric_eigenvalues(&eff.a);
        println!(
            "  res {res:4}: a11 = {:.8}  a12 = {:+.1e}  eigenvalues ({l1:.8}, {l2:.8})  porosity {:.6}",
            eff.a[0][0], eff.a[0][1], eff.porosity
        );
    }

    let cell = UnitCell::new(32, Inclusion::Square { side: 0.5 })?;
    let c = CellProfile::Cosine { a: 1.0, b: 0.3 };
    let base = CellDiffusivity::from_profile(&cell, &c, 1.0)?;
    let (e1, _) = assemble_effective(&cell, &base, &base, None)?;
    let scaled = CellDiffusivity::from_profile(&cell, &c, 2.5)?;
    let (e2, _) = assemble_effective(&cell, &scaled, &scaled, None)?;
    println!(
        "separable D = m c(y): A(m = 2.5) / A(m = 1) = {:.12}",
        e2.a[0][0] / e1.a[0][0]
    );
    Ok(())
}
