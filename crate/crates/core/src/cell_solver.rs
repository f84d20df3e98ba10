//! Periodic cell problems and effective coefficients.
//!
//! Correctors are cell-centred finite volumes on the pore cells of a
//! [`UnitCell`] with harmonic-mean face diffusivities, periodic wrap-around
//! and zero flux through pore/solid faces. The cell flow is the steady
//! Stokes solution on the periodic MAC grid.

use rayon::prelude::*;

use crate::data::{CellProfile, Diffusivity};
use crate::error::{Error, Result};
use crate::geometry::UnitCell;
use crate::linalg::{pcg, CsrMatrix, SolverOptions};
use crate::mac::{FaceField, MacGrid, MacSystem};

/// Relative residual used for all corrector solves.
pub const CORRECTOR_TOL: f64 = 1e-12;

/// Diffusivity values per cell of the unit-cell grid (solid entries unused).
#[derive(Debug, Clone, PartialEq)]
pub struct CellDiffusivity {
    values: Vec<f64>,
}

impl CellDiffusivity {
    pub fn from_values(cell: &UnitCell, values: Vec<f64>) -> Result<Self> {
        let n = cell.resolution();
        if values.len() != n * n {
            return Err(Error::Argument(format!(
                "diffusivity has {} values, grid has {}",
                values.len(),
                n * n
            )));
        }
        for (c, &v) in values.iter().enumerate() {
            if cell.pore_mask()[c] && !(v.is_finite() && v > 0.0) {
                return Err(Error::Argument(format!(
                    "diffusivity must be positive and finite, got {v} in cell {c}"
                )));
            }
        }
        Ok(CellDiffusivity { values })
    }

    /// `factor · c(y)` sampled at cell centres.
    pub fn from_profile(cell: &UnitCell, profile: &CellProfile, factor: f64) -> Result<Self> {
        let n = cell.resolution();
        let values = (0..n * n).map(|c| factor * profile.eval(cell.center(c))).collect();
        Self::from_values(cell, values)
    }

    pub fn constant(cell: &UnitCell, d: f64) -> Result<Self> {
        Self::from_profile(cell, &CellProfile::Const(d), 1.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest and largest value over the pore cells.
    pub fn bounds(&self, cell: &UnitCell) -> (f64, f64) {
        self.values
            .iter()
            .zip(cell.pore_mask())
            .filter(|(_, &p)| p)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Checks `alpha <= D <= m` on the pore cells.
    pub fn check_bounds(&self, cell: &UnitCell, alpha: f64, m: f64) -> Result<()> {
        let (lo, hi) = self.bounds(cell);
        if lo < alpha || hi > m {
            return Err(Error::Argument(format!(
                "diffusivity range [{lo}, {hi}] not within [{alpha}, {m}]"
            )));
        }
        Ok(())
    }

    /// Values on the 90° counter-clockwise rotated grid.
    pub fn rotated(&self, cell: &UnitCell) -> Self {
        CellDiffusivity {
            values: crate::geometry::rotate_grid(cell.resolution(), &self.values),
        }
    }
}

/// Interior pore–pore face, oriented from `west/south` cell `a` to `b`.
#[derive(Debug, Clone, Copy)]
struct Face {
    a: usize,
    b: usize,
    axis: usize,
    /// Index into the matching velocity array of a [`FaceField`].
    mac: usize,
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Assembled corrector operator for one cell and one diffusivity.
#[derive(Debug, Clone)]
pub struct CorrectorSystem {
    cell: UnitCell,
    faces: Vec<Face>,
    face_d: Vec<f64>,
    cell_d: Vec<f64>,
    dof: Vec<Option<usize>>,
    cells: Vec<usize>,
    matrix: CsrMatrix,
    diag: Vec<f64>,
}

impl CorrectorSystem {
    pub fn new(cell: &UnitCell, d: &CellDiffusivity) -> Self {
        let n = cell.resolution();
        let mut dof = vec![None; n * n];
        let mut cells = Vec::new();
        for c in 0..n * n {
            if cell.pore_mask()[c] {
                dof[c] = Some(cells.len());
                cells.push(c);
            }
        }
        let mut faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                if !cell.pore_mask()[c] {
                    continue;
                }
                let east = j * n + (i + 1) % n;
                if cell.pore_mask()[east] {
                    faces.push(Face {
                        a: c,
                        b: east,
                        axis: 0,
                        mac: j * n + (i + 1) % n,
                    });
                }
                let north = ((j + 1) % n) * n + i;
                if cell.pore_mask()[north] {
                    faces.push(Face {
                        a: c,
                        b: north,
                        axis: 1,
                        mac: ((j + 1) % n) * n + i,
                    });
                }
            }
        }
        let v = d.values();
        let face_d: Vec<f64> = faces.iter().map(|f| harmonic(v[f.a], v[f.b])).collect();
        let mut trip = Vec::with_capacity(4 * faces.len());
        for (f, &df) in faces.iter().zip(&face_d) {
            let (ra, rb) = (dof[f.a].unwrap(), dof[f.b].unwrap());
            trip.push((ra, ra, df));
            trip.push((rb, rb, df));
            trip.push((ra, rb, -df));
            trip.push((rb, ra, -df));
        }
        let matrix = CsrMatrix::from_triplets(cells.len(), trip);
        let diag = matrix.diagonal();
        CorrectorSystem {
            cell: cell.clone(),
            faces,
            face_d,
            cell_d: v.to_vec(),
            dof,
            cells,
            matrix,
            diag,
        }
    }

    fn gather(&self, field: &[f64]) -> Vec<f64> {
        self.cells.iter().map(|&c| field[c]).collect()
    }

    /// Solves `Σ_f D_f ((k_b − k_a)/Δ + g_f) = 0` per cell for the zero-mean
    /// periodic `k`, where `g_f` is the forcing along each face normal.
    fn solve_forced(&self, forcing: &[f64], context: &str) -> Result<Vec<f64>> {
        let h = self.cell.spacing();
        let mut rhs = vec![0.0; self.cells.len()];
        for ((f, &df), &g) in self.faces.iter().zip(&self.face_d).zip(forcing) {
            let flux = df * h * g;
            rhs[self.dof[f.a].unwrap()] += flux;
            rhs[self.dof[f.b].unwrap()] -= flux;
        }
        let mut k = vec![0.0; self.cells.len()];
        if rhs.iter().any(|&r| r != 0.0) {
            pcg(
                &self.matrix,
                &rhs,
                &mut k,
                Some(&self.diag),
                SolverOptions::default().tol(CORRECTOR_TOL).zero_mean(true),
                context,
            )?;
        }
        let n = self.cell.resolution();
        let mut out = vec![0.0; n * n];
        for (&c, &x) in self.cells.iter().zip(&k) {
            out[c] = x;
        }
        Ok(out)
    }

    fn velocity_on(&self, f: &Face, q: &FaceField) -> f64 {
        if f.axis == 0 {
            q.u[f.mac]
        } else {
            q.v[f.mac]
        }
    }

    /// Corrector `k_j` (`j ∈ {0, 1}`). With `q` and `k0` absent this is the
    /// classical corrector; supplying them adds `∇k₀ − q` to the forcing.
    pub fn corrector(&self, j: usize, q: Option<&FaceField>, k0: Option<&[f64]>) -> Result<Vec<f64>> {
        if j > 1 {
            return Err(Error::Argument(format!("corrector direction {j} out of range")));
        }
        let h = self.cell.spacing();
        let forcing: Vec<f64> = self
            .faces
            .iter()
            .map(|f| {
                let mut g = if f.axis == j { 1.0 } else { 0.0 };
                if let Some(k0) = k0 {
                    g += (k0[f.b] - k0[f.a]) / h;
                }
                if let Some(q) = q {
                    g -= self.velocity_on(f, q);
                }
                g
            })
            .collect();
        self.solve_forced(&forcing, "cell corrector")
    }

    /// Advective corrector: `−div(D(∇k₀ − q)) = 0`.
    pub fn advective_corrector(&self, q: &FaceField) -> Result<Vec<f64>> {
        let forcing: Vec<f64> = self.faces.iter().map(|f| -self.velocity_on(f, q)).collect();
        self.solve_forced(&forcing, "advective corrector")
    }

    /// Largest net face flux of `D(∇k + e_j)` in any pore cell, relative to
    /// the diffusivity scale.
    pub fn flux_residual(&self, k: &[f64], j: usize) -> f64 {
        let h = self.cell.spacing();
        let mut net = vec![0.0; self.cells.len()];
        for (f, &df) in self.faces.iter().zip(&self.face_d) {
            let g = if f.axis == j { 1.0 } else { 0.0 };
            let flux = df * ((k[f.b] - k[f.a]) / h + g);
            net[self.dof[f.a].unwrap()] += flux;
            net[self.dof[f.b].unwrap()] -= flux;
        }
        let scale = self.face_d.iter().fold(0.0f64, |m, &d| m.max(d));
        net.iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale
    }

    /// `(1/|Y^p|) ∫ D (δ_ij + ∂_i k_j)` by quadrature over the faces normal to `e_i`.
    pub fn tensor(&self, k: [&[f64]; 2]) -> [[f64; 2]; 2] {
        let h = self.cell.spacing();
        let np = self.cells.len() as f64;
        let mut a = [[0.0; 2]; 2];
        for (f, &df) in self.faces.iter().zip(&self.face_d) {
            for (j, kj) in k.iter().enumerate() {
                let delta = if f.axis == j { 1.0 } else { 0.0 };
                a[f.axis][j] += df * (delta + (kj[f.b] - kj[f.a]) / h);
            }
        }
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x /= np;
            }
        }
        a
    }

    /// `(1/|Y^p|) ∫ D ∇k₀`, split as the face flux `D(∇k₀ − q)` plus the cell
    /// midpoint value of `D q`.
    pub fn drift(&self, k0: &[f64], q: &FaceField) -> [f64; 2] {
        let h = self.cell.spacing();
        let n = self.cell.resolution();
        let np = self.cells.len() as f64;
        let mut out = [0.0; 2];
        for (f, &df) in self.faces.iter().zip(&self.face_d) {
            out[f.axis] += df * ((k0[f.b] - k0[f.a]) / h - self.velocity_on(f, q));
        }
        let grid = MacGrid::from_cell(&self.cell);
        for &c in &self.cells {
            let (i, j) = (c % n, c / n);
            let qc = [
                0.5 * (q.u[grid.west_face(i, j)] + q.u[grid.east_face(i, j)]),
                0.5 * (q.v[grid.south_face(i, j)] + q.v[grid.north_face(i, j)]),
            ];
            out[0] += self.cell_d[c] * qc[0];
            out[1] += self.cell_d[c] * qc[1];
        }
        [out[0] / np, out[1] / np]
    }

    /// Mean over the pore cells.
    pub fn pore_mean(&self, field: &[f64]) -> f64 {
        let v = self.gather(field);
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Steady periodic cell flow with pressure.
#[derive(Debug, Clone)]
pub struct CellFlow {
    pub q: FaceField,
    pub p: Vec<f64>,
    pub q_bar: [f64; 2],
}

/// Steady Stokes cell problem `−μ Δ_y q + ∇_y p₁ = f`, `div_y q = 0`, `q = 0`
/// on `Γ`, where `f = −∇_x p` is the macroscopic body force.
pub fn solve_stokes_cell(cell: &UnitCell, mu: f64, force: [f64; 2]) -> Result<CellFlow> {
    let sys = MacSystem::new(MacGrid::from_cell(cell));
    let (q, p) = sys.steady_stokes(mu, force)?;
    let q_bar = sys.mean_velocity(&q);
    Ok(CellFlow { q, p, q_bar })
}

/// Correctors for one species.
#[derive(Debug, Clone)]
pub struct CorrectorSet {
    pub k: [Vec<f64>; 2],
    pub k0: Vec<f64>,
}

/// Effective data at one macroscopic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCoefficients {
    pub a: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub q_bar: [f64; 2],
    pub q_tilde0: [f64; 2],
    pub porosity: f64,
    /// `|Γ|`, needed for the sink term.
    pub gamma_measure: f64,
}

impl EffectiveCoefficients {
    /// Drift velocity `q̄ − q̃₀` of the macroscopic equations.
    pub fn drift(&self) -> [f64; 2] {
        [self.q_bar[0] - self.q_tilde0[0], self.q_bar[1] - self.q_tilde0[1]]
    }

    /// `|Γ| / |Y^p|`.
    pub fn surface_ratio(&self) -> f64 {
        self.gamma_measure / self.porosity
    }

    /// Scales the diffusion tensors and the diffusive drift by `m1`, `m2`.
    pub fn scaled(&self, m1: f64, m2: f64) -> Self {
        let s = |t: [[f64; 2]; 2], m: f64| [[t[0][0] * m, t[0][1] * m], [t[1][0] * m, t[1][1] * m]];
        EffectiveCoefficients {
            a: s(self.a, m1),
            b: s(self.b, m2),
            q_tilde0: [self.q_tilde0[0] * m1, self.q_tilde0[1] * m1],
            ..*self
        }
    }
}

/// `ζ·Tζ` for a 2×2 matrix.
pub fn quadratic_form(t: &[[f64; 2]; 2], z: [f64; 2]) -> f64 {
    z[0] * (t[0][0] * z[0] + t[0][1] * z[1]) + z[1] * (t[1][0] * z[0] + t[1][1] * z[1])
}

/// Extreme eigenvalues of the symmetric part of `t`.
pub fn symmetric_eigenvalues(t: &[[f64; 2]; 2]) -> (f64, f64) {
    let off = 0.5 * (t[0][1] + t[1][0]);
    let mean = 0.5 * (t[0][0] + t[1][1]);
    let r = (0.25 * (t[0][0] - t[1][1]).powi(2) + off * off).sqrt();
    (mean - r, mean + r)
}

/// Correctors and coefficients for given cell diffusivities and flow.
/// `q̃₀` is taken with `D₁` as in the limit equations for both species.
pub fn assemble_effective(
    cell: &UnitCell,
    d1: &CellDiffusivity,
    d2: &CellDiffusivity,
    flow: Option<&FaceField>,
) -> Result<(EffectiveCoefficients, [CorrectorSet; 2])> {
    let zero;
    let q = match flow {
        Some(q) => q,
        None => {
            zero = FaceField::zeros(&MacGrid::from_cell(cell));
            &zero
        }
    };
    let systems = [CorrectorSystem::new(cell, d1), CorrectorSystem::new(cell, d2)];
    let sets: Vec<Result<CorrectorSet>> = systems
        .par_iter()
        .map(|sys| {
            Ok(CorrectorSet {
                k: [sys.corrector(0, None, None)?, sys.corrector(1, None, None)?],
                k0: sys.advective_corrector(q)?,
            })
        })
        .collect();
    let mut it = sets.into_iter();
    let s1 = it.next().unwrap()?;
    let s2 = it.next().unwrap()?;
    let grid = MacGrid::from_cell(cell);
    let q_bar = MacSystem::new(grid).mean_velocity(q);
    let eff = EffectiveCoefficients {
        a: systems[0].tensor([&s1.k[0], &s1.k[1]]),
        b: systems[1].tensor([&s2.k[0], &s2.k[1]]),
        q_bar,
        q_tilde0: systems[0].drift(&s1.k0, q),
        porosity: cell.pore_volume(),
        gamma_measure: cell.boundary_measure(),
    };
    Ok((eff, [s1, s2]))
}

/// Recomputes only the flow-dependent part (`q̄`, `q̃₀`) for a new cell flow.
pub fn update_flow(
    eff: &EffectiveCoefficients,
    sys1: &CorrectorSystem,
    q: &FaceField,
) -> Result<EffectiveCoefficients> {
    let k0 = sys1.advective_corrector(q)?;
    let grid = MacGrid::from_cell(&sys1.cell);
    Ok(EffectiveCoefficients {
        q_bar: MacSystem::new(grid).mean_velocity(q),
        q_tilde0: sys1.drift(&k0, q),
        ..*eff
    })
}

/// Coefficients at macroscopic points for separable data `D_i = m_i(x) c_i(y)`:
/// the cell problems are solved once and scaled by `m_i(x)`.
pub fn effective_sweep(
    cell: &UnitCell,
    d1: &Diffusivity,
    d2: &Diffusivity,
    flow: Option<&FaceField>,
    points: &[[f64; 2]],
    extent: f64,
) -> Result<Vec<EffectiveCoefficients>> {
    let c1 = CellDiffusivity::from_profile(cell, &d1.cell_profile, 1.0)?;
    let c2 = CellDiffusivity::from_profile(cell, &d2.cell_profile, 1.0)?;
    let (base, _) = assemble_effective(cell, &c1, &c2, flow)?;
    Ok(points
        .iter()
        .map(|&x| base.scaled(d1.macro_factor.eval(x, extent), d2.macro_factor.eval(x, extent)))
        .collect())
}

/// Coefficients with separately tabulated cell diffusivities per point.
pub fn effective_at_points(
    cell: &UnitCell,
    data: &[(CellDiffusivity, CellDiffusivity)],
    flow: Option<&FaceField>,
) -> Result<Vec<EffectiveCoefficients>> {
    data.par_iter()
        .map(|(d1, d2)| assemble_effective(cell, d1, d2, flow).map(|(e, _)| e))
        .collect()
}
