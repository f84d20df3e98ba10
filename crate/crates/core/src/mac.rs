//! Staggered (MAC) discretization of the Stokes equations on masked grids.
//!
//! Velocities live on cell faces, pressure on pore cells. A face is active
//! when both neighbouring cells exist and are pore; inactive faces carry zero
//! velocity. Each axis is either periodic or bounded by no-slip walls.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::geometry::{PerforatedDomain, UnitCell};
use crate::linalg::{pcg, CsrMatrix, LinearOperator, SolverOptions};

/// Square `n x n` grid with a pore mask.
#[derive(Debug, Clone)]
pub struct MacGrid {
    n: usize,
    dx: f64,
    periodic: [bool; 2],
    pore: Vec<bool>,
}

impl MacGrid {
    pub fn new(n: usize, dx: f64, periodic: [bool; 2], pore: Vec<bool>) -> Self {
        assert_eq!(pore.len(), n * n);
        MacGrid {
            n,
            dx,
            periodic,
            pore,
        }
    }

    /// Periodic unit cell.
    pub fn from_cell(cell: &UnitCell) -> Self {
        Self::new(
            cell.resolution(),
            cell.spacing(),
            [true, true],
            cell.pore_mask().to_vec(),
        )
    }

    /// Perforated domain with no-slip walls on `∂Ω`.
    pub fn from_domain(domain: &PerforatedDomain) -> Self {
        Self::new(
            domain.n(),
            domain.dx(),
            [false, false],
            domain.pore_mask().to_vec(),
        )
    }

    /// Plane channel of height 1: periodic in `x1`, walls at `y = 0` and `y = 1`.
    pub fn channel(n: usize) -> Self {
        Self::new(n, 1.0 / n as f64, [true, false], vec![true; n * n])
    }

    /// Fully periodic box without obstacles.
    pub fn periodic_box(n: usize, extent: f64) -> Self {
        Self::new(n, extent / n as f64, [true, true], vec![true; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }
    pub fn pore(&self) -> &[bool] {
        &self.pore
    }

    /// x-faces per row (`n` if periodic in `x1`, else `n + 1`).
    pub fn nfx(&self) -> usize {
        if self.periodic[0] {
            self.n
        } else {
            self.n + 1
        }
    }

    /// Rows of y-faces.
    pub fn nfy(&self) -> usize {
        if self.periodic[1] {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn n_xfaces(&self) -> usize {
        self.nfx() * self.n
    }

    pub fn n_yfaces(&self) -> usize {
        self.nfy() * self.n
    }

    fn cell(&self, i: isize, j: isize) -> Option<usize> {
        let n = self.n as isize;
        let i = if self.periodic[0] {
            i.rem_euclid(n)
        } else if i < 0 || i >= n {
            return None;
        } else {
            i
        };
        let j = if self.periodic[1] {
            j.rem_euclid(n)
        } else if j < 0 || j >= n {
            return None;
        } else {
            j
        };
        Some(j as usize * self.n + i as usize)
    }

    /// Cells `(west, east)` of x-face `(i, j)`.
    pub fn xface_cells(&self, i: usize, j: usize) -> (Option<usize>, Option<usize>) {
        (
            self.cell(i as isize - 1, j as isize),
            self.cell(i as isize, j as isize),
        )
    }

    /// Cells `(south, north)` of y-face `(i, j)`.
    pub fn yface_cells(&self, i: usize, j: usize) -> (Option<usize>, Option<usize>) {
        (
            self.cell(i as isize, j as isize - 1),
            self.cell(i as isize, j as isize),
        )
    }

    fn both_pore(&self, a: Option<usize>, b: Option<usize>) -> bool {
        matches!((a, b), (Some(a), Some(b)) if self.pore[a] && self.pore[b])
    }

    fn any_pore(&self, a: Option<usize>, b: Option<usize>) -> bool {
        a.is_some_and(|a| self.pore[a]) || b.is_some_and(|b| self.pore[b])
    }

    pub fn xface_active(&self, i: usize, j: usize) -> bool {
        let (a, b) = self.xface_cells(i, j);
        self.both_pore(a, b)
    }

    pub fn yface_active(&self, i: usize, j: usize) -> bool {
        let (a, b) = self.yface_cells(i, j);
        self.both_pore(a, b)
    }

    /// x-face index east of cell `(i, j)`.
    pub fn east_face(&self, i: usize, j: usize) -> usize {
        let ie = if self.periodic[0] { (i + 1) % self.n } else { i + 1 };
        j * self.nfx() + ie
    }

    pub fn west_face(&self, i: usize, j: usize) -> usize {
        j * self.nfx() + i
    }

    pub fn north_face(&self, i: usize, j: usize) -> usize {
        let jn = if self.periodic[1] { (j + 1) % self.n } else { j + 1 };
        jn * self.n + i
    }

    pub fn south_face(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn n_pore(&self) -> usize {
        self.pore.iter().filter(|&&p| p).count()
    }
}

/// Face-centred velocity: `u` on x-faces, `v` on y-faces.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: &MacGrid) -> Self {
        FaceField {
            u: vec![0.0; grid.n_xfaces()],
            v: vec![0.0; grid.n_yfaces()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        FaceField {
            u: self.u.iter().map(|x| x * s).collect(),
            v: self.v.iter().map(|x| x * s).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &FaceField) {
        self.u.iter_mut().zip(&other.u).for_each(|(x, y)| *x += a * y);
        self.v.iter_mut().zip(&other.v).for_each(|(x, y)| *x += a * y);
    }

    /// Discrete `L²` norm (each face stands for a `dx²` control volume).
    pub fn l2_norm(&self, grid: &MacGrid) -> f64 {
        let s: f64 = self.u.iter().chain(&self.v).map(|x| x * x).sum();
        (s * grid.dx * grid.dx).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Compact numbering of active faces and pore cells plus the operators.
#[derive(Debug, Clone)]
pub struct MacSystem {
    grid: MacGrid,
    xfaces: Vec<usize>,
    yfaces: Vec<usize>,
    pdof: Vec<Option<usize>>,
    pcells: Vec<usize>,
    /// `-Δ` on active x-faces (no-slip via Dirichlet/ghost values).
    lap_u: CsrMatrix,
    lap_v: CsrMatrix,
    /// `Gᵀ G`, the Neumann pressure Laplacian on pore cells.
    poisson: CsrMatrix,
}

impl MacSystem {
    pub fn new(grid: MacGrid) -> Self {
        let n = grid.n;
        let nfx = grid.nfx();
        let mut xdof = vec![None; grid.n_xfaces()];
        let mut xfaces = Vec::new();
        for j in 0..n {
            for i in 0..nfx {
                if grid.xface_active(i, j) {
                    xdof[j * nfx + i] = Some(xfaces.len());
                    xfaces.push(j * nfx + i);
                }
            }
        }
        let mut ydof = vec![None; grid.n_yfaces()];
        let mut yfaces = Vec::new();
        for j in 0..grid.nfy() {
            for i in 0..n {
                if grid.yface_active(i, j) {
                    ydof[j * n + i] = Some(yfaces.len());
                    yfaces.push(j * n + i);
                }
            }
        }
        let mut pdof = vec![None; n * n];
        let mut pcells = Vec::new();
        for c in 0..n * n {
            if grid.pore[c] {
                pdof[c] = Some(pcells.len());
                pcells.push(c);
            }
        }
        let lap_u = Self::velocity_laplacian(&grid, &xdof, &xfaces, true);
        let lap_v = Self::velocity_laplacian(&grid, &ydof, &yfaces, false);
        let poisson = Self::pressure_laplacian(&grid, &pdof, pcells.len());
        MacSystem {
            grid,
            xfaces,
            yfaces,
            pdof,
            pcells,
            lap_u,
            lap_v,
            poisson,
        }
    }

    fn velocity_laplacian(
        grid: &MacGrid,
        dof: &[Option<usize>],
        faces: &[usize],
        is_x: bool,
    ) -> CsrMatrix {
        let n = grid.n as isize;
        let inv = 1.0 / (grid.dx * grid.dx);
        let (nf_row, nrows) = if is_x {
            (grid.nfx() as isize, n)
        } else {
            (n, grid.nfy() as isize)
        };
        let per_along = if is_x { grid.periodic[0] } else { grid.periodic[1] };
        let per_across = if is_x { grid.periodic[1] } else { grid.periodic[0] };
        // (a, b): a runs along the face normal, b across
        let coords = |f: usize| -> (isize, isize) {
            let (i, j) = ((f as isize) % nf_row, (f as isize) / nf_row);
            if is_x {
                (i, j)
            } else {
                (j, i)
            }
        };
        let index = |a: isize, b: isize| -> Option<usize> {
            let (a_len, b_len) = if is_x { (nf_row, nrows) } else { (nrows, nf_row) };
            let a = if per_along {
                a.rem_euclid(a_len)
            } else if a < 0 || a >= a_len {
                return None;
            } else {
                a
            };
            let b = if per_across {
                b.rem_euclid(b_len)
            } else if b < 0 || b >= b_len {
                return None;
            } else {
                b
            };
            let (i, j) = if is_x { (a, b) } else { (b, a) };
            Some((j * nf_row + i) as usize)
        };
        let face_cells = |f: usize| -> (Option<usize>, Option<usize>) {
            let (i, j) = ((f as isize % nf_row) as usize, (f as isize / nf_row) as usize);
            if is_x {
                grid.xface_cells(i, j)
            } else {
                grid.yface_cells(i, j)
            }
        };
        let mut trip = Vec::with_capacity(faces.len() * 5);
        for (row, &f) in faces.iter().enumerate() {
            let (a, b) = coords(f);
            let mut diag = 4.0;
            for (da, db) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                match index(a + da, b + db) {
                    Some(nb) => match dof[nb] {
                        Some(col) => trip.push((row, col, -inv)),
                        None => {
                            // neighbour face in the solid: its value is zero. A wall
                            // half-way between the two faces (both cells solid) is
                            // imposed with a mirrored ghost value instead.
                            let (c0, c1) = face_cells(nb);
                            if db != 0 && !grid.any_pore(c0, c1) {
                                diag += 1.0;
                            }
                        }
                    },
                    None => {
                        if db != 0 {
                            diag += 1.0;
                        }
                    }
                }
            }
            trip.push((row, row, diag * inv));
        }
        CsrMatrix::from_triplets(faces.len(), trip)
    }

    fn pressure_laplacian(grid: &MacGrid, pdof: &[Option<usize>], np: usize) -> CsrMatrix {
        let n = grid.n;
        let inv = 1.0 / (grid.dx * grid.dx);
        let mut trip = Vec::with_capacity(np * 5);
        let mut couple = |a: usize, b: usize| {
            let (ra, rb) = (pdof[a].unwrap(), pdof[b].unwrap());
            trip.push((ra, ra, inv));
            trip.push((rb, rb, inv));
            trip.push((ra, rb, -inv));
            trip.push((rb, ra, -inv));
        };
        for j in 0..n {
            for i in 0..grid.nfx() {
                if grid.xface_active(i, j) {
                    let (a, b) = grid.xface_cells(i, j);
                    couple(a.unwrap(), b.unwrap());
                }
            }
        }
        for j in 0..grid.nfy() {
            for i in 0..n {
                if grid.yface_active(i, j) {
                    let (a, b) = grid.yface_cells(i, j);
                    couple(a.unwrap(), b.unwrap());
                }
            }
        }
        CsrMatrix::from_triplets(np, trip)
    }

    pub fn grid(&self) -> &MacGrid {
        &self.grid
    }

    pub fn n_pressure(&self) -> usize {
        self.pcells.len()
    }

    pub fn pressure_cells(&self) -> &[usize] {
        &self.pcells
    }

    fn gather(&self, f: &FaceField) -> (Vec<f64>, Vec<f64>) {
        (
            self.xfaces.iter().map(|&k| f.u[k]).collect(),
            self.yfaces.iter().map(|&k| f.v[k]).collect(),
        )
    }

    fn scatter(&self, u: &[f64], v: &[f64]) -> FaceField {
        let mut f = FaceField::zeros(&self.grid);
        for (&k, &x) in self.xfaces.iter().zip(u) {
            f.u[k] = x;
        }
        for (&k, &x) in self.yfaces.iter().zip(v) {
            f.v[k] = x;
        }
        f
    }

    /// Discrete divergence per pore cell (compact numbering).
    pub fn divergence(&self, f: &FaceField) -> Vec<f64> {
        let g = &self.grid;
        self.pcells
            .iter()
            .map(|&c| {
                let (i, j) = (c % g.n, c / g.n);
                (f.u[g.east_face(i, j)] - f.u[g.west_face(i, j)] + f.v[g.north_face(i, j)]
                    - f.v[g.south_face(i, j)])
                    / g.dx
            })
            .collect()
    }

    /// `G p` on active faces (compact), pressure in compact numbering.
    fn gradient(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let nfx = g.nfx();
        let gu = self
            .xfaces
            .iter()
            .map(|&k| {
                let (a, b) = g.xface_cells(k % nfx, k / nfx);
                (p[self.pdof[b.unwrap()].unwrap()] - p[self.pdof[a.unwrap()].unwrap()]) / g.dx
            })
            .collect();
        let gv = self
            .yfaces
            .iter()
            .map(|&k| {
                let (a, b) = g.yface_cells(k % g.n, k / g.n);
                (p[self.pdof[b.unwrap()].unwrap()] - p[self.pdof[a.unwrap()].unwrap()]) / g.dx
            })
            .collect();
        (gu, gv)
    }

    /// `Gᵀ (u, v) = -div`.
    fn gradient_transpose(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let f = self.scatter(u, v);
        self.divergence(&f).into_iter().map(|d| -d).collect()
    }

    /// `L²` projection onto discretely divergence-free fields; returns the
    /// projected field and the potential `φ` with `q = q* - G φ`.
    pub fn project(&self, f: &FaceField) -> Result<(FaceField, Vec<f64>)> {
        let (u, v) = self.gather(f);
        let rhs = self.gradient_transpose(&u, &v);
        let mut phi = vec![0.0; self.n_pressure()];
        let diag = self.poisson.diagonal();
        pcg(
            &self.poisson,
            &rhs,
            &mut phi,
            Some(&diag),
            SolverOptions::default().tol(1e-13).zero_mean(true).max_iter(50_000),
            "pressure projection",
        )?;
        let (gu, gv) = self.gradient(&phi);
        let u: Vec<f64> = u.iter().zip(&gu).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = v.iter().zip(&gv).map(|(a, b)| a - b).collect();
        Ok((self.scatter(&u, &v), phi))
    }

    /// Steady Stokes `-μ Δq + ∇p = f`, `div q = 0`, by conjugate gradients on
    /// the pressure Schur complement `Gᵀ A⁻¹ G`. Pressure has zero mean.
    pub fn steady_stokes(&self, mu: f64, force: [f64; 2]) -> Result<(FaceField, Vec<f64>)> {
        if !(mu > 0.0) {
            return Err(Error::Argument(format!("viscosity must be positive, got {mu}")));
        }
        if force == [0.0, 0.0] {
            return Ok((FaceField::zeros(&self.grid), vec![0.0; self.n_pressure()]));
        }
        if self.grid.periodic == [true, true] && self.grid.pore.iter().all(|&p| p) {
            return Err(Error::Solver(
                "steady Stokes cell problem without solid is singular".into(),
            ));
        }
        let fu = vec![force[0]; self.xfaces.len()];
        let fv = vec![force[1]; self.yfaces.len()];
        let inner = InnerSolver::new(self, mu);
        let (au, av) = inner.solve(&fu, &fv)?;
        let rhs = self.gradient_transpose(&au, &av);
        let schur = SchurComplement {
            sys: self,
            inner: &inner,
            failure: RefCell::new(None),
        };
        let mut p = vec![0.0; self.n_pressure()];
        pcg(
            &schur,
            &rhs,
            &mut p,
            None,
            SolverOptions::default().tol(1e-11).zero_mean(true).max_iter(5_000),
            "Stokes Schur complement",
        )?;
        if let Some(e) = schur.failure.into_inner() {
            return Err(e);
        }
        let (gu, gv) = self.gradient(&p);
        let ru: Vec<f64> = fu.iter().zip(&gu).map(|(a, b)| a - b).collect();
        let rv: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a - b).collect();
        let (u, v) = inner.solve(&ru, &rv)?;
        // remove the residual divergence left by the nested tolerances
        let (q, _) = self.project(&self.scatter(&u, &v))?;
        let mut p = p;
        crate::linalg::remove_mean(&mut p);
        Ok((q, p))
    }

    /// Mean of `q` over the pore space, `(1/|pore|) ∫ q`.
    pub fn mean_velocity(&self, f: &FaceField) -> [f64; 2] {
        let area = self.grid.n_pore() as f64;
        [
            f.u.iter().sum::<f64>() / area,
            f.v.iter().sum::<f64>() / area,
        ]
    }
}

/// Inner solves with `μ A` for both velocity components.
struct InnerSolver<'a> {
    sys: &'a MacSystem,
    mu: f64,
    diag_u: Vec<f64>,
    diag_v: Vec<f64>,
}

impl<'a> InnerSolver<'a> {
    fn new(sys: &'a MacSystem, mu: f64) -> Self {
        InnerSolver {
            sys,
            mu,
            diag_u: sys.lap_u.diagonal(),
            diag_v: sys.lap_v.diagonal(),
        }
    }

    fn solve(&self, fu: &[f64], fv: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let opts = SolverOptions::default().tol(1e-13).max_iter(50_000);
        let mut u = vec![0.0; fu.len()];
        let mut v = vec![0.0; fv.len()];
        pcg(&self.sys.lap_u, fu, &mut u, Some(&self.diag_u), opts, "viscous solve (u)")?;
        pcg(&self.sys.lap_v, fv, &mut v, Some(&self.diag_v), opts, "viscous solve (v)")?;
        u.iter_mut().for_each(|x| *x /= self.mu);
        v.iter_mut().for_each(|x| *x /= self.mu);
        Ok((u, v))
    }
}

struct SchurComplement<'a> {
    sys: &'a MacSystem,
    inner: &'a InnerSolver<'a>,
    failure: RefCell<Option<Error>>,
}

impl LinearOperator for SchurComplement<'_> {
    fn dim(&self) -> usize {
        self.sys.n_pressure()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (gu, gv) = self.sys.gradient(x);
        match self.inner.solve(&gu, &gv) {
            Ok((u, v)) => y.copy_from_slice(&self.sys.gradient_transpose(&u, &v)),
            Err(e) => {
                y.iter_mut().for_each(|v| *v = 0.0);
                self.failure.borrow_mut().get_or_insert(e);
            }
        }
    }
}

/// Implicit-Euler viscous step followed by a pressure projection.
#[derive(Debug, Clone)]
pub struct StokesStepper {
    sys: MacSystem,
    h: f64,
    nu: f64,
    mat_u: CsrMatrix,
    mat_v: CsrMatrix,
}

impl StokesStepper {
    /// `nu` is the effective viscosity (`ε² μ` on the micro scale).
    pub fn new(grid: MacGrid, h: f64, nu: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Argument(format!("time step must be positive, got {h}")));
        }
        if !(nu > 0.0) {
            return Err(Error::Argument(format!("viscosity must be positive, got {nu}")));
        }
        let sys = MacSystem::new(grid);
        let shifted = |lap: &CsrMatrix| {
            let mut trip = Vec::with_capacity(lap.nnz());
            for i in 0..lap.n() {
                for (c, v) in lap.row(i) {
                    trip.push((i, c, nu * v + if c == i { 1.0 / h } else { 0.0 }));
                }
            }
            CsrMatrix::from_triplets(lap.n(), trip)
        };
        let mat_u = shifted(&sys.lap_u);
        let mat_v = shifted(&sys.lap_v);
        Ok(StokesStepper {
            sys,
            h,
            nu,
            mat_u,
            mat_v,
        })
    }

    pub fn system(&self) -> &MacSystem {
        &self.sys
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn viscosity(&self) -> f64 {
        self.nu
    }

    /// Advances `q` by one step with body force `force`; returns the pressure.
    pub fn step(&self, q: &mut FaceField, force: [f64; 2]) -> Result<Vec<f64>> {
        if q.is_zero() && force == [0.0, 0.0] {
            return Ok(vec![0.0; self.sys.n_pressure()]);
        }
        let (u0, v0) = self.sys.gather(q);
        let bu: Vec<f64> = u0.iter().map(|x| x / self.h + force[0]).collect();
        let bv: Vec<f64> = v0.iter().map(|x| x / self.h + force[1]).collect();
        let mut u = u0.clone();
        let mut v = v0.clone();
        let opts = SolverOptions::default().tol(1e-13).max_iter(50_000);
        let du = self.mat_u.diagonal();
        let dv = self.mat_v.diagonal();
        pcg(&self.mat_u, &bu, &mut u, Some(&du), opts, "viscous step (u)")?;
        pcg(&self.mat_v, &bv, &mut v, Some(&dv), opts, "viscous step (v)")?;
        let (proj, phi) = self.sys.project(&self.sys.scatter(&u, &v))?;
        *q = proj;
        Ok(phi.into_iter().map(|x| x / self.h).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Inclusion;
    use std::f64::consts::PI;

    #[test]
    fn poiseuille_channel_mean_velocity() {
        let mu = 0.5;
        let sys = MacSystem::new(MacGrid::channel(32));
        let (q, _) = sys.steady_stokes(mu, [1.0, 0.0]).unwrap();
        let mean = q.u.iter().sum::<f64>() / (32.0 * 32.0);
        let exact = 1.0 / (12.0 * mu);
        assert!((mean - exact).abs() / exact < 0.02, "{mean} vs {exact}");
        assert!(sys.divergence(&q).iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn cell_flow_is_divergence_free_and_no_slip() {
        let cell = UnitCell::new(16, Inclusion::Square { side: 0.5 }).unwrap();
        let grid = MacGrid::from_cell(&cell);
        let sys = MacSystem::new(grid.clone());
        let (q, p) = sys.steady_stokes(1.0, [1.0, 0.0]).unwrap();
        assert!(sys.divergence(&q).iter().all(|d| d.abs() < 1e-10));
        for j in 0..16 {
            for i in 0..16 {
                if !grid.xface_active(i, j) {
                    assert_eq!(q.u[j * 16 + i], 0.0);
                }
            }
        }
        assert!(p.iter().sum::<f64>().abs() < 1e-9);
        let m = sys.mean_velocity(&q);
        assert!(m[0] > 0.0);
        assert!(m[1].abs() < 1e-12);
    }

    #[test]
    fn zero_force_gives_zero_flow() {
        let cell = UnitCell::new(8, Inclusion::Disk { radius: 0.2 }).unwrap();
        let sys = MacSystem::new(MacGrid::from_cell(&cell));
        let (q, _) = sys.steady_stokes(1.0, [0.0, 0.0]).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn open_periodic_cell_is_singular() {
        let cell = UnitCell::new(8, Inclusion::None).unwrap();
        let sys = MacSystem::new(MacGrid::from_cell(&cell));
        assert!(sys.steady_stokes(1.0, [1.0, 0.0]).is_err());
    }

    #[test]
    fn shear_mode_decays_at_viscous_rate() {
        let n = 32;
        let nu = 0.01;
        let h = 1e-2;
        let grid = MacGrid::periodic_box(n, 1.0);
        let st = StokesStepper::new(grid.clone(), h, nu).unwrap();
        let mut q = FaceField::zeros(&grid);
        for j in 0..n {
            let y = (j as f64 + 0.5) / n as f64;
            for i in 0..n {
                q.u[j * n + i] = (2.0 * PI * y).sin();
            }
        }
        let e0 = q.l2_norm(&grid);
        let steps = 100;
        for _ in 0..steps {
            st.step(&mut q, [0.0, 0.0]).unwrap();
        }
        let ratio = q.l2_norm(&grid) / e0;
        let exact = (-nu * 4.0 * PI * PI * h * steps as f64).exp();
        assert!((ratio - exact).abs() / exact < 0.05);
    }
}
