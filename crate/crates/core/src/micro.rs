//! The ε-problem on the perforated domain.
//!
//! Each time level runs one unsteady Stokes step, advances the mineral mass
//! on every interface face from the previous concentrations, and then takes
//! one semi-implicit step for both species: diffusion and upwind advection
//! implicit, interface exchange and boundary fluxes explicit.

use crate::data::{BoundaryData, Diffusivity, MacroProfile};
use crate::error::{Error, Result};
use crate::geometry::{DomainFace, Normal, PerforatedDomain, UnitCell};
use crate::kinetics::{surface_ode_step, DissolutionMode, KineticsParams};
use crate::linalg::{bicgstab, pcg, CsrMatrix, SolverOptions};
use crate::mac::{FaceField, MacGrid, StokesStepper};

/// Relative residual of the transport solves.
pub const TRANSPORT_TOL: f64 = 1e-13;

/// Initial concentrations and mineral mass as functions of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub u0: MacroProfile,
    pub v0: MacroProfile,
    pub w0: MacroProfile,
}

/// Flow data: viscosity, uniform initial velocity and the macroscopic
/// pressure gradient `∇_x p` (the body force is its negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowData {
    pub mu: f64,
    pub initial: [f64; 2],
    pub pressure_gradient: [f64; 2],
}

impl FlowData {
    pub fn at_rest(mu: f64) -> Self {
        FlowData {
            mu,
            initial: [0.0, 0.0],
            pressure_gradient: [0.0, 0.0],
        }
    }

    pub fn is_at_rest(&self) -> bool {
        self.initial == [0.0, 0.0] && self.pressure_gradient == [0.0, 0.0]
    }

    pub fn force(&self) -> [f64; 2] {
        [-self.pressure_gradient[0], -self.pressure_gradient[1]]
    }
}

/// Largest step keeping the explicit interface uptake from driving a pore
/// cell negative: `h R ε |faces| ≤ Δ² u` with `R ≤ k k_i min(u,v) / 4`.
pub fn positivity_step_limit(cell: &UnitCell, kin: &KineticsParams) -> f64 {
    let faces = cell.max_faces_per_cell();
    if faces == 0 {
        return f64::INFINITY;
    }
    let k_max = kin.k1.max(kin.k2);
    4.0 / (cell.resolution() as f64 * faces as f64 * kin.k_f * k_max)
}

/// Checks the regularized-mode restriction `h k_d ≤ δ`.
pub fn check_kinetics_step(h: f64, kin: &KineticsParams) -> Result<()> {
    if kin.mode == DissolutionMode::Regularized && h * kin.k_d > kin.delta * (1.0 + 1e-12) {
        return Err(Error::config(
            "time.h",
            format!(
                "step restriction h*k_d <= delta violated: {h}*{} = {} > {}",
                kin.k_d,
                h * kin.k_d,
                kin.delta
            ),
        ));
    }
    Ok(())
}

/// Number of steps for `T / h`, which must be an integer.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config("time.h", format!("must be positive, got {h}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::config("time.T", format!("must be nonnegative, got {t_end}")));
    }
    let ratio = t_end / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-8 * ratio.max(1.0) {
        return Err(Error::config(
            "time.h",
            format!("T/h = {ratio} is not an integer number of steps"),
        ));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone)]
pub struct MicroProblem {
    pub domain: PerforatedDomain,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    pub kinetics: KineticsParams,
    pub boundary: BoundaryData,
    pub initial: InitialData,
    pub flow: FlowData,
    pub h: f64,
    pub t_end: f64,
}

impl MicroProblem {
    pub fn validate(&self) -> Result<usize> {
        self.kinetics.validate()?;
        let steps = step_count(self.t_end, self.h)?;
        check_kinetics_step(self.h, &self.kinetics)?;
        let limit = positivity_step_limit(self.domain.cell(), &self.kinetics);
        if self.h > limit {
            return Err(Error::config(
                "time.h",
                format!("interface uptake restriction requires h <= {limit}, got {}", self.h),
            ));
        }
        if !(self.flow.mu > 0.0) {
            return Err(Error::config("physics.mu", "viscosity must be positive"));
        }
        Ok(steps)
    }
}

/// Fields at one time level. `u`, `v` are stored per grid cell (zero in the
/// solid), `w` and `z` per interface face.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub q: FaceField,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassTotals {
    pub mobile_u: f64,
    pub mobile_v: f64,
    pub mineral: f64,
    /// `∫u + ε∫_{Γ*} w`.
    pub combined_u: f64,
    /// `∫v + ε∫_{Γ*} w`.
    pub combined_v: f64,
}

/// Pore integrals of `u`, `v` and the ε-weighted interface integral of `w`.
pub fn mass_audit(state: &MicroState, domain: &PerforatedDomain) -> MassTotals {
    let area = domain.dx() * domain.dx();
    let mobile_u = state.u.iter().sum::<f64>() * area;
    let mobile_v = state.v.iter().sum::<f64>() * area;
    let mineral = domain.epsilon()
        * domain
            .gamma_faces()
            .iter()
            .zip(&state.w)
            .map(|(f, w)| f.length * w)
            .sum::<f64>();
    MassTotals {
        mobile_u,
        mobile_v,
        mineral,
        combined_u: mobile_u + mineral,
        combined_v: mobile_v + mineral,
    }
}

/// Per-level diagnostics: the a-priori norms, extrema, masses and solver work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroDiagnostics {
    pub step: usize,
    pub t: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    /// `Σ h ‖∇u‖²` accumulated up to this level.
    pub energy_u: f64,
    pub energy_v: f64,
    pub l2_q: f64,
    pub max_w: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub min_w: f64,
    pub mass: MassTotals,
    pub iterations: usize,
}

struct Links {
    /// Interior pore–pore faces `(a, b, velocity index, is_x)`, oriented `a → b`.
    faces: Vec<(usize, usize, usize, bool)>,
    /// Harmonic-mean diffusivities per species.
    d: [Vec<f64>; 2],
}

/// Time stepper for a [`MicroProblem`].
pub struct MicroSolver {
    problem: MicroProblem,
    steps: usize,
    dof: Vec<Option<usize>>,
    cells: Vec<usize>,
    links: Links,
    gamma_dof: Vec<usize>,
    stokes: Option<StokesStepper>,
    operators: Option<[Operator; 2]>,
    state: MicroState,
    energy: [f64; 2],
    last_iterations: usize,
}

struct Operator {
    matrix: CsrMatrix,
    diag: Vec<f64>,
    symmetric: bool,
}

impl MicroSolver {
    pub fn new(problem: MicroProblem) -> Result<Self> {
        let steps = problem.validate()?;
        let dom = &problem.domain;
        let n = dom.n();
        let mut dof = vec![None; n * n];
        let mut cells = Vec::new();
        for c in 0..n * n {
            if dom.pore_mask()[c] {
                dof[c] = Some(cells.len());
                cells.push(c);
            }
        }
        let extent = dom.extent();
        let eps = dom.epsilon();
        let r = dom.cell().resolution();
        let dvals = |d: &Diffusivity| -> Vec<f64> {
            (0..n * n)
                .map(|c| {
                    let x = dom.center(c);
                    // cell-local coordinate of the same grid cell, exact on the tiling
                    let (i, j) = (c % n % r, c / n % r);
                    let y = [(i as f64 + 0.5) / r as f64, (j as f64 + 0.5) / r as f64];
                    d.eval(x, y, extent)
                })
                .collect()
        };
        let dv = [dvals(&problem.d1), dvals(&problem.d2)];
        for (s, vals) in dv.iter().enumerate() {
            if let Some(c) = cells.iter().find(|&&c| !(vals[c] > 0.0 && vals[c].is_finite())) {
                return Err(Error::config(
                    if s == 0 { "physics.d1_cell" } else { "physics.d2_cell" },
                    format!("diffusivity {} at x = {:?} is not positive", vals[*c], dom.center(*c)),
                ));
            }
        }
        let grid = MacGrid::from_domain(dom);
        let mut faces = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                if !dom.pore_mask()[c] {
                    continue;
                }
                if i + 1 < n && dom.pore_mask()[c + 1] {
                    faces.push((c, c + 1, grid.east_face(i, j), true));
                }
                if j + 1 < n && dom.pore_mask()[c + n] {
                    faces.push((c, c + n, grid.north_face(i, j), false));
                }
            }
        }
        let hm = |a: f64, b: f64| 2.0 * a * b / (a + b);
        let d = [
            faces.iter().map(|&(a, b, _, _)| hm(dv[0][a], dv[0][b])).collect(),
            faces.iter().map(|&(a, b, _, _)| hm(dv[1][a], dv[1][b])).collect(),
        ];
        let gamma_dof = dom.gamma_faces().iter().map(|f| f.cell).collect();
        let u: Vec<f64> = (0..n * n)
            .map(|c| if dom.pore_mask()[c] { problem.initial.u0.eval(dom.center(c), extent) } else { 0.0 })
            .collect();
        let v: Vec<f64> = (0..n * n)
            .map(|c| if dom.pore_mask()[c] { problem.initial.v0.eval(dom.center(c), extent) } else { 0.0 })
            .collect();
        let w: Vec<f64> = dom
            .gamma_faces()
            .iter()
            .map(|f| problem.initial.w0.eval(f.center, extent))
            .collect();
        let z = vec![0.0; w.len()];
        let stokes = if problem.flow.is_at_rest() {
            None
        } else {
            Some(StokesStepper::new(
                grid.clone(),
                problem.h,
                eps * eps * problem.flow.mu,
            )?)
        };
        let mut q = FaceField::zeros(&grid);
        if let Some(st) = &stokes {
            let q0 = problem.flow.initial;
            for jj in 0..n {
                for ii in 0..grid.nfx() {
                    if grid.xface_active(ii, jj) {
                        q.u[jj * grid.nfx() + ii] = q0[0];
                    }
                }
            }
            for jj in 0..grid.nfy() {
                for ii in 0..n {
                    if grid.yface_active(ii, jj) {
                        q.v[jj * n + ii] = q0[1];
                    }
                }
            }
            q = st.system().project(&q)?.0;
        }
        let p = vec![0.0; grid.n_pore()];
        let state = MicroState {
            step: 0,
            t: 0.0,
            u,
            v,
            w,
            z,
            q,
            p,
        };
        Ok(MicroSolver {
            problem,
            steps,
            dof,
            cells,
            links: Links { faces, d },
            gamma_dof,
            stokes,
            operators: None,
            state,
            energy: [0.0, 0.0],
            last_iterations: 0,
        })
    }

    pub fn problem(&self) -> &MicroProblem {
        &self.problem
    }

    pub fn domain(&self) -> &PerforatedDomain {
        &self.problem.domain
    }

    pub fn state(&self) -> &MicroState {
        &self.state
    }

    pub fn into_state(self) -> MicroState {
        self.state
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.steps
    }

    fn assemble(&self, species: usize) -> Operator {
        let dom = &self.problem.domain;
        let dx = dom.dx();
        let q = &self.state.q;
        let mass = dx * dx / self.problem.h;
        let mut trip = Vec::with_capacity(self.cells.len() + 4 * self.links.faces.len());
        for r in 0..self.cells.len() {
            trip.push((r, r, mass));
        }
        let mut symmetric = true;
        for (&(a, b, k, is_x), &df) in self.links.faces.iter().zip(&self.links.d[species]) {
            let (ra, rb) = (self.dof[a].unwrap(), self.dof[b].unwrap());
            trip.push((ra, ra, df));
            trip.push((rb, rb, df));
            trip.push((ra, rb, -df));
            trip.push((rb, ra, -df));
            let qf = if is_x { q.u[k] } else { q.v[k] } * dx;
            if qf != 0.0 {
                symmetric = false;
                let (out, inn) = (qf.max(0.0), qf.min(0.0));
                trip.push((ra, ra, out));
                trip.push((ra, rb, inn));
                trip.push((rb, ra, -out));
                trip.push((rb, rb, -inn));
            }
        }
        let matrix = CsrMatrix::from_triplets(self.cells.len(), trip);
        let diag = matrix.diagonal();
        Operator {
            matrix,
            diag,
            symmetric,
        }
    }

    fn boundary_flux(&self, faces: &[DomainFace], value: f64, rhs: &mut [f64]) {
        for f in faces {
            rhs[self.dof[f.cell].unwrap()] -= value * f.length;
        }
    }

    /// Advances one time level.
    pub fn step(&mut self) -> Result<()> {
        let h = self.problem.h;
        let t_old = self.state.t;
        let level = self.state.step + 1;
        let at_level = |e: Error| Error::AtLevel {
            level,
            source: Box::new(e),
        };
        let mut flow_changed = false;
        if let Some(st) = &self.stokes {
            self.state.p = st.step(&mut self.state.q, self.problem.flow.force()).map_err(at_level)?;
            flow_changed = true;
        }
        if flow_changed || self.operators.is_none() {
            self.operators = Some([self.assemble(0), self.assemble(1)]);
        }
        let dom = &self.problem.domain;
        let eps = dom.epsilon();
        let dx = dom.dx();
        let mass = dx * dx / h;
        let mut rhs_u: Vec<f64> = self.cells.iter().map(|&c| mass * self.state.u[c]).collect();
        let mut rhs_v: Vec<f64> = self.cells.iter().map(|&c| mass * self.state.v[c]).collect();
        for ((f, &c), (w, z)) in dom
            .gamma_faces()
            .iter()
            .zip(&self.gamma_dof)
            .zip(self.state.w.iter_mut().zip(self.state.z.iter_mut()))
        {
            let s = surface_ode_step(*w, self.state.u[c], self.state.v[c], h, &self.problem.kinetics)
                .map_err(at_level)?;
            let uptake = eps * f.length * (s.w - *w) / h;
            let r = self.dof[c].unwrap();
            rhs_u[r] -= uptake;
            rhs_v[r] -= uptake;
            *w = s.w;
            *z = s.z;
        }
        let bd = &self.problem.boundary;
        self.boundary_flux(dom.inflow_faces(), bd.d.at(t_old), &mut rhs_u);
        self.boundary_flux(dom.outflow_faces(), bd.e.at(t_old), &mut rhs_u);
        self.boundary_flux(dom.inflow_faces(), bd.g.at(t_old), &mut rhs_v);
        self.boundary_flux(dom.outflow_faces(), bd.h.at(t_old), &mut rhs_v);

        let ops = self.operators.as_ref().unwrap();
        let mut iterations = 0;
        let mut new_fields = Vec::with_capacity(2);
        for (s, rhs) in [rhs_u, rhs_v].into_iter().enumerate() {
            let old = if s == 0 { &self.state.u } else { &self.state.v };
            let mut x: Vec<f64> = self.cells.iter().map(|&c| old[c]).collect();
            let op = &ops[s];
            let opts = SolverOptions::default().tol(TRANSPORT_TOL).max_iter(20_000);
            let stats = if op.symmetric {
                pcg(&op.matrix, &rhs, &mut x, Some(&op.diag), opts, "micro transport")
            } else {
                bicgstab(&op.matrix, &rhs, &mut x, Some(&op.diag), opts, "micro transport")
            }
            .map_err(at_level)?;
            iterations += stats.iterations;
            new_fields.push(x);
        }
        for (s, x) in new_fields.into_iter().enumerate() {
            let field = if s == 0 { &mut self.state.u } else { &mut self.state.v };
            for (&c, &val) in self.cells.iter().zip(&x) {
                field[c] = val;
            }
        }
        self.energy[0] += h * self.grad_norm_sq(&self.state.u);
        self.energy[1] += h * self.grad_norm_sq(&self.state.v);
        self.state.step = level;
        self.state.t = level as f64 * h;
        self.last_iterations = iterations;
        Ok(())
    }

    fn grad_norm_sq(&self, f: &[f64]) -> f64 {
        self.links
            .faces
            .iter()
            .map(|&(a, b, _, _)| (f[b] - f[a]).powi(2))
            .sum()
    }

    pub fn diagnostics(&self) -> MicroDiagnostics {
        let dom = &self.problem.domain;
        let area = dom.dx() * dom.dx();
        let s = &self.state;
        let pore = |f: &[f64]| self.cells.iter().map(|&c| f[c]).collect::<Vec<f64>>();
        let (u, v) = (pore(&s.u), pore(&s.v));
        let min = |x: &[f64]| x.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |x: &[f64]| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let grid_dx = dom.dx();
        let l2_q = {
            let ss: f64 = s.q.u.iter().chain(&s.q.v).map(|x| x * x).sum();
            (ss * grid_dx * grid_dx).sqrt()
        };
        MicroDiagnostics {
            step: s.step,
            t: s.t,
            l2_u: (u.iter().map(|x| x * x).sum::<f64>() * area).sqrt(),
            l2_v: (v.iter().map(|x| x * x).sum::<f64>() * area).sqrt(),
            energy_u: self.energy[0],
            energy_v: self.energy[1],
            l2_q,
            max_w: if s.w.is_empty() { 0.0 } else { max(&s.w) },
            min_u: min(&u),
            min_v: min(&v),
            min_w: if s.w.is_empty() { 0.0 } else { min(&s.w) },
            mass: mass_audit(s, dom),
            iterations: self.last_iterations,
        }
    }

    /// Runs to the final time, calling `observe` at the initial level and
    /// after every step.
    pub fn run_with<F>(&mut self, mut observe: F) -> Result<()>
    where
        F: FnMut(&MicroSolver) -> Result<()>,
    {
        observe(self)?;
        while !self.is_finished() {
            self.step()?;
            observe(self)?;
        }
        Ok(())
    }
}

/// Runs a problem to its final time and returns the terminal state.
pub fn micro_simulate(problem: MicroProblem) -> Result<MicroState> {
    let mut solver = MicroSolver::new(problem)?;
    solver.run_with(|_| Ok(()))?;
    Ok(solver.into_state())
}

/// Outward unit normal of an interface face, pointing from pore into solid.
pub fn face_normal(face: &DomainFace) -> [f64; 2] {
    match face.normal {
        Normal::East => [1.0, 0.0],
        Normal::West => [-1.0, 0.0],
        Normal::North => [0.0, 1.0],
        Normal::South => [0.0, -1.0],
    }
}
