//! The homogenized system on `Ω = (0, L)²`.
//!
//! Cell-centred finite volumes with a tensor-diffusion stencil (two-point
//! flux plus a tangential-gradient correction for off-diagonal entries),
//! upwinded drift `q̄ − q̃₀`, and one mineral mass per macro cell that is
//! uniform along `Γ`. Reaction and boundary data are explicit, transport
//! implicit, as in the micro solver.

use crate::cell_solver::{update_flow, CellDiffusivity, CorrectorSystem, EffectiveCoefficients};
use crate::data::{BoundaryData, MacroProfile};
use crate::error::{Error, Result};
use crate::geometry::{Edge, UnitCell};
use crate::kinetics::{surface_ode_step, KineticsParams};
use crate::linalg::{bicgstab, pcg, CsrMatrix, SolverOptions};
use crate::mac::{FaceField, MacGrid, StokesStepper};
use crate::micro::{check_kinetics_step, step_count, FlowData, InitialData};

pub const MACRO_TOL: f64 = 1e-13;

/// Sink density `P = (|Γ|/|Y^p|) ∂w/∂t`.
pub fn sink_term(w_rate: f64, gamma_measure: f64, porosity: f64) -> f64 {
    gamma_measure / porosity * w_rate
}

/// Largest step for which the explicit sink cannot drive `u` or `v` negative.
pub fn macro_step_limit(coefficients: &[EffectiveCoefficients], kin: &KineticsParams) -> f64 {
    let ratio = coefficients
        .iter()
        .map(|c| c.surface_ratio())
        .fold(0.0f64, f64::max);
    if ratio == 0.0 {
        return f64::INFINITY;
    }
    4.0 / (ratio * kin.k_f * kin.k1.max(kin.k2))
}

/// Evolves the cell flow in time and refreshes `q̄`, `q̃₀` every step.
#[derive(Debug, Clone)]
pub struct CellFlowEvolution {
    stepper: StokesStepper,
    correctors: CorrectorSystem,
    q: FaceField,
    force: [f64; 2],
    base: EffectiveCoefficients,
    /// `m₁(x)` per macro cell; the drift scales with it.
    factors: Vec<f64>,
}

impl CellFlowEvolution {
    /// `d1_cell` is the cell profile of `D₁` (without macro factor), `base`
    /// the coefficients for that profile.
    pub fn new(
        cell: &UnitCell,
        d1_cell: &CellDiffusivity,
        base: EffectiveCoefficients,
        flow: &FlowData,
        h: f64,
        factors: Vec<f64>,
    ) -> Result<Self> {
        let grid = MacGrid::from_cell(cell);
        let stepper = StokesStepper::new(grid.clone(), h, flow.mu)?;
        let mut q = FaceField::zeros(&grid);
        let n = grid.n();
        for j in 0..n {
            for i in 0..n {
                if grid.xface_active(i, j) {
                    q.u[j * n + i] = flow.initial[0];
                }
                if grid.yface_active(i, j) {
                    q.v[j * n + i] = flow.initial[1];
                }
            }
        }
        let q = stepper.system().project(&q)?.0;
        Ok(CellFlowEvolution {
            stepper,
            correctors: CorrectorSystem::new(cell, d1_cell),
            q,
            force: flow.force(),
            base,
            factors,
        })
    }

    fn coefficients(&self) -> Result<Vec<EffectiveCoefficients>> {
        let cell_level = update_flow(&self.base, &self.correctors, &self.q)?;
        Ok(self
            .factors
            .iter()
            .map(|&m| EffectiveCoefficients {
                q_tilde0: [cell_level.q_tilde0[0] * m, cell_level.q_tilde0[1] * m],
                q_bar: cell_level.q_bar,
                ..cell_level
            })
            .collect())
    }

    fn advance(&mut self) -> Result<()> {
        self.stepper.step(&mut self.q, self.force)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MacroProblem {
    pub extent: f64,
    pub n: usize,
    /// One entry per macro cell (`j * n + i`); the tensor parts, porosity and
    /// `|Γ|` are fixed, the flow parts may be refreshed by `evolution`.
    pub coefficients: Vec<EffectiveCoefficients>,
    pub kinetics: KineticsParams,
    pub boundary: BoundaryData,
    pub inflow: Edge,
    pub outflow: Edge,
    pub initial: InitialData,
    pub h: f64,
    pub t_end: f64,
    pub evolution: Option<CellFlowEvolution>,
}

impl MacroProblem {
    pub fn validate(&self) -> Result<usize> {
        self.kinetics.validate()?;
        let steps = step_count(self.t_end, self.h)?;
        check_kinetics_step(self.h, &self.kinetics)?;
        if self.n == 0 {
            return Err(Error::config("geometry.macro_resolution", "must be positive"));
        }
        if self.coefficients.len() != self.n * self.n {
            return Err(Error::Argument(format!(
                "{} coefficient sets for {} macro cells",
                self.coefficients.len(),
                self.n * self.n
            )));
        }
        if self.inflow == self.outflow {
            return Err(Error::config("geometry.outflow_edge", "coincides with the inflow edge"));
        }
        let limit = macro_step_limit(&self.coefficients, &self.kinetics);
        if self.h > limit {
            return Err(Error::config(
                "time.h",
                format!("sink restriction requires h <= {limit}, got {}", self.h),
            ));
        }
        Ok(steps)
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn center(&self, c: usize) -> [f64; 2] {
        let dx = self.dx();
        [((c % self.n) as f64 + 0.5) * dx, ((c / self.n) as f64 + 0.5) * dx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    /// Sink density of the last step.
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroDiagnostics {
    pub step: usize,
    pub t: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    pub l2_w: f64,
    pub energy_u: f64,
    pub energy_v: f64,
    pub l2_p: f64,
    pub max_abs_p: f64,
    pub max_w: f64,
    pub min_u: f64,
    pub min_v: f64,
    pub min_w: f64,
    /// `∫ (|Y^p| u + |Γ| w) dx`.
    pub combined_u: f64,
    pub combined_v: f64,
    pub iterations: usize,
}

struct Operator {
    matrix: CsrMatrix,
    diag: Vec<f64>,
    symmetric: bool,
}

pub struct MacroSolver {
    problem: MacroProblem,
    steps: usize,
    state: MacroState,
    operators: Option<[Operator; 2]>,
    energy: [f64; 2],
    last_iterations: usize,
}

impl MacroSolver {
    pub fn new(mut problem: MacroProblem) -> Result<Self> {
        if let Some(ev) = &problem.evolution {
            let fresh = ev.coefficients()?;
            problem.coefficients = fresh;
        }
        let steps = problem.validate()?;
        let nn = problem.n * problem.n;
        let sample = |f: &MacroProfile| -> Vec<f64> {
            (0..nn).map(|c| f.eval(problem.center(c), problem.extent)).collect()
        };
        let state = MacroState {
            step: 0,
            t: 0.0,
            u: sample(&problem.initial.u0),
            v: sample(&problem.initial.v0),
            w: sample(&problem.initial.w0),
            z: vec![0.0; nn],
            p: vec![0.0; nn],
        };
        Ok(MacroSolver {
            problem,
            steps,
            state,
            operators: None,
            energy: [0.0, 0.0],
            last_iterations: 0,
        })
    }

    pub fn problem(&self) -> &MacroProblem {
        &self.problem
    }

    pub fn state(&self) -> &MacroState {
        &self.state
    }

    pub fn into_state(self) -> MacroState {
        self.state
    }

    pub fn total_steps(&self) -> usize {
        self.steps
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.steps
    }

    fn assemble(&self, species: usize) -> Operator {
        let pb = &self.problem;
        let n = pb.n;
        let dx = pb.dx();
        let tensor = |c: usize| -> [[f64; 2]; 2] {
            if species == 0 {
                pb.coefficients[c].a
            } else {
                pb.coefficients[c].b
            }
        };
        let mut trip = Vec::with_capacity(9 * n * n);
        let mass = dx * dx / pb.h;
        for c in 0..n * n {
            trip.push((c, c, mass));
        }
        let mut symmetric = true;
        // ∂_t u at cell c, tangential derivative along `axis` times dx as
        // weights on neighbouring cells (one-sided at walls)
        let tangential = |i: usize, j: usize, axis: usize| -> Vec<(usize, f64)> {
            let (lo, hi) = if axis == 0 {
                (
                    (i > 0).then(|| j * n + i - 1),
                    (i + 1 < n).then(|| j * n + i + 1),
                )
            } else {
                (
                    (j > 0).then(|| (j - 1) * n + i),
                    (j + 1 < n).then(|| (j + 1) * n + i),
                )
            };
            let c = j * n + i;
            match (lo, hi) {
                (Some(l), Some(h)) => vec![(h, 0.5), (l, -0.5)],
                (None, Some(h)) => vec![(h, 1.0), (c, -1.0)],
                (Some(l), None) => vec![(c, 1.0), (l, -1.0)],
                (None, None) => vec![],
            }
        };
        for j in 0..n {
            for i in 0..n {
                let a = j * n + i;
                for axis in 0..2 {
                    let (b, ib, jb) = if axis == 0 {
                        if i + 1 >= n {
                            continue;
                        }
                        (a + 1, i + 1, j)
                    } else {
                        if j + 1 >= n {
                            continue;
                        }
                        (a + n, i, j + 1)
                    };
                    let (ta, tb) = (tensor(a), tensor(b));
                    let ann = {
                        let (x, y) = (ta[axis][axis], tb[axis][axis]);
                        2.0 * x * y / (x + y)
                    };
                    let other = 1 - axis;
                    let ant = 0.5 * (ta[axis][other] + tb[axis][other]);
                    // flux a → b through a face of length dx:
                    // −ann (u_b − u_a) − ant dx ∂_t u + β u_upwind dx
                    trip.push((a, a, ann));
                    trip.push((b, b, ann));
                    trip.push((a, b, -ann));
                    trip.push((b, a, -ann));
                    if ant != 0.0 {
                        symmetric = false;
                        for (cell, wgt) in tangential(i, j, other)
                            .into_iter()
                            .map(|(c, w)| (c, 0.5 * w))
                            .chain(tangential(ib, jb, other).into_iter().map(|(c, w)| (c, 0.5 * w)))
                        {
                            trip.push((a, cell, -ant * wgt));
                            trip.push((b, cell, ant * wgt));
                        }
                    }
                    let beta = 0.5 * (pb.coefficients[a].drift()[axis] + pb.coefficients[b].drift()[axis]) * dx;
                    if beta != 0.0 {
                        symmetric = false;
                        let (out, inn) = (beta.max(0.0), beta.min(0.0));
                        trip.push((a, a, out));
                        trip.push((a, b, inn));
                        trip.push((b, a, -out));
                        trip.push((b, b, -inn));
                    }
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(n * n, trip);
        let diag = matrix.diagonal();
        Operator {
            matrix,
            diag,
            symmetric,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let level = self.state.step + 1;
        let at_level = |e: Error| Error::AtLevel {
            level,
            source: Box::new(e),
        };
        let mut refreshed = false;
        if let Some(ev) = self.problem.evolution.as_mut() {
            ev.advance().map_err(at_level)?;
            self.problem.coefficients = ev.coefficients().map_err(at_level)?;
            refreshed = true;
        }
        if refreshed || self.operators.is_none() {
            self.operators = Some([self.assemble(0), self.assemble(1)]);
        }
        let pb = &self.problem;
        let h = pb.h;
        let n = pb.n;
        let dx = pb.dx();
        let t_old = self.state.t;
        let mass = dx * dx / h;
        let mut rhs_u: Vec<f64> = self.state.u.iter().map(|u| mass * u).collect();
        let mut rhs_v: Vec<f64> = self.state.v.iter().map(|v| mass * v).collect();
        for c in 0..n * n {
            let s = surface_ode_step(self.state.w[c], self.state.u[c], self.state.v[c], h, &pb.kinetics)
                .map_err(at_level)?;
            let eff = &pb.coefficients[c];
            let p = sink_term((s.w - self.state.w[c]) / h, eff.gamma_measure, eff.porosity);
            rhs_u[c] -= dx * dx * p;
            rhs_v[c] -= dx * dx * p;
            self.state.w[c] = s.w;
            self.state.z[c] = s.z;
            self.state.p[c] = p;
        }
        let bd = &pb.boundary;
        for (edge, fu, fv) in [
            (pb.inflow, bd.d.at(t_old), bd.g.at(t_old)),
            (pb.outflow, bd.e.at(t_old), bd.h.at(t_old)),
        ] {
            for (i, j) in edge.cells(n) {
                let c = j * n + i;
                let por = pb.coefficients[c].porosity;
                rhs_u[c] -= fu / por * dx;
                rhs_v[c] -= fv / por * dx;
            }
        }
        let ops = self.operators.as_ref().unwrap();
        let mut iterations = 0;
        for (s, rhs) in [rhs_u, rhs_v].into_iter().enumerate() {
            let x = if s == 0 { &mut self.state.u } else { &mut self.state.v };
            let op = &ops[s];
            let opts = SolverOptions::default().tol(MACRO_TOL).max_iter(20_000);
            let stats = if op.symmetric {
                pcg(&op.matrix, &rhs, x, Some(&op.diag), opts, "macro transport")
            } else {
                bicgstab(&op.matrix, &rhs, x, Some(&op.diag), opts, "macro transport")
            }
            .map_err(at_level)?;
            iterations += stats.iterations;
        }
        self.energy[0] += h * self.grad_norm_sq(&self.state.u);
        self.energy[1] += h * self.grad_norm_sq(&self.state.v);
        self.state.step = level;
        self.state.t = level as f64 * h;
        self.last_iterations = iterations;
        Ok(())
    }

    fn grad_norm_sq(&self, f: &[f64]) -> f64 {
        let n = self.problem.n;
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let c = j * n + i;
                if i + 1 < n {
                    s += (f[c + 1] - f[c]).powi(2);
                }
                if j + 1 < n {
                    s += (f[c + n] - f[c]).powi(2);
                }
            }
        }
        s
    }

    pub fn diagnostics(&self) -> MacroDiagnostics {
        let pb = &self.problem;
        let area = pb.dx() * pb.dx();
        let s = &self.state;
        let l2 = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() * area).sqrt();
        let min = |x: &[f64]| x.iter().cloned().fold(f64::INFINITY, f64::min);
        let combined = |x: &[f64]| {
            x.iter()
                .zip(&s.w)
                .zip(&pb.coefficients)
                .map(|((c, w), e)| e.porosity * c + e.gamma_measure * w)
                .sum::<f64>()
                * area
        };
        MacroDiagnostics {
            step: s.step,
            t: s.t,
            l2_u: l2(&s.u),
            l2_v: l2(&s.v),
            l2_w: l2(&s.w),
            energy_u: self.energy[0],
            energy_v: self.energy[1],
            l2_p: l2(&s.p),
            max_abs_p: s.p.iter().fold(0.0f64, |m, p| m.max(p.abs())),
            max_w: s.w.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            min_u: min(&s.u),
            min_v: min(&s.v),
            min_w: min(&s.w),
            combined_u: combined(&s.u),
            combined_v: combined(&s.v),
            iterations: self.last_iterations,
        }
    }

    pub fn run_with<F>(&mut self, mut observe: F) -> Result<()>
    where
        F: FnMut(&MacroSolver) -> Result<()>,
    {
        observe(self)?;
        while !self.is_finished() {
            self.step()?;
            observe(self)?;
        }
        Ok(())
    }
}

pub fn macro_simulate(problem: MacroProblem) -> Result<MacroState> {
    let mut solver = MacroSolver::new(problem)?;
    solver.run_with(|_| Ok(()))?;
    Ok(solver.into_state())
}
