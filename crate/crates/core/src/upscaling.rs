//! Micro/macro comparisons, ε-sweeps and the limit-order study.

use std::time::Instant;

use rayon::prelude::*;

use crate::cell_solver::{
    effective_sweep, solve_stokes_cell, CellDiffusivity, EffectiveCoefficients,
};
use crate::data::{BoundaryData, Diffusivity};
use crate::error::{Error, Result};
use crate::geometry::{Edge, PerforatedDomain, UnitCell};
use crate::kinetics::{DissolutionMode, KineticsParams};
use crate::macro_solver::{macro_simulate, CellFlowEvolution, MacroProblem, MacroState};
use crate::micro::{micro_simulate, FlowData, InitialData, MicroProblem, MicroState};

/// Everything that defines a two-scale run except ε and the dissolution mode.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cell: UnitCell,
    pub extent: f64,
    pub inflow: Edge,
    pub outflow: Edge,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    pub kinetics: KineticsParams,
    pub boundary: BoundaryData,
    pub initial: InitialData,
    pub flow: FlowData,
    pub h: f64,
    pub t_end: f64,
    pub macro_resolution: usize,
    pub time_dependent_cells: bool,
}

impl Scenario {
    pub fn domain(&self, epsilon: f64) -> Result<PerforatedDomain> {
        PerforatedDomain::with_edges(&self.cell, epsilon, self.extent, self.inflow, self.outflow)
    }

    pub fn micro_problem(&self, epsilon: f64, kinetics: KineticsParams) -> Result<MicroProblem> {
        Ok(MicroProblem {
            domain: self.domain(epsilon)?,
            d1: self.d1,
            d2: self.d2,
            kinetics,
            boundary: self.boundary.clone(),
            initial: self.initial,
            flow: self.flow,
            h: self.h,
            t_end: self.t_end,
        })
    }

    /// Macro cell centres at the configured macro resolution.
    pub fn macro_points(&self) -> Vec<[f64; 2]> {
        let n = self.macro_resolution;
        let dx = self.extent / n as f64;
        (0..n * n)
            .map(|c| [((c % n) as f64 + 0.5) * dx, ((c / n) as f64 + 0.5) * dx])
            .collect()
    }

    /// Effective coefficients per macro cell, using the steady cell flow.
    pub fn effective(&self) -> Result<Vec<EffectiveCoefficients>> {
        let flow = if self.flow.is_at_rest() || self.flow.pressure_gradient == [0.0, 0.0] {
            None
        } else {
            Some(solve_stokes_cell(&self.cell, self.flow.mu, self.flow.force())?.q)
        };
        effective_sweep(
            &self.cell,
            &self.d1,
            &self.d2,
            flow.as_ref(),
            &self.macro_points(),
            self.extent,
        )
    }

    pub fn macro_problem_with(
        &self,
        kinetics: KineticsParams,
        coefficients: Vec<EffectiveCoefficients>,
    ) -> Result<MacroProblem> {
        let evolution = if self.time_dependent_cells && !self.flow.is_at_rest() {
            let c1 = CellDiffusivity::from_profile(&self.cell, &self.d1.cell_profile, 1.0)?;
            let c2 = CellDiffusivity::from_profile(&self.cell, &self.d2.cell_profile, 1.0)?;
            let (base, _) = crate::cell_solver::assemble_effective(&self.cell, &c1, &c2, None)?;
            let factors = self
                .macro_points()
                .iter()
                .map(|&x| self.d1.macro_factor.eval(x, self.extent))
                .collect();
            Some(CellFlowEvolution::new(&self.cell, &c1, base, &self.flow, self.h, factors)?)
        } else {
            None
        };
        Ok(MacroProblem {
            extent: self.extent,
            n: self.macro_resolution,
            coefficients,
            kinetics,
            boundary: self.boundary.clone(),
            inflow: self.inflow,
            outflow: self.outflow,
            initial: self.initial,
            h: self.h,
            t_end: self.t_end,
            evolution,
        })
    }

    pub fn macro_problem(&self, kinetics: KineticsParams) -> Result<MacroProblem> {
        self.macro_problem_with(kinetics, self.effective()?)
    }
}

/// Pore-restricted `L²` differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2_u: f64,
    pub l2_v: f64,
    pub l2_w: f64,
}

impl ErrorNorms {
    pub fn combined(&self) -> f64 {
        (self.l2_u.powi(2) + self.l2_v.powi(2) + self.l2_w.powi(2)).sqrt()
    }
}

/// Bilinear interpolation of a cell-centred `n x n` field on `(0, L)²`,
/// constant beyond the outermost cell centres.
pub fn interpolate(field: &[f64], n: usize, extent: f64, x: [f64; 2]) -> f64 {
    if n == 1 {
        return field[0];
    }
    let dx = extent / n as f64;
    let locate = |s: f64| -> (usize, f64) {
        let s = s / dx - 0.5;
        let i0 = (s.floor().max(0.0) as usize).min(n - 2);
        (i0, (s - i0 as f64).clamp(0.0, 1.0))
    };
    let (i, tx) = locate(x[0]);
    let (j, ty) = locate(x[1]);
    let f = |i: usize, j: usize| field[j * n + i];
    (1.0 - ty) * ((1.0 - tx) * f(i, j) + tx * f(i + 1, j))
        + ty * ((1.0 - tx) * f(i, j + 1) + tx * f(i + 1, j + 1))
}

fn check_times(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
        return Err(Error::Alignment(format!("snapshot times differ: {a} vs {b}")));
    }
    Ok(())
}

/// Micro `u_ε`, `v_ε` against the macro fields interpolated to pore-cell
/// centres, over the pore cells; `w` in the ε-weighted interface measure
/// divided by `|Y^p|`.
pub fn compare_micro_macro(
    micro: &MicroState,
    domain: &PerforatedDomain,
    mac: &MacroState,
    macro_n: usize,
    macro_extent: f64,
) -> Result<ErrorNorms> {
    if (domain.extent() - macro_extent).abs() > 1e-12 * macro_extent {
        return Err(Error::Alignment(format!(
            "micro extent {} vs macro extent {macro_extent}",
            domain.extent()
        )));
    }
    if mac.u.len() != macro_n * macro_n {
        return Err(Error::Alignment(format!(
            "macro state has {} cells, expected {}",
            mac.u.len(),
            macro_n * macro_n
        )));
    }
    if micro.u.len() != domain.n() * domain.n() || micro.w.len() != domain.gamma_faces().len() {
        return Err(Error::Alignment("micro state does not match the domain".into()));
    }
    check_times(micro.t, mac.t)?;
    let area = domain.dx() * domain.dx();
    let (mut su, mut sv) = (0.0, 0.0);
    for c in 0..domain.n() * domain.n() {
        if !domain.pore_mask()[c] {
            continue;
        }
        let x = domain.center(c);
        su += (micro.u[c] - interpolate(&mac.u, macro_n, macro_extent, x)).powi(2);
        sv += (micro.v[c] - interpolate(&mac.v, macro_n, macro_extent, x)).powi(2);
    }
    let mut sw = 0.0;
    for (f, &w) in domain.gamma_faces().iter().zip(&micro.w) {
        sw += f.length * (w - interpolate(&mac.w, macro_n, macro_extent, f.center)).powi(2);
    }
    sw *= domain.epsilon() / domain.cell().pore_volume();
    Ok(ErrorNorms {
        l2_u: (su * area).sqrt(),
        l2_v: (sv * area).sqrt(),
        l2_w: sw.sqrt(),
    })
}

/// Same norms between two micro states on one domain.
pub fn compare_micro_micro(a: &MicroState, b: &MicroState, domain: &PerforatedDomain) -> Result<ErrorNorms> {
    if a.u.len() != b.u.len() || a.w.len() != b.w.len() {
        return Err(Error::Alignment("micro states live on different domains".into()));
    }
    check_times(a.t, b.t)?;
    let area = domain.dx() * domain.dx();
    let sq = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    let sw: f64 = domain
        .gamma_faces()
        .iter()
        .zip(a.w.iter().zip(&b.w))
        .map(|(f, (p, q))| f.length * (p - q).powi(2))
        .sum();
    Ok(ErrorNorms {
        l2_u: (sq(&a.u, &b.u) * area).sqrt(),
        l2_v: (sq(&a.v, &b.v) * area).sqrt(),
        l2_w: (sw * domain.epsilon() / domain.cell().pore_volume()).sqrt(),
    })
}

/// Same norms between two macro states on one grid (`w` weighted by `|Γ|/|Y^p|`).
pub fn compare_macro_macro(a: &MacroState, b: &MacroState, extent: f64, surface_ratio: f64) -> Result<ErrorNorms> {
    if a.u.len() != b.u.len() {
        return Err(Error::Alignment("macro states live on different grids".into()));
    }
    check_times(a.t, b.t)?;
    let n = (a.u.len() as f64).sqrt().round();
    let area = (extent / n).powi(2);
    let sq = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    Ok(ErrorNorms {
        l2_u: (sq(&a.u, &b.u) * area).sqrt(),
        l2_v: (sq(&a.v, &b.v) * area).sqrt(),
        l2_w: (sq(&a.w, &b.w) * area * surface_ratio).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub epsilon: f64,
    pub delta: f64,
    pub norms: ErrorNorms,
    pub runtime_seconds: f64,
}

/// Rows sorted by `(epsilon, delta)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.epsilon
                .total_cmp(&b.epsilon)
                .then(a.delta.total_cmp(&b.delta))
        });
    }

    /// True when each error column strictly decreases as ε decreases.
    pub fn strictly_decreasing(&self) -> [bool; 3] {
        let mut by_eps = self.rows.clone();
        by_eps.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let dec = |f: fn(&ErrorNorms) -> f64| by_eps.windows(2).all(|w| f(&w[1].norms) < f(&w[0].norms));
        [dec(|n| n.l2_u), dec(|n| n.l2_v), dec(|n| n.l2_w)]
    }
}

fn with_delta(k: &KineticsParams, delta: f64) -> KineticsParams {
    k.with_delta(delta).with_mode(DissolutionMode::Regularized)
}

/// One micro run per ε against a single macro run, both with the scenario's
/// kinetics.
pub fn epsilon_sweep(scenario: &Scenario, eps_list: &[f64]) -> Result<ErrorTable> {
    if eps_list.is_empty() {
        return Ok(ErrorTable::default());
    }
    let kin = scenario.kinetics;
    let macro_state = macro_simulate(scenario.macro_problem(kin)?)?;
    let rows: Result<Vec<ErrorRow>> = eps_list
        .par_iter()
        .enumerate()
        .map(|(level, &eps)| {
            let start = Instant::now();
            let problem = scenario.micro_problem(eps, kin)?;
            let domain = problem.domain.clone();
            let micro = micro_simulate(problem).map_err(|e| Error::AtLevel {
                level,
                source: Box::new(e),
            })?;
            let norms = compare_micro_macro(
                &micro,
                &domain,
                &macro_state,
                scenario.macro_resolution,
                scenario.extent,
            )?;
            Ok(ErrorRow {
                epsilon: eps,
                delta: kin.delta,
                norms,
                runtime_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect();
    let mut table = ErrorTable { rows: rows? };
    table.sort();
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub delta: f64,
    pub epsilon: f64,
    pub norms: ErrorNorms,
}

/// Outcome of the limit-order study.
///
/// Along the diagonal `(δ_k, ε_k)`, path A takes δ → 0 first (micro problem
/// with the exact dissolution graph at `ε_k`) and path B takes ε → 0 first
/// (macro problem with `ψ_{δ_k}`); `diagonal[k]` is the distance between the
/// two. `control` repeats path B with δ frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    pub diagonal: Vec<GapRow>,
    pub control: Vec<GapRow>,
    pub control_delta: f64,
    /// Path A at the smallest ε: regularized micro runs against the exact-graph micro run.
    pub path_a_delta_sweep: Vec<GapRow>,
    /// Path B's second limit: macro `ψ_δ` runs against the macro exact-graph run.
    pub path_b_delta_sweep: Vec<GapRow>,
    /// Distance between the two terminal states (micro exact graph at the
    /// smallest ε against macro exact graph).
    pub terminal_gap: ErrorNorms,
}

impl CommutationReport {
    pub fn diagonal_decreasing(&self) -> bool {
        self.diagonal
            .windows(2)
            .all(|w| w[1].norms.combined() < w[0].norms.combined())
    }

    pub fn control_nondecreasing(&self) -> bool {
        self.control
            .windows(2)
            .all(|w| w[1].norms.combined() >= w[0].norms.combined())
    }
}

/// Runs the diagonal `(delta_list[k], eps_list[k])` study.
pub fn limit_order_study(
    scenario: &Scenario,
    eps_list: &[f64],
    delta_list: &[f64],
    control_delta: f64,
) -> Result<CommutationReport> {
    if eps_list.is_empty() || eps_list.len() != delta_list.len() {
        return Err(Error::config(
            "sweep.deltas",
            format!(
                "need equally many epsilons and deltas, got {} and {}",
                eps_list.len(),
                delta_list.len()
            ),
        ));
    }
    let base = scenario.kinetics;
    let event = base.with_mode(DissolutionMode::Event);
    let coefficients = scenario.effective()?;
    let run_macro = |kin: KineticsParams| -> Result<MacroState> {
        macro_simulate(scenario.macro_problem_with(kin, coefficients.clone())?)
    };
    let n = scenario.macro_resolution;
    let ext = scenario.extent;

    // path A terminal states per level
    let micro_event: Vec<(PerforatedDomain, MicroState)> = eps_list
        .par_iter()
        .map(|&eps| {
            let p = scenario.micro_problem(eps, event)?;
            let d = p.domain.clone();
            Ok((d, micro_simulate(p)?))
        })
        .collect::<Result<_>>()?;
    let macro_delta: Vec<MacroState> = delta_list
        .par_iter()
        .map(|&d| run_macro(with_delta(&base, d)))
        .collect::<Result<_>>()?;
    let macro_control = run_macro(with_delta(&base, control_delta))?;
    let macro_event = run_macro(event)?;

    let mut diagonal = Vec::new();
    let mut control = Vec::new();
    for (k, (dom, micro)) in micro_event.iter().enumerate() {
        diagonal.push(GapRow {
            delta: delta_list[k],
            epsilon: eps_list[k],
            norms: compare_micro_macro(micro, dom, &macro_delta[k], n, ext)?,
        });
        control.push(GapRow {
            delta: control_delta,
            epsilon: eps_list[k],
            norms: compare_micro_macro(micro, dom, &macro_control, n, ext)?,
        });
    }

    let last = eps_list.len() - 1;
    let (dom_min, micro_min) = &micro_event[last];
    let eps_min = eps_list[last];
    let path_a_delta_sweep = delta_list
        .par_iter()
        .map(|&d| {
            let s = micro_simulate(scenario.micro_problem(eps_min, with_delta(&base, d))?)?;
            Ok(GapRow {
                delta: d,
                epsilon: eps_min,
                norms: compare_micro_micro(&s, micro_min, dom_min)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio = coefficients[0].surface_ratio();
    let path_b_delta_sweep = delta_list
        .iter()
        .zip(&macro_delta)
        .map(|(&d, s)| {
            Ok(GapRow {
                delta: d,
                epsilon: 0.0,
                norms: compare_macro_macro(s, &macro_event, ext, ratio)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let terminal_gap = compare_micro_macro(micro_min, dom_min, &macro_event, n, ext)?;
    Ok(CommutationReport {
        diagonal,
        control,
        control_delta,
        path_a_delta_sweep,
        path_b_delta_sweep,
        terminal_gap,
    })
}
