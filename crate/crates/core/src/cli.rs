//! Subcommand drivers shared by the binary and the examples.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cell_solver::{assemble_effective, CellDiffusivity, EffectiveCoefficients};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::io::{ensure_dir, write_text, write_vtk, Csv};
use crate::kinetics::{langmuir_rate, psi_delta};
use crate::macro_solver::MacroSolver;
use crate::micro::MicroSolver;
use crate::upscaling::{epsilon_sweep, limit_order_study, CommutationReport, ErrorTable, GapRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Cell,
    Micro,
    Macro,
    Sweep,
    Commute,
    KineticsTable,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Cell,
        Command::Micro,
        Command::Macro,
        Command::Sweep,
        Command::Commute,
        Command::KineticsTable,
    ];
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Cell => "cell",
            Command::Micro => "micro",
            Command::Macro => "macro",
            Command::Sweep => "sweep",
            Command::Commute => "commute",
            Command::KineticsTable => "kinetics-table",
        })
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

/// Files written and the outcome of any built-in trend checks.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub checks: Vec<(String, bool)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn write_csv(&mut self, dir: &Path, name: &str, csv: &Csv) -> Result<()> {
        let path = dir.join(name);
        csv.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        let path = dir.join(name);
        write_text(&path, text)?;
        self.files.push(path);
        Ok(())
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => EXIT_OK,
        Ok(_) => EXIT_ASSERTION,
        Err(e) if e.is_config() => EXIT_CONFIG,
        Err(_) => EXIT_SOLVER,
    }
}

/// Runs one subcommand, writing its artifacts and `resolved_config.toml` into `out`.
pub fn run(command: Command, cfg: &SimulationConfig, out: &Path) -> Result<Outcome> {
    ensure_dir(out)?;
    let mut outcome = Outcome::default();
    outcome.write_text(out, "resolved_config.toml", &cfg.emit())?;
    match command {
        Command::Cell => run_cell(cfg, out, &mut outcome)?,
        Command::Micro => run_micro(cfg, out, &mut outcome)?,
        Command::Macro => run_macro(cfg, out, &mut outcome)?,
        Command::Sweep => run_sweep(cfg, out, &mut outcome)?,
        Command::Commute => run_commute(cfg, out, &mut outcome)?,
        Command::KineticsTable => run_kinetics_table(cfg, out, &mut outcome)?,
    }
    Ok(outcome)
}

pub fn geometry_csv(cfg: &SimulationConfig, epsilons: &[f64]) -> Result<Csv> {
    let cell = cfg.cell()?;
    let mut csv = Csv::new(&["epsilon", "pore_volume", "gamma_measure", "eps_times_gamma_star"]);
    let mut seen: Vec<f64> = Vec::new();
    for &eps in epsilons {
        if seen.contains(&eps) {
            continue;
        }
        seen.push(eps);
        let dom = crate::geometry::PerforatedDomain::with_edges(
            &cell,
            eps,
            cfg.geometry.extent,
            cfg.geometry.inflow_edge,
            cfg.geometry.outflow_edge,
        )?;
        csv.row(&[eps, cell.pore_volume(), cell.boundary_measure(), dom.eps_gamma_length()]);
    }
    Ok(csv)
}

pub fn tensors_csv(points: &[[f64; 2]], coefficients: &[EffectiveCoefficients]) -> Csv {
    let mut csv = Csv::new(&[
        "x1", "x2", "a11", "a12", "a21", "a22", "b11", "b12", "b21", "b22", "qbar1", "qbar2",
        "qt01", "qt02", "porosity",
    ]);
    for (x, e) in points.iter().zip(coefficients) {
        csv.row(&[
            x[0],
            x[1],
            e.a[0][0],
            e.a[0][1],
            e.a[1][0],
            e.a[1][1],
            e.b[0][0],
            e.b[0][1],
            e.b[1][0],
            e.b[1][1],
            e.q_bar[0],
            e.q_bar[1],
            e.q_tilde0[0],
            e.q_tilde0[1],
            e.porosity,
        ]);
    }
    csv
}

fn run_cell(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let mut eps = vec![cfg.geometry.epsilon];
    eps.extend(&cfg.sweep.epsilons);
    outcome.write_csv(out, "geometry.csv", &geometry_csv(cfg, &eps)?)?;
    let scenario = cfg.scenario()?;
    let coefficients = scenario.effective()?;
    outcome.write_csv(out, "tensors.csv", &tensors_csv(&scenario.macro_points(), &coefficients))?;
    if cfg.output.vtk {
        let cell = &scenario.cell;
        let c1 = CellDiffusivity::from_profile(cell, &cfg.physics.d1.cell_profile, 1.0)?;
        let c2 = CellDiffusivity::from_profile(cell, &cfg.physics.d2.cell_profile, 1.0)?;
        let (_, sets) = assemble_effective(cell, &c1, &c2, None)?;
        let mask: Vec<f64> = cell.pore_mask().iter().map(|&p| p as u8 as f64).collect();
        let path = out.join("cell_correctors.vtk");
        write_vtk(
            &path,
            "cell correctors",
            cell.resolution(),
            cell.spacing(),
            &[("pore", &mask), ("k1", &sets[0].k[0]), ("k2", &sets[0].k[1]), ("k0", &sets[0].k0)],
        )?;
        outcome.files.push(path);
    }
    Ok(())
}

fn is_snapshot(step: usize, total: usize, stride: usize) -> bool {
    step == 0 || step == total || (stride > 0 && step.is_multiple_of(stride))
}

fn run_micro(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    outcome.write_csv(out, "geometry.csv", &geometry_csv(cfg, &[cfg.geometry.epsilon])?)?;
    let problem = cfg.scenario()?.micro_problem(cfg.geometry.epsilon, cfg.kinetics)?;
    let mut solver = MicroSolver::new(problem)?;
    let total = solver.total_steps();
    let stride = cfg.time.snapshot_stride;
    let mut diag = Csv::new(&[
        "step", "t", "l2_u", "l2_v", "energy_u", "energy_v", "l2_q", "max_w", "min_u", "min_v",
        "min_w", "mobile_u", "mobile_v", "mineral", "combined_u", "combined_v", "iterations",
    ]);
    let mut files = Vec::new();
    solver.run_with(|s| {
        let d = s.diagnostics();
        diag.row_with_id(
            d.step,
            &[
                d.t,
                d.l2_u,
                d.l2_v,
                d.energy_u,
                d.energy_v,
                d.l2_q,
                d.max_w,
                d.min_u,
                d.min_v,
                d.min_w,
                d.mass.mobile_u,
                d.mass.mobile_v,
                d.mass.mineral,
                d.mass.combined_u,
                d.mass.combined_v,
                d.iterations as f64,
            ],
        );
        if is_snapshot(d.step, total, stride) {
            files.extend(write_micro_snapshot(s, out, cfg.output.vtk)?);
        }
        Ok(())
    })?;
    outcome.files.extend(files);
    outcome.write_csv(out, "micro_diag.csv", &diag)
}

fn write_micro_snapshot(s: &MicroSolver, out: &Path, vtk: bool) -> Result<Vec<PathBuf>> {
    let dom = s.domain();
    let st = s.state();
    let mut fields = Csv::new(&["x1", "x2", "u", "v"]);
    for c in 0..dom.n() * dom.n() {
        if dom.pore_mask()[c] {
            let x = dom.center(c);
            fields.row(&[x[0], x[1], st.u[c], st.v[c]]);
        }
    }
    let mut boundary = Csv::new(&["face_id", "x1", "x2", "w", "z_used"]);
    for (id, (f, (w, z))) in dom.gamma_faces().iter().zip(st.w.iter().zip(&st.z)).enumerate() {
        boundary.row_with_id(id, &[f.center[0], f.center[1], *w, *z]);
    }
    let mut paths = vec![
        out.join(format!("micro_fields_{}.csv", st.step)),
        out.join(format!("micro_boundary_{}.csv", st.step)),
    ];
    fields.write(&paths[0])?;
    boundary.write(&paths[1])?;
    if vtk {
        let mask: Vec<f64> = dom.pore_mask().iter().map(|&p| p as u8 as f64).collect();
        let path = out.join(format!("micro_{}.vtk", st.step));
        write_vtk(&path, "micro fields", dom.n(), dom.dx(), &[("pore", &mask), ("u", &st.u), ("v", &st.v)])?;
        paths.push(path);
    }
    Ok(paths)
}

fn run_macro(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let scenario = cfg.scenario()?;
    let coefficients = scenario.effective()?;
    outcome.write_csv(out, "tensors.csv", &tensors_csv(&scenario.macro_points(), &coefficients))?;
    let problem = scenario.macro_problem_with(cfg.kinetics, coefficients)?;
    let mut solver = MacroSolver::new(problem)?;
    let total = solver.total_steps();
    let stride = cfg.time.snapshot_stride;
    let mut diag = Csv::new(&[
        "step", "t", "l2_u", "l2_v", "l2_w", "energy_u", "energy_v", "l2_p", "max_abs_p", "max_w",
        "min_u", "min_v", "min_w", "combined_u", "combined_v", "iterations",
    ]);
    let mut files = Vec::new();
    solver.run_with(|s| {
        let d = s.diagnostics();
        diag.row_with_id(
            d.step,
            &[
                d.t,
                d.l2_u,
                d.l2_v,
                d.l2_w,
                d.energy_u,
                d.energy_v,
                d.l2_p,
                d.max_abs_p,
                d.max_w,
                d.min_u,
                d.min_v,
                d.min_w,
                d.combined_u,
                d.combined_v,
                d.iterations as f64,
            ],
        );
        if is_snapshot(d.step, total, stride) {
            let pb = s.problem();
            let st = s.state();
            let mut csv = Csv::new(&["x1", "x2", "u", "v", "w", "P", "z_used"]);
            for c in 0..pb.n * pb.n {
                let x = pb.center(c);
                csv.row(&[x[0], x[1], st.u[c], st.v[c], st.w[c], st.p[c], st.z[c]]);
            }
            let path = out.join(format!("macro_fields_{}.csv", st.step));
            csv.write(&path)?;
            files.push(path);
            if cfg.output.vtk {
                let path = out.join(format!("macro_{}.vtk", st.step));
                write_vtk(
                    &path,
                    "macro fields",
                    pb.n,
                    pb.dx(),
                    &[("u", &st.u), ("v", &st.v), ("w", &st.w), ("P", &st.p)],
                )?;
                files.push(path);
            }
        }
        Ok(())
    })?;
    outcome.files.extend(files);
    outcome.write_csv(out, "macro_diag.csv", &diag)
}

fn trend_ok(values: &[f64], tol: f64, decreasing: bool) -> bool {
    if values.iter().all(|&v| v <= tol) {
        return true;
    }
    values.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] >= w[0] })
}

fn run_sweep(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    outcome.write_csv(out, "geometry.csv", &geometry_csv(cfg, &cfg.sweep.epsilons)?)?;
    let mut scenario = cfg.scenario()?;
    scenario.macro_resolution = cfg.sweep_macro_resolution();
    let table = epsilon_sweep(&scenario, &cfg.sweep.epsilons)?;
    outcome.write_csv(out, "errors.csv", &errors_csv(&table))?;
    // rows are sorted by ascending ε; the trend is read as ε decreases
    let col = |f: fn(&crate::upscaling::ErrorNorms) -> f64| -> Vec<f64> {
        table.rows.iter().rev().map(|r| f(&r.norms)).collect()
    };
    let tol = cfg.sweep.zero_tolerance;
    outcome.checks = vec![
        ("L2_u strictly decreasing in epsilon".into(), trend_ok(&col(|n| n.l2_u), tol, true)),
        ("L2_v strictly decreasing in epsilon".into(), trend_ok(&col(|n| n.l2_v), tol, true)),
        ("L2_w strictly decreasing in epsilon".into(), trend_ok(&col(|n| n.l2_w), tol, true)),
    ];
    let mut report = String::new();
    writeln!(report, "epsilon sweep").unwrap();
    writeln!(
        report,
        "metric: L2 over the pore cells of the micro grid; macro fields bilinearly interpolated to pore-cell centres"
    )
    .unwrap();
    writeln!(
        report,
        "w: L2 in the epsilon-weighted interface measure, divided by the cell porosity {}",
        scenario.cell.pore_volume()
    )
    .unwrap();
    writeln!(report, "macro resolution: {}", scenario.macro_resolution).unwrap();
    writeln!(report, "delta: {}  mode: {}", cfg.kinetics.delta, cfg.kinetics.mode).unwrap();
    writeln!(report, "zero tolerance: {tol:e}\n").unwrap();
    writeln!(report, "{}", errors_csv(&table).as_str()).unwrap();
    append_checks(&mut report, &outcome.checks);
    outcome.write_text(out, "report.txt", &report)
}

pub fn errors_csv(table: &ErrorTable) -> Csv {
    let mut csv = Csv::new(&["epsilon", "delta", "L2_u", "L2_v", "L2_w", "runtime_seconds"]);
    for r in &table.rows {
        csv.row(&[r.epsilon, r.delta, r.norms.l2_u, r.norms.l2_v, r.norms.l2_w, r.runtime_seconds]);
    }
    csv
}

fn append_checks(report: &mut String, checks: &[(String, bool)]) {
    for (name, ok) in checks {
        writeln!(report, "{} {name}", if *ok { "PASS" } else { "FAIL" }).unwrap();
    }
}

pub fn commutation_csv(report: &CommutationReport) -> Csv {
    let mut csv = Csv::new(&["delta", "epsilon", "gap_u", "gap_v", "gap_w"]);
    for r in report.diagonal.iter().chain(&report.control) {
        csv.row(&[r.delta, r.epsilon, r.norms.l2_u, r.norms.l2_v, r.norms.l2_w]);
    }
    csv
}

fn gap_lines(report: &mut String, title: &str, rows: &[GapRow]) {
    writeln!(report, "{title}").unwrap();
    writeln!(report, "  delta, epsilon, gap_u, gap_v, gap_w, combined").unwrap();
    for r in rows {
        writeln!(
            report,
            "  {}, {}, {}, {}, {}, {}",
            r.delta,
            r.epsilon,
            r.norms.l2_u,
            r.norms.l2_v,
            r.norms.l2_w,
            r.norms.combined()
        )
        .unwrap();
    }
}

fn run_commute(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let mut scenario = cfg.scenario()?;
    scenario.macro_resolution = cfg.sweep_macro_resolution();
    let study = limit_order_study(
        &scenario,
        &cfg.sweep.epsilons,
        &cfg.sweep.deltas,
        cfg.sweep.control_delta,
    )?;
    outcome.write_csv(out, "commutation.csv", &commutation_csv(&study))?;
    let tol = cfg.sweep.zero_tolerance;
    let diag: Vec<f64> = study.diagonal.iter().map(|r| r.norms.combined()).collect();
    let ctrl: Vec<f64> = study.control.iter().map(|r| r.norms.combined()).collect();
    outcome.checks = vec![
        ("diagonal gap decreasing".into(), trend_ok(&diag, tol, true)),
        ("control gap non-decreasing".into(), trend_ok(&ctrl, tol, false)),
    ];
    let mut report = String::new();
    writeln!(report, "limit-order study").unwrap();
    writeln!(
        report,
        "path A (delta first): micro problem with the exact dissolution graph at epsilon_k"
    )
    .unwrap();
    writeln!(
        report,
        "path B (epsilon first): homogenized problem with psi_delta at delta_k"
    )
    .unwrap();
    writeln!(report, "gap: pore-restricted L2 distance, combined over u, v, w").unwrap();
    writeln!(report, "macro resolution: {}\n", scenario.macro_resolution).unwrap();
    gap_lines(&mut report, "diagonal", &study.diagonal);
    gap_lines(
        &mut report,
        &format!("negative control (delta frozen at {})", study.control_delta),
        &study.control,
    );
    gap_lines(
        &mut report,
        "path A delta sweep at the smallest epsilon (vs exact graph)",
        &study.path_a_delta_sweep,
    );
    gap_lines(
        &mut report,
        "path B delta sweep on the homogenized problem (vs exact graph)",
        &study.path_b_delta_sweep,
    );
    let t = study.terminal_gap;
    writeln!(
        report,
        "terminal gap (exact graph, smallest epsilon vs homogenized): {}, {}, {}\n",
        t.l2_u, t.l2_v, t.l2_w
    )
    .unwrap();
    append_checks(&mut report, &outcome.checks);
    outcome.write_text(out, "report.txt", &report)
}

fn run_kinetics_table(cfg: &SimulationConfig, out: &Path, outcome: &mut Outcome) -> Result<()> {
    let t = &cfg.table;
    let center = [0.5 * cfg.geometry.extent; 2];
    let w0 = t.w0.unwrap_or_else(|| cfg.initial.w0.eval(center, cfg.geometry.extent));
    if !(cfg.kinetics.delta > 0.0) {
        return Err(Error::config("kinetics.delta", "the table needs a positive delta"));
    }
    let psi = psi_delta(w0, cfg.kinetics.delta);
    let mut csv = Csv::new(&["u", "v", "R", "psi_delta_at_w0"]);
    let m = t.points - 1;
    for i in 0..t.points {
        let u = t.u_max * i as f64 / m as f64;
        for j in 0..t.points {
            let v = t.v_max * j as f64 / m as f64;
            csv.row(&[u, v, langmuir_rate(u, v, &cfg.kinetics), psi]);
        }
    }
    outcome.write_csv(out, "kinetics.csv", &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.to_string().parse::<Command>().unwrap(), c);
        }
        assert!("bogus".parse::<Command>().is_err());
    }

    #[test]
    fn trend_checks() {
        assert!(trend_ok(&[3.0, 2.0, 1.0], 0.0, true));
        assert!(!trend_ok(&[3.0, 3.0, 1.0], 0.0, true));
        assert!(trend_ok(&[1e-5, 2e-5], 1e-4, true));
        assert!(trend_ok(&[1.0, 1.0, 1.5], 0.0, false));
        assert!(!trend_ok(&[1.0, 0.9], 0.0, false));
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code(&Ok(Outcome::default())), EXIT_OK);
        let failed = Outcome {
            files: vec![],
            checks: vec![("x".into(), false)],
        };
        assert_eq!(exit_code(&Ok(failed)), EXIT_ASSERTION);
        assert_eq!(exit_code(&Err(Error::config("a.b", "bad"))), EXIT_CONFIG);
        assert_eq!(exit_code(&Err(Error::Solver("x".into()))), EXIT_SOLVER);
    }
}
