//! Acceptance criteria C1 to C12. Each test prints one status line:
//! `cargo test --test acceptance -- --nocapture --test-threads 1`.

mod common;

use std::time::Duration;

use common::{check, config, criterion, disk_scenario, kinetics};
use crystal_homog::cell_solver::{
    assemble_effective, quadratic_form, solve_stokes_cell, CellDiffusivity,
};
use crystal_homog::data::{BoundaryData, CellProfile, Diffusivity, MacroProfile};
use crystal_homog::geometry::{Inclusion, PerforatedDomain, UnitCell};
use crystal_homog::kinetics::{langmuir_rate, psi_delta, DissolutionMode, KineticsParams};
use crystal_homog::mac::{MacGrid, MacSystem};
use crystal_homog::macro_solver::{macro_step_limit, MacroSolver};
use crystal_homog::micro::{
    micro_simulate, positivity_step_limit, FlowData, InitialData, MicroProblem, MicroSolver,
};
use crystal_homog::upscaling::{compare_macro_macro, compare_micro_micro, epsilon_sweep, limit_order_study};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn c01_kinetics_exactness() {
    criterion("C1", "kinetics exactness", secs(1), || {
        for delta in [0.1, 0.05, 1.0, 0.3] {
            let got = [-1.0, 0.0, delta / 2.0, delta, 2.0 * delta].map(|w| psi_delta(w, delta));
            check(got == [0.0, 0.0, 0.5, 1.0, 1.0], format!("psi_delta at delta={delta}: {got:?}"))?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut violations = 0;
        for _ in 0..100_000 {
            let p = KineticsParams::new(
                rng.random_range(0.01..10.0),
                rng.random_range(0.01..10.0),
                rng.random_range(0.01..10.0),
                rng.random_range(0.01..10.0),
                0.1,
                DissolutionMode::Regularized,
            )
            .unwrap();
            let u = rng.random_range(0.0..100.0);
            let v = rng.random_range(0.0..100.0);
            if langmuir_rate(u, v, &p) > p.k() / 4.0 {
                violations += 1;
            }
            check(
                langmuir_rate(u, 0.0, &p) == 0.0 && langmuir_rate(0.0, v, &p) == 0.0,
                "R vanishes on the axes",
            )?;
        }
        check(violations == 0, format!("{violations} points exceed k/4"))?;
        Ok("1e5 points, 0 violations".into())
    });
}

#[test]
fn c02_trivial_cell_identity() {
    criterion("C2", "trivial-cell identity", secs(5), || {
        let cell = UnitCell::new(64, Inclusion::None).unwrap();
        let d = 2.7;
        let dc = CellDiffusivity::constant(&cell, d).unwrap();
        let (eff, sets) = assemble_effective(&cell, &dc, &dc, None).unwrap();
        let kmax = sets
            .iter()
            .flat_map(|s| s.k.iter().flatten().chain(&s.k0))
            .fold(0.0f64, |m, x| m.max(x.abs()));
        check(kmax < 1e-8, format!("corrector max {kmax:e}"))?;
        for t in [eff.a, eff.b] {
            let err = (t[0][0] - d).abs() + (t[1][1] - d).abs() + t[0][1].abs() + t[1][0].abs();
            check(err < 1e-8, format!("tensor {t:?}"))?;
        }
        Ok(format!("max |k| = {kmax:.1e}"))
    });
}

/// Periodic two-point problem `(D (1 + k'))' = 0` solved by shooting on the
/// flux `J`: RK4 for `k' = J / D - 1` and bisection on `k(1) - k(0) = 0`.
fn shooting_flux(d: impl Fn(f64) -> f64) -> f64 {
    let steps = 4096;
    let dy = 1.0 / steps as f64;
    let jump = |j: f64| {
        let f = |y: f64| j / d(y) - 1.0;
        let mut k = 0.0;
        for s in 0..steps {
            let y = s as f64 * dy;
            let k1 = f(y);
            let k2 = f(y + 0.5 * dy);
            let k4 = f(y + dy - 1e-12);
            k += dy / 6.0 * (k1 + 4.0 * k2 + k4);
        }
        k
    };
    let (mut lo, mut hi) = (1e-6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if jump(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn c03_laminate_oracle() {
    criterion("C3", "laminate oracle", secs(30), || {
        let cell = UnitCell::new(128, Inclusion::None).unwrap();
        let profile = CellProfile::Laminate { d1: 1.0, d2: 4.0 };
        let dc = CellDiffusivity::from_profile(&cell, &profile, 1.0).unwrap();
        let (eff, _) = assemble_effective(&cell, &dc, &dc, None).unwrap();
        let d = |y: f64| profile.eval([y, 0.5]);
        let harmonic = shooting_flux(d);
        let samples = 100_000;
        let arithmetic = (0..samples).map(|i| d((i as f64 + 0.5) / samples as f64)).sum::<f64>() / samples as f64;
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        check(rel(harmonic, 1.6) < 1e-6, format!("oracle flux {harmonic}"))?;
        check(rel(eff.a[0][0], harmonic) < 0.01, format!("a11 = {} vs {harmonic}", eff.a[0][0]))?;
        check(rel(eff.a[1][1], arithmetic) < 0.01, format!("a22 = {} vs {arithmetic}", eff.a[1][1]))?;
        Ok(format!("a11 = {:.6}, a22 = {:.6}", eff.a[0][0], eff.a[1][1]))
    });
}

#[test]
fn c04_ellipticity_inheritance() {
    criterion("C4", "ellipticity inheritance", secs(10), || {
        let cell = UnitCell::new(32, Inclusion::Disk { radius: 0.25 }).unwrap();
        // declared input bounds: D1, D2 in [alpha, m]
        let (alpha, m) = (0.25, 2.0);
        let d1 = CellDiffusivity::from_profile(&cell, &CellProfile::Cosine { a: 1.0, b: 0.2 }, 1.0).unwrap();
        let d2 = CellDiffusivity::from_profile(&cell, &CellProfile::Cosine { a: 1.0, b: 0.2 }, 0.5).unwrap();
        d1.check_bounds(&cell, alpha, m).map_err(|e| e.to_string())?;
        d2.check_bounds(&cell, alpha, m).map_err(|e| e.to_string())?;
        let (eff, _) = assemble_effective(&cell, &d1, &d2, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..1000 {
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let z = [th.cos(), th.sin()];
            for t in [&eff.a, &eff.b] {
                let q = quadratic_form(t, z);
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        check(alpha <= lo && hi <= m, format!("zeta.A zeta in [{lo}, {hi}]"))?;
        Ok(format!("range [{lo:.4}, {hi:.4}] within [{alpha}, {m}]"))
    });
}

#[test]
fn c05_stokes_cell_validation() {
    criterion("C5", "Stokes cell validation", secs(60), || {
        let mu = 1.0;
        let sys = MacSystem::new(MacGrid::channel(64));
        let (q, _) = sys.steady_stokes(mu, [1.0, 0.0]).map_err(|e| e.to_string())?;
        let mean = sys.mean_velocity(&q)[0];
        let exact = 1.0 / (12.0 * mu);
        check((mean - exact).abs() < 0.02 * exact, format!("channel mean {mean} vs {exact}"))?;
        let cell = UnitCell::new(32, Inclusion::Disk { radius: 0.25 }).unwrap();
        let flow = solve_stokes_cell(&cell, mu, [1.0, 0.0]).map_err(|e| e.to_string())?;
        check(flow.q_bar[1].abs() < 1e-10, format!("transverse q_bar {:e}", flow.q_bar[1]))?;
        Ok(format!(
            "channel error {:.2e}, transverse {:.1e}",
            (mean - exact).abs() / exact,
            flow.q_bar[1]
        ))
    });
}

#[test]
fn c06_conservation() {
    criterion("C6", "conservation", secs(60), || {
        let cell = UnitCell::new(8, Inclusion::Disk { radius: 0.25 }).unwrap();
        let problem = MicroProblem {
            domain: PerforatedDomain::new(&cell, 0.125, 1.0).unwrap(),
            d1: Diffusivity::constant(1.0),
            d2: Diffusivity::constant(0.5),
            kinetics: kinetics(0.1),
            boundary: BoundaryData::zero(),
            initial: InitialData {
                u0: MacroProfile::CosX { a: 1.0, b: 0.5 },
                v0: MacroProfile::CosXY { a: 0.8, b: 0.3 },
                w0: MacroProfile::CosX { a: 0.3, b: 0.1 },
            },
            flow: FlowData::at_rest(1.0),
            h: 0.002,
            t_end: 1.0,
        };
        let mut solver = MicroSolver::new(problem).unwrap();
        check(solver.domain().n() == 64, "grid is 64^2")?;
        check(solver.total_steps() == 500, "500 steps")?;
        let m0 = solver.diagnostics().mass;
        let mut prev = m0;
        let mut worst = 0.0f64;
        while !solver.is_finished() {
            solver.step().map_err(|e| e.to_string())?;
            let m = solver.diagnostics().mass;
            worst = worst
                .max((m.combined_u - prev.combined_u).abs() / m0.combined_u)
                .max((m.combined_v - prev.combined_v).abs() / m0.combined_v);
            prev = m;
        }
        check(worst <= 1e-10, format!("per-step drift {worst:e}"))?;
        check(prev.mineral != m0.mineral, "the mineral mass evolves")?;
        Ok(format!("max per-step drift {worst:.1e}"))
    });
}

fn random_profile(rng: &mut ChaCha8Rng, max: f64) -> MacroProfile {
    let a = rng.random_range(0.0..max);
    let b = rng.random_range(0.0..=a);
    match rng.random_range(0..3) {
        0 => MacroProfile::Const(a),
        1 => MacroProfile::CosX { a, b },
        _ => MacroProfile::CosXY { a, b },
    }
}

fn random_kinetics(rng: &mut ChaCha8Rng) -> KineticsParams {
    let mode = if rng.random_bool(0.5) {
        DissolutionMode::Regularized
    } else {
        DissolutionMode::Event
    };
    KineticsParams::new(
        rng.random_range(0.2..4.0),
        rng.random_range(0.2..4.0),
        rng.random_range(0.2..4.0),
        rng.random_range(0.2..4.0),
        rng.random_range(0.02..0.5),
        mode,
    )
    .unwrap()
}

#[test]
fn c07_positivity_and_w_bound() {
    criterion("C7", "positivity and w-bound", secs(300), || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst_min = f64::INFINITY;
        for case in 0..50 {
            let inclusion = if rng.random_bool(0.5) {
                Inclusion::Disk { radius: rng.random_range(0.15..0.35) }
            } else {
                Inclusion::Square { side: rng.random_range(0.3..0.6) }
            };
            let cell = UnitCell::new(8, inclusion).unwrap();
            let eps = if rng.random_bool(0.5) { 0.5 } else { 0.25 };
            let kin = random_kinetics(&mut rng);
            let mut h = 0.02f64.min(0.9 * positivity_step_limit(&cell, &kin));
            if kin.mode == DissolutionMode::Regularized {
                h = h.min(kin.delta / kin.k_d);
            }
            let t_end = 20.0 * h;
            let initial = InitialData {
                u0: random_profile(&mut rng, 2.0),
                v0: random_profile(&mut rng, 2.0),
                w0: random_profile(&mut rng, 0.5),
            };
            let mut influx = || -rng.random_range(0.0..0.5);
            let boundary = BoundaryData::constant(influx(), influx(), influx(), influx());
            let problem = MicroProblem {
                domain: PerforatedDomain::new(&cell, eps, 1.0).unwrap(),
                d1: Diffusivity::constant(rng.random_range(0.2..2.0)),
                d2: Diffusivity::constant(rng.random_range(0.2..2.0)),
                kinetics: kin,
                boundary,
                initial,
                flow: FlowData::at_rest(1.0),
                h,
                t_end,
            };
            let mut solver = MicroSolver::new(problem).map_err(|e| format!("case {case}: {e}"))?;
            let w0_max = solver.state().w.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            let w_bound = w0_max + kin.k_d * (1.0 + kin.k() / 4.0) * t_end;
            let mut failure = None;
            solver
                .run_with(|s| {
                    let d = s.diagnostics();
                    let lo = d.min_u.min(d.min_v).min(d.min_w);
                    worst_min = worst_min.min(lo);
                    if failure.is_none() && (lo < 0.0 || d.max_w > w_bound) {
                        failure = Some(format!(
                            "case {case} step {}: min {lo:e}, max w {} > {w_bound}?",
                            d.step, d.max_w
                        ));
                    }
                    Ok(())
                })
                .map_err(|e| format!("case {case}: {e}"))?;
            if let Some(f) = failure {
                return Err(f);
            }
        }
        Ok(format!("50 configs, smallest value {worst_min:.3e}"))
    });
}

#[test]
fn c08_rothe_self_convergence() {
    criterion("C8", "Rothe self-convergence", secs(300), || {
        let h0 = 0.01;
        let scenario = disk_scenario(8, h0, 0.1, 0);
        let run = |h: f64| {
            let mut p = scenario.micro_problem(0.25, scenario.kinetics).unwrap();
            p.h = h;
            micro_simulate(p).unwrap()
        };
        let domain = scenario.domain(0.25).unwrap();
        let reference = run(h0 / 16.0);
        let errors: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|f| compare_micro_micro(&run(h0 / f), &reference, &domain).unwrap().l2_u)
            .collect();
        let pair: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        // least-squares slope of log e against log h over three halvings
        let eoc = (errors[0] / errors[2]).log2() / 2.0;
        check(
            (0.8..=1.2).contains(&eoc),
            format!("EOC {eoc:.4} (pairwise {pair:?}, errors {errors:?})"),
        )?;
        Ok(format!("EOC {eoc:.4}, pairwise {:.3} {:.3}", pair[0], pair[1]))
    });
}

#[test]
fn c09_homogenization_trend() {
    criterion("C9", "homogenization trend", secs(1200), || {
        let cfg = config("sweep");
        let mut scenario = cfg.scenario().unwrap();
        scenario.macro_resolution = cfg.sweep_macro_resolution();
        let table = epsilon_sweep(&scenario, &cfg.sweep.epsilons).map_err(|e| e.to_string())?;
        let dec = table.strictly_decreasing();
        let rows: Vec<String> = table
            .rows
            .iter()
            .map(|r| format!("eps {}: {:.3e} {:.3e} {:.3e}", r.epsilon, r.norms.l2_u, r.norms.l2_v, r.norms.l2_w))
            .collect();
        check(dec == [true; 3], format!("decreasing {dec:?}: {rows:?}"))?;
        Ok(rows.join("; "))
    });
}

#[test]
fn c10_limit_commutation() {
    criterion("C10", "limit commutation", secs(1800), || {
        let cfg = config("commute");
        let mut scenario = cfg.scenario().unwrap();
        scenario.macro_resolution = cfg.sweep_macro_resolution();
        let report = limit_order_study(
            &scenario,
            &cfg.sweep.epsilons,
            &cfg.sweep.deltas,
            cfg.sweep.control_delta,
        )
        .map_err(|e| e.to_string())?;
        let diag: Vec<f64> = report.diagonal.iter().map(|r| r.norms.combined()).collect();
        let ctrl: Vec<f64> = report.control.iter().map(|r| r.norms.combined()).collect();
        check(report.diagonal_decreasing(), format!("diagonal {diag:?}"))?;
        check(report.control_nondecreasing(), format!("control {ctrl:?}"))?;
        Ok(format!("diagonal {diag:.4?}, control {ctrl:.4?}"))
    });
}

#[test]
fn c11_gronwall_stability() {
    criterion("C11", "Gronwall stability", secs(300), || {
        let scenario = disk_scenario(16, 0.0025, 0.25, 64);
        let coefficients = scenario.effective().unwrap();
        let ratio = coefficients[0].surface_ratio();
        let run = |eta: f64| {
            let mut p = scenario.macro_problem_with(scenario.kinetics, coefficients.clone()).unwrap();
            if let MacroProfile::CosX { a, b } = p.initial.w0 {
                p.initial.w0 = MacroProfile::CosX { a: a + eta, b };
            }
            let mut s = MacroSolver::new(p).unwrap();
            while !s.is_finished() {
                s.step().unwrap();
            }
            s.into_state()
        };
        let base = run(0.0);
        check(base == run(0.0), "two identical runs differ")?;
        let scaled: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eta| compare_macro_macro(&run(eta), &base, 1.0, ratio).unwrap().combined() / eta)
            .collect();
        let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        check(spread <= 2.0, format!("difference / eta = {scaled:?}"))?;
        Ok(format!("difference / eta = {scaled:.4?}, bit-identical reruns"))
    });
}

#[test]
fn c12_sink_bound() {
    criterion("C12", "sink bound", secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst = 0.0f64;
        for case in 0..12 {
            let mut scenario = disk_scenario(16, 0.01, 0.0, 32);
            scenario.cell = UnitCell::new(
                16,
                Inclusion::Disk {
                    radius: rng.random_range(0.15..0.4),
                },
            )
            .unwrap();
            let kin = random_kinetics(&mut rng);
            scenario.initial = InitialData {
                u0: random_profile(&mut rng, 3.0),
                v0: random_profile(&mut rng, 3.0),
                w0: random_profile(&mut rng, 0.3),
            };
            let coefficients = scenario.effective().unwrap();
            let mut h = 0.01f64.min(0.9 * macro_step_limit(&coefficients, &kin));
            if kin.mode == DissolutionMode::Regularized {
                h = h.min(kin.delta / kin.k_d);
            }
            scenario.h = h;
            scenario.t_end = 40.0 * h;
            let ratio = coefficients[0].surface_ratio();
            let bound = ratio * kin.k_d * (1.0 + kin.k() / 4.0);
            let mut solver = MacroSolver::new(scenario.macro_problem_with(kin, coefficients).unwrap()).unwrap();
            let mut failure = None;
            solver
                .run_with(|s| {
                    let p = s.diagnostics().max_abs_p;
                    worst = worst.max(p / bound);
                    if p > bound && failure.is_none() {
                        failure = Some(format!("case {case}: |P| = {p} > {bound}"));
                    }
                    Ok(())
                })
                .map_err(|e| e.to_string())?;
            if let Some(f) = failure {
                return Err(f);
            }
        }
        Ok(format!("max |P| / bound = {worst:.3}"))
    });
}
