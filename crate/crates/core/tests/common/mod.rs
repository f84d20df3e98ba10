#![allow(dead_code)]

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crystal_homog::config::SimulationConfig;
use crystal_homog::data::{BoundaryData, Diffusivity, MacroProfile};
use crystal_homog::geometry::{Edge, Inclusion, UnitCell};
use crystal_homog::kinetics::{DissolutionMode, KineticsParams};
use crystal_homog::micro::{FlowData, InitialData};
use crystal_homog::upscaling::Scenario;

static SERIAL: Mutex<()> = Mutex::new(());

/// Runs one acceptance criterion alone, prints its status line and fails the
/// test on a failed check or an exceeded runtime budget.
pub fn criterion<F>(id: &str, name: &str, budget: Duration, body: F)
where
    F: FnOnce() -> Result<String, String>,
{
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let (status, detail) = match &result {
        Ok(d) if elapsed <= budget => ("PASS", d.clone()),
        Ok(d) => ("FAIL", format!("{d}; runtime {elapsed:.1?} over budget {budget:?}")),
        Err(e) => ("FAIL", e.clone()),
    };
    println!("[acceptance] {id} {name} ... {status} ({:.2} s) {detail}", elapsed.as_secs_f64());
    assert_eq!(status, "PASS", "{id} {name}: {detail}");
}

pub fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

pub fn config(name: &str) -> SimulationConfig {
    let path = format!("{}/examples/configs/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    SimulationConfig::load(path.as_ref(), &[]).unwrap()
}

pub fn kinetics(delta: f64) -> KineticsParams {
    KineticsParams::new(1.0, 1.0, 1.0, 1.0, delta, DissolutionMode::Regularized).unwrap()
}

/// Disk fixture with inflow of both species and a spatially varying start.
pub fn disk_scenario(cell_resolution: usize, h: f64, t_end: f64, macro_resolution: usize) -> Scenario {
    Scenario {
        cell: UnitCell::new(cell_resolution, Inclusion::Disk { radius: 0.25 }).unwrap(),
        extent: 1.0,
        inflow: Edge::Left,
        outflow: Edge::Right,
        d1: Diffusivity::constant(1.0),
        d2: Diffusivity::constant(0.5),
        kinetics: kinetics(0.1),
        boundary: BoundaryData::constant(-0.2, 0.0, -0.1, 0.0),
        initial: InitialData {
            u0: MacroProfile::CosX { a: 1.0, b: 0.5 },
            v0: MacroProfile::CosXY { a: 0.8, b: 0.3 },
            w0: MacroProfile::CosX { a: 0.3, b: 0.1 },
        },
        flow: FlowData::at_rest(1.0),
        h,
        t_end,
        macro_resolution,
        time_dependent_cells: false,
    }
}
