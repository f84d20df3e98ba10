//! Simulation configuration: a TOML file of flat `[section]` tables whose
//! keys are addressed as `section.key` in errors and overrides.

use std::collections::BTreeSet;
use std::str::FromStr;

use toml::{Table, Value};

use crate::data::{BoundaryData, CellProfile, Diffusivity, MacroProfile, TimeSeries};
use crate::error::{Error, Result};
use crate::geometry::{Edge, Inclusion, PerforatedDomain, UnitCell};
use crate::kinetics::{DissolutionMode, KineticsParams};
use crate::micro::{step_count, FlowData, InitialData};
use crate::upscaling::Scenario;

/// Every accepted key with its default (`None` = optional without default,
/// or required when listed in [`REQUIRED`]).
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("geometry.cell_resolution", Some("16")),
    ("geometry.inclusion", Some("\"disk:0.25\"")),
    ("geometry.epsilon", Some("0.125")),
    ("geometry.extent", Some("1.0")),
    ("geometry.macro_resolution", Some("64")),
    ("geometry.inflow_edge", Some("\"left\"")),
    ("geometry.outflow_edge", Some("\"right\"")),
    ("physics.mu", Some("1.0")),
    ("physics.d1_cell", Some("\"const:1\"")),
    ("physics.d1_macro", Some("\"const:1\"")),
    ("physics.d2_cell", Some("\"const:1\"")),
    ("physics.d2_macro", Some("\"const:1\"")),
    ("physics.alpha", None),
    ("physics.m", None),
    ("flow.initial", Some("[0.0, 0.0]")),
    ("flow.pressure_gradient", Some("[0.0, 0.0]")),
    ("kinetics.k_f", Some("1.0")),
    ("kinetics.k_d", Some("1.0")),
    ("kinetics.k", None),
    ("kinetics.k1", Some("1.0")),
    ("kinetics.k2", Some("1.0")),
    ("kinetics.delta", Some("0.1")),
    ("kinetics.mode", Some("\"regularized\"")),
    ("boundary.d", Some("0.0")),
    ("boundary.e", Some("0.0")),
    ("boundary.g", Some("0.0")),
    ("boundary.h", Some("0.0")),
    ("initial.u0", Some("\"const:1\"")),
    ("initial.v0", Some("\"const:1\"")),
    ("initial.w0", Some("\"const:0\"")),
    ("time.T", None),
    ("time.h", None),
    ("time.snapshot_stride", Some("0")),
    ("output.directory", Some("\"out\"")),
    ("output.vtk", Some("false")),
    ("sweep.epsilons", Some("[0.25, 0.125, 0.0625]")),
    ("sweep.deltas", Some("[0.1, 0.05, 0.025]")),
    ("sweep.control_delta", Some("1.0")),
    ("sweep.macro_resolution", Some("0")),
    ("sweep.zero_tolerance", Some("0.0")),
    ("table.u_max", Some("4.0")),
    ("table.v_max", Some("4.0")),
    ("table.points", Some("21")),
    ("table.w0", None),
    ("macro.time_dependent_cells", Some("false")),
    ("run.seed", Some("0")),
];

pub const REQUIRED: &[&str] = &["time.T", "time.h"];

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub cell_resolution: usize,
    pub inclusion: Inclusion,
    pub epsilon: f64,
    pub extent: f64,
    pub macro_resolution: usize,
    pub inflow_edge: Edge,
    pub outflow_edge: Edge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub mu: f64,
    pub d1: Diffusivity,
    pub d2: Diffusivity,
    /// Declared ellipticity constants; checked against the data when present.
    pub alpha: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub h: f64,
    /// Snapshot every this many steps; 0 writes only the first and last level.
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
    pub vtk: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub control_delta: f64,
    /// 0 selects twice `geometry.macro_resolution`.
    pub macro_resolution: usize,
    /// Errors at or below this level count as zero in the trend checks.
    pub zero_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableConfig {
    pub u_max: f64,
    pub v_max: f64,
    pub points: usize,
    /// Mineral mass for the `psi_delta_at_w0` column; defaults to `w0` at the
    /// centre of `Ω`.
    pub w0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub flow: FlowData,
    pub kinetics: KineticsParams,
    pub boundary: BoundaryData,
    pub initial: InitialData,
    pub time: TimeConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub table: TableConfig,
    pub time_dependent_cells: bool,
    pub seed: u64,
}

struct Reader {
    values: Table,
    used: BTreeSet<String>,
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
        Value::Datetime(_) => "datetime",
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::config(key, format!("expected a number, got {}", kind(other)))),
    }
}

impl Reader {
    fn lookup(&mut self, key: &str) -> Result<Value> {
        let (section, name) = key.split_once('.').unwrap();
        self.used.insert(key.to_string());
        if let Some(v) = self
            .values
            .get(section)
            .and_then(|s| s.as_table())
            .and_then(|t| t.get(name))
        {
            return Ok(v.clone());
        }
        match KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d) {
            Some(default) => Ok(default.parse::<Value>().expect("valid default")),
            None => Err(Error::config(key, "missing required key")),
        }
    }

    fn optional(&mut self, key: &str) -> Option<Value> {
        self.lookup(key).ok()
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.lookup(key)?;
        as_f64(key, &v)
    }

    fn positive(&mut self, key: &str) -> Result<f64> {
        let x = self.f64(key)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::config(key, format!("must be positive, got {x}")));
        }
        Ok(x)
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        match self.lookup(key)? {
            Value::Integer(i) if i >= 0 => Ok(i as usize),
            other => Err(Error::config(
                key,
                format!("expected a nonnegative integer, got {other}"),
            )),
        }
    }

    fn bool(&mut self, key: &str) -> Result<bool> {
        match self.lookup(key)? {
            Value::Boolean(b) => Ok(b),
            other => Err(Error::config(key, format!("expected true or false, got {other}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<String> {
        match self.lookup(key)? {
            Value::String(s) => Ok(s),
            other => Err(Error::config(key, format!("expected a string, got {}", kind(&other)))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        match self.lookup(key)? {
            Value::Array(items) => items.iter().map(|v| as_f64(key, v)).collect(),
            other => Err(Error::config(key, format!("expected an array, got {}", kind(&other)))),
        }
    }

    fn pair(&mut self, key: &str) -> Result<[f64; 2]> {
        let v = self.list(key)?;
        if v.len() != 2 {
            return Err(Error::config(key, format!("expected two components, got {}", v.len())));
        }
        Ok([v[0], v[1]])
    }

    /// A `FromStr` spec given as a string, or a bare number for `const:`-like specs.
    fn spec<T: FromStr<Err = String>>(&mut self, key: &str, number_prefix: &str) -> Result<T> {
        let text = match self.lookup(key)? {
            Value::String(s) => s,
            v @ (Value::Float(_) | Value::Integer(_)) => {
                format!("{number_prefix}{}", as_f64(key, &v)?)
            }
            other => {
                return Err(Error::config(key, format!("expected a string, got {}", kind(&other))))
            }
        };
        text.parse::<T>().map_err(|m| Error::config(key, m))
    }

    fn check_unknown(&self) -> Result<()> {
        for (section, body) in &self.values {
            let table = body
                .as_table()
                .ok_or_else(|| Error::config(section.as_str(), "expected a [section] table"))?;
            for name in table.keys() {
                let key = format!("{section}.{name}");
                if !KEYS.iter().any(|(k, _)| *k == key) {
                    return Err(Error::config(key, "unknown key"));
                }
            }
        }
        Ok(())
    }
}

/// Applies a `section.key=value` override; the value is read as TOML when
/// possible and as a bare string otherwise.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "overrides take the form section.key=value"))?;
    let key = key.trim();
    let (section, name) = key
        .split_once('.')
        .ok_or_else(|| Error::config(key, "override keys take the form section.key"))?;
    let raw = raw.trim();
    let value = raw
        .parse::<Value>()
        .unwrap_or_else(|_| Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(name.to_string(), value);
            Ok(())
        }
        _ => Err(Error::config(section, "expected a [section] table")),
    }
}

impl SimulationConfig {
    /// Parses and validates configuration text with overrides applied on top.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.to_string().trim().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    /// Reads a config file; a missing or unreadable file is a config error.
    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::parse_with(&text, overrides)
    }

    fn from_table(values: Table) -> Result<Self> {
        let mut r = Reader {
            values,
            used: BTreeSet::new(),
        };
        r.check_unknown()?;

        let cell_resolution = r.usize("geometry.cell_resolution")?;
        let inclusion: Inclusion = r.spec("geometry.inclusion", "")?;
        let epsilon = r.positive("geometry.epsilon")?;
        let extent = r.positive("geometry.extent")?;
        let macro_resolution = r.usize("geometry.macro_resolution")?;
        if macro_resolution == 0 {
            return Err(Error::config("geometry.macro_resolution", "must be positive"));
        }
        let inflow_edge: Edge = r.spec("geometry.inflow_edge", "")?;
        let outflow_edge: Edge = r.spec("geometry.outflow_edge", "")?;
        if inflow_edge == outflow_edge {
            return Err(Error::config("geometry.outflow_edge", "coincides with the inflow edge"));
        }
        let geometry = GeometryConfig {
            cell_resolution,
            inclusion,
            epsilon,
            extent,
            macro_resolution,
            inflow_edge,
            outflow_edge,
        };
        let cell = geometry.cell()?;
        PerforatedDomain::with_edges(&cell, epsilon, extent, inflow_edge, outflow_edge)
            .map_err(|e| Error::config("geometry.epsilon", e.to_string()))?;

        let mu = r.positive("physics.mu")?;
        let d1 = Diffusivity {
            cell_profile: r.spec::<CellProfile>("physics.d1_cell", "const:")?,
            macro_factor: r.spec::<MacroProfile>("physics.d1_macro", "const:")?,
        };
        let d2 = Diffusivity {
            cell_profile: r.spec::<CellProfile>("physics.d2_cell", "const:")?,
            macro_factor: r.spec::<MacroProfile>("physics.d2_macro", "const:")?,
        };
        for (name, d) in [("d1", &d1), ("d2", &d2)] {
            let (lo, _) = d.cell_profile.bounds();
            if !(lo > 0.0) {
                return Err(Error::config(format!("physics.{name}_cell"), "profile must be positive"));
            }
            let (lo, _) = d.macro_factor.bounds(extent);
            if !(lo > 0.0) {
                return Err(Error::config(format!("physics.{name}_macro"), "factor must be positive on Ω"));
            }
        }
        let alpha = r.optional("physics.alpha").map(|v| as_f64("physics.alpha", &v)).transpose()?;
        let m = r.optional("physics.m").map(|v| as_f64("physics.m", &v)).transpose()?;
        for (name, d) in [("d1", &d1), ("d2", &d2)] {
            let (lo, hi) = d.bounds(extent);
            if let Some(a) = alpha {
                if !(a > 0.0) {
                    return Err(Error::config("physics.alpha", "must be positive"));
                }
                if lo < a {
                    return Err(Error::config(
                        "physics.alpha",
                        format!("{name} takes the value {lo} below the declared alpha = {a}"),
                    ));
                }
            }
            if let Some(mm) = m {
                if hi > mm {
                    return Err(Error::config(
                        "physics.m",
                        format!("{name} takes the value {hi} above the declared M = {mm}"),
                    ));
                }
            }
        }
        if let (Some(a), Some(mm)) = (alpha, m) {
            if a > mm {
                return Err(Error::config("physics.m", "must not be below physics.alpha"));
            }
        }
        let physics = PhysicsConfig {
            mu,
            d1,
            d2,
            alpha,
            m,
        };

        let flow = FlowData {
            mu,
            initial: r.pair("flow.initial")?,
            pressure_gradient: r.pair("flow.pressure_gradient")?,
        };

        let k_f = r.f64("kinetics.k_f")?;
        let k_d = r.f64("kinetics.k_d")?;
        let k1 = r.f64("kinetics.k1")?;
        let k2 = r.f64("kinetics.k2")?;
        let delta = r.f64("kinetics.delta")?;
        let mode: DissolutionMode = r.spec("kinetics.mode", "")?;
        let kinetics = KineticsParams::new(k_f, k_d, k1, k2, delta, mode)?;
        if let Some(v) = r.optional("kinetics.k") {
            let k = as_f64("kinetics.k", &v)?;
            if (k - kinetics.k()).abs() > 1e-12 * kinetics.k() {
                return Err(Error::config(
                    "kinetics.k",
                    format!("k = {k} does not equal k_f/k_d = {}", kinetics.k()),
                ));
            }
        }

        let boundary = BoundaryData {
            d: r.spec::<TimeSeries>("boundary.d", "")?,
            e: r.spec::<TimeSeries>("boundary.e", "")?,
            g: r.spec::<TimeSeries>("boundary.g", "")?,
            h: r.spec::<TimeSeries>("boundary.h", "")?,
        };
        let initial = InitialData {
            u0: r.spec("initial.u0", "const:")?,
            v0: r.spec("initial.v0", "const:")?,
            w0: r.spec("initial.w0", "const:")?,
        };
        for (name, f) in [("u0", initial.u0), ("v0", initial.v0), ("w0", initial.w0)] {
            if f.bounds(extent).0 < 0.0 {
                return Err(Error::config(format!("initial.{name}"), "initial data must be nonnegative"));
            }
        }

        let t_end = r.f64("time.T")?;
        let h = r.f64("time.h")?;
        step_count(t_end, h)?;
        crate::micro::check_kinetics_step(h, &kinetics)?;
        let time = TimeConfig {
            t_end,
            h,
            snapshot_stride: r.usize("time.snapshot_stride")?,
        };
        let output = OutputConfig {
            directory: r.string("output.directory")?,
            vtk: r.bool("output.vtk")?,
        };

        let epsilons = r.list("sweep.epsilons")?;
        for &e in &epsilons {
            PerforatedDomain::new(&cell, e, extent)
                .map_err(|err| Error::config("sweep.epsilons", err.to_string()))?;
        }
        let deltas = r.list("sweep.deltas")?;
        for &d in &deltas {
            if !(d > 0.0) {
                return Err(Error::config("sweep.deltas", format!("must be positive, got {d}")));
            }
            if h * k_d > d * (1.0 + 1e-12) {
                return Err(Error::config(
                    "sweep.deltas",
                    format!("step restriction h*k_d <= delta violated for delta = {d}"),
                ));
            }
        }
        let control_delta = r.positive("sweep.control_delta")?;
        let sweep = SweepConfig {
            epsilons,
            deltas,
            control_delta,
            macro_resolution: r.usize("sweep.macro_resolution")?,
            zero_tolerance: r.f64("sweep.zero_tolerance")?,
        };
        if !(sweep.zero_tolerance >= 0.0) {
            return Err(Error::config("sweep.zero_tolerance", "must be nonnegative"));
        }
        let table = TableConfig {
            u_max: r.f64("table.u_max")?,
            v_max: r.f64("table.v_max")?,
            points: r.usize("table.points")?,
            w0: r.optional("table.w0").map(|v| as_f64("table.w0", &v)).transpose()?,
        };
        if table.u_max < 0.0 || table.v_max < 0.0 {
            return Err(Error::config("table.u_max", "table box must be nonnegative"));
        }
        if table.points < 2 {
            return Err(Error::config("table.points", "need at least two points per axis"));
        }
        let time_dependent_cells = r.bool("macro.time_dependent_cells")?;
        let seed = r.usize("run.seed")? as u64;
        debug_assert!(REQUIRED.iter().all(|k| r.used.contains(*k)));
        Ok(SimulationConfig {
            geometry,
            physics,
            flow,
            kinetics,
            boundary,
            initial,
            time,
            output,
            sweep,
            table,
            time_dependent_cells,
            seed,
        })
    }

    /// Fully resolved configuration text; parsing it yields `self` again.
    pub fn emit(&self) -> String {
        let mut root = Table::new();
        let mut put = |key: &str, v: Value| {
            let (s, n) = key.split_once('.').unwrap();
            root.entry(s.to_string())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .unwrap()
                .insert(n.to_string(), v);
        };
        let s = |x: &dyn std::fmt::Display| Value::String(x.to_string());
        let arr = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
        let g = &self.geometry;
        put("geometry.cell_resolution", Value::Integer(g.cell_resolution as i64));
        put("geometry.inclusion", s(&g.inclusion));
        put("geometry.epsilon", Value::Float(g.epsilon));
        put("geometry.extent", Value::Float(g.extent));
        put("geometry.macro_resolution", Value::Integer(g.macro_resolution as i64));
        put("geometry.inflow_edge", s(&g.inflow_edge));
        put("geometry.outflow_edge", s(&g.outflow_edge));
        let p = &self.physics;
        put("physics.mu", Value::Float(p.mu));
        put("physics.d1_cell", s(&p.d1.cell_profile));
        put("physics.d1_macro", s(&p.d1.macro_factor));
        put("physics.d2_cell", s(&p.d2.cell_profile));
        put("physics.d2_macro", s(&p.d2.macro_factor));
        if let Some(a) = p.alpha {
            put("physics.alpha", Value::Float(a));
        }
        if let Some(m) = p.m {
            put("physics.m", Value::Float(m));
        }
        put("flow.initial", arr(&self.flow.initial));
        put("flow.pressure_gradient", arr(&self.flow.pressure_gradient));
        let k = &self.kinetics;
        put("kinetics.k_f", Value::Float(k.k_f));
        put("kinetics.k_d", Value::Float(k.k_d));
        put("kinetics.k", Value::Float(k.k()));
        put("kinetics.k1", Value::Float(k.k1));
        put("kinetics.k2", Value::Float(k.k2));
        put("kinetics.delta", Value::Float(k.delta));
        put("kinetics.mode", s(&k.mode));
        let ts = |t: &TimeSeries| match t {
            TimeSeries::Const(c) => Value::Float(*c),
            other => Value::String(other.to_string()),
        };
        put("boundary.d", ts(&self.boundary.d));
        put("boundary.e", ts(&self.boundary.e));
        put("boundary.g", ts(&self.boundary.g));
        put("boundary.h", ts(&self.boundary.h));
        put("initial.u0", s(&self.initial.u0));
        put("initial.v0", s(&self.initial.v0));
        put("initial.w0", s(&self.initial.w0));
        put("time.T", Value::Float(self.time.t_end));
        put("time.h", Value::Float(self.time.h));
        put("time.snapshot_stride", Value::Integer(self.time.snapshot_stride as i64));
        put("output.directory", Value::String(self.output.directory.clone()));
        put("output.vtk", Value::Boolean(self.output.vtk));
        put("sweep.epsilons", arr(&self.sweep.epsilons));
        put("sweep.deltas", arr(&self.sweep.deltas));
        put("sweep.control_delta", Value::Float(self.sweep.control_delta));
        put("sweep.macro_resolution", Value::Integer(self.sweep.macro_resolution as i64));
        put("sweep.zero_tolerance", Value::Float(self.sweep.zero_tolerance));
        put("table.u_max", Value::Float(self.table.u_max));
        put("table.v_max", Value::Float(self.table.v_max));
        put("table.points", Value::Integer(self.table.points as i64));
        if let Some(w) = self.table.w0 {
            put("table.w0", Value::Float(w));
        }
        put("macro.time_dependent_cells", Value::Boolean(self.time_dependent_cells));
        put("run.seed", Value::Integer(self.seed as i64));
        root.to_string()
    }

    pub fn cell(&self) -> Result<UnitCell> {
        self.geometry.cell()
    }

    /// Scenario at the configured macro resolution.
    pub fn scenario(&self) -> Result<Scenario> {
        Ok(Scenario {
            cell: self.cell()?,
            extent: self.geometry.extent,
            inflow: self.geometry.inflow_edge,
            outflow: self.geometry.outflow_edge,
            d1: self.physics.d1,
            d2: self.physics.d2,
            kinetics: self.kinetics,
            boundary: self.boundary.clone(),
            initial: self.initial,
            flow: self.flow,
            h: self.time.h,
            t_end: self.time.t_end,
            macro_resolution: self.geometry.macro_resolution,
            time_dependent_cells: self.time_dependent_cells,
        })
    }

    /// Macro resolution for sweeps: the configured value, or twice
    /// `geometry.macro_resolution`.
    pub fn sweep_macro_resolution(&self) -> usize {
        if self.sweep.macro_resolution > 0 {
            self.sweep.macro_resolution
        } else {
            2 * self.geometry.macro_resolution
        }
    }
}

impl GeometryConfig {
    pub fn cell(&self) -> Result<UnitCell> {
        UnitCell::new(self.cell_resolution, self.inclusion).map_err(|e| match e {
            Error::Argument(m) => Error::config("geometry.cell_resolution", m),
            other => Error::config("geometry.inclusion", other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[time]\nT = 0.1\nh = 0.01\n";

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = SimulationConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.geometry.cell_resolution, 16);
        assert_eq!(c.geometry.inclusion, Inclusion::Disk { radius: 0.25 });
        assert_eq!(c.kinetics.mode, DissolutionMode::Regularized);
        assert_eq!(c.geometry.inflow_edge, Edge::Left);
        assert_eq!(c.time.h, 0.01);
    }

    #[test]
    fn emitted_config_round_trips() {
        let text = "[time]\nT = 0.3\nh = 0.003\n[boundary]\nd = \"table:0:0;1:-0.5\"\n\
                    [physics]\nalpha = 0.5\nd1_cell = \"cosine:1.5,0.25\"\n";
        let c = SimulationConfig::parse(text).unwrap();
        let again = SimulationConfig::parse(&c.emit()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.emit(), again.emit());
    }

    #[test]
    fn errors_name_the_offending_key() {
        let bad = |extra: &str| key_of(SimulationConfig::parse(&format!("{MINIMAL}{extra}")).unwrap_err());
        assert_eq!(bad("[kinetics]\ndelta = 0.0\n"), "kinetics.delta");
        assert_eq!(bad("[kinetics]\ndelta = 0.001\n"), "time.h");
        assert_eq!(bad("[kinetics]\nk = 3.0\n"), "kinetics.k");
        assert_eq!(bad("[geometry]\nbogus = 1\n"), "geometry.bogus");
        assert_eq!(bad("[geometry]\nepsilon = 0.3\n"), "geometry.epsilon");
        assert_eq!(bad("[geometry]\ninclusion = \"disk:0.6\"\n"), "geometry.inclusion");
        assert_eq!(bad("[physics]\nalpha = 2.0\n"), "physics.alpha");
        assert_eq!(key_of(SimulationConfig::parse("[time]\nT = 1.0\n").unwrap_err()), "time.h");
    }

    #[test]
    fn overrides_replace_values() {
        let c = SimulationConfig::parse_with(
            MINIMAL,
            &["kinetics.mode=event".into(), "geometry.epsilon=0.25".into()],
        )
        .unwrap();
        assert_eq!(c.kinetics.mode, DissolutionMode::Event);
        assert_eq!(c.geometry.epsilon, 0.25);
        assert!(SimulationConfig::parse_with(MINIMAL, &["nodot=1".into()]).is_err());
    }
}
