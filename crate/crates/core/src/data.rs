//! Coefficient and initial/boundary data descriptions.
//!
//! Diffusivities are separable, `D(x, y) = m(x) c(y)`, with `m` a macroscopic
//! factor and `c` a profile over the unit cell. All specs parse from and
//! print to the short `kind:args` strings used in configuration files.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

fn parse_args(kind: &str, args: &str, count: usize) -> Result<Vec<f64>, String> {
    let vals: Result<Vec<f64>, _> = args.split(',').map(|a| a.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|_| format!("bad numbers in `{kind}:{args}`"))?;
    if vals.len() != count {
        return Err(format!("`{kind}` takes {count} argument(s), got {}", vals.len()));
    }
    Ok(vals)
}

fn split_kind(s: &str) -> Result<(&str, &str), String> {
    s.trim()
        .split_once(':')
        .map(|(k, a)| (k.trim(), a.trim()))
        .ok_or_else(|| format!("expected `kind:args`, got `{s}`"))
}

/// Cell profile `c(y)` of a diffusivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellProfile {
    Const(f64),
    /// `d1` for `y1 < 1/2`, `d2` otherwise.
    Laminate { d1: f64, d2: f64 },
    /// `a + b cos(2π y1) cos(2π y2)`.
    Cosine { a: f64, b: f64 },
}

impl CellProfile {
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        match *self {
            CellProfile::Const(c) => c,
            CellProfile::Laminate { d1, d2 } => {
                if y[0] < 0.5 {
                    d1
                } else {
                    d2
                }
            }
            CellProfile::Cosine { a, b } => a + b * (2.0 * PI * y[0]).cos() * (2.0 * PI * y[1]).cos(),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CellProfile::Const(c) => (c, c),
            CellProfile::Laminate { d1, d2 } => (d1.min(d2), d1.max(d2)),
            CellProfile::Cosine { a, b } => (a - b.abs(), a + b.abs()),
        }
    }
}

impl fmt::Display for CellProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellProfile::Const(c) => write!(f, "const:{c}"),
            CellProfile::Laminate { d1, d2 } => write!(f, "laminate:{d1},{d2}"),
            CellProfile::Cosine { a, b } => write!(f, "cosine:{a},{b}"),
        }
    }
}

impl FromStr for CellProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, args) = split_kind(s)?;
        match kind {
            "const" => Ok(CellProfile::Const(parse_args(kind, args, 1)?[0])),
            "laminate" => {
                let v = parse_args(kind, args, 2)?;
                Ok(CellProfile::Laminate { d1: v[0], d2: v[1] })
            }
            "cosine" => {
                let v = parse_args(kind, args, 2)?;
                Ok(CellProfile::Cosine { a: v[0], b: v[1] })
            }
            _ => Err(format!("unknown cell profile `{kind}`")),
        }
    }
}

/// Macroscopic factor `m(x)`, or any scalar function of the macro point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MacroProfile {
    Const(f64),
    /// `a + b1 x1 + b2 x2`.
    Affine { a: f64, b1: f64, b2: f64 },
    /// `a + b cos(π x1 / L)`.
    CosX { a: f64, b: f64 },
    /// `a + b cos(π x1 / L) cos(π x2 / L)`.
    CosXY { a: f64, b: f64 },
}

impl MacroProfile {
    pub fn eval(&self, x: [f64; 2], extent: f64) -> f64 {
        match *self {
            MacroProfile::Const(c) => c,
            MacroProfile::Affine { a, b1, b2 } => a + b1 * x[0] + b2 * x[1],
            MacroProfile::CosX { a, b } => a + b * (PI * x[0] / extent).cos(),
            MacroProfile::CosXY { a, b } => {
                a + b * (PI * x[0] / extent).cos() * (PI * x[1] / extent).cos()
            }
        }
    }

    /// Range over the closed square `[0, L]²`.
    pub fn bounds(&self, extent: f64) -> (f64, f64) {
        match *self {
            MacroProfile::Const(c) => (c, c),
            MacroProfile::Affine { .. } => {
                let corners = [[0.0, 0.0], [extent, 0.0], [0.0, extent], [extent, extent]];
                let vals: Vec<f64> = corners.iter().map(|&x| self.eval(x, extent)).collect();
                (
                    vals.iter().cloned().fold(f64::INFINITY, f64::min),
                    vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            }
            MacroProfile::CosX { a, b } | MacroProfile::CosXY { a, b } => (a - b.abs(), a + b.abs()),
        }
    }
}

impl fmt::Display for MacroProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MacroProfile::Const(c) => write!(f, "const:{c}"),
            MacroProfile::Affine { a, b1, b2 } => write!(f, "affine:{a},{b1},{b2}"),
            MacroProfile::CosX { a, b } => write!(f, "cosx:{a},{b}"),
            MacroProfile::CosXY { a, b } => write!(f, "cosxy:{a},{b}"),
        }
    }
}

impl FromStr for MacroProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, args) = split_kind(s)?;
        match kind {
            "const" => Ok(MacroProfile::Const(parse_args(kind, args, 1)?[0])),
            "affine" => {
                let v = parse_args(kind, args, 3)?;
                Ok(MacroProfile::Affine { a: v[0], b1: v[1], b2: v[2] })
            }
            "cosx" => {
                let v = parse_args(kind, args, 2)?;
                Ok(MacroProfile::CosX { a: v[0], b: v[1] })
            }
            "cosxy" => {
                let v = parse_args(kind, args, 2)?;
                Ok(MacroProfile::CosXY { a: v[0], b: v[1] })
            }
            _ => Err(format!("unknown profile `{kind}`")),
        }
    }
}

/// Separable diffusivity `D(x, y) = m(x) c(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivity {
    pub macro_factor: MacroProfile,
    pub cell_profile: CellProfile,
}

impl Diffusivity {
    pub fn constant(d: f64) -> Self {
        Diffusivity {
            macro_factor: MacroProfile::Const(1.0),
            cell_profile: CellProfile::Const(d),
        }
    }

    pub fn cell(profile: CellProfile) -> Self {
        Diffusivity {
            macro_factor: MacroProfile::Const(1.0),
            cell_profile: profile,
        }
    }

    pub fn eval(&self, x: [f64; 2], y: [f64; 2], extent: f64) -> f64 {
        self.macro_factor.eval(x, extent) * self.cell_profile.eval(y)
    }

    /// Bounds of `m(x) c(y)`, assuming a positive macro factor.
    pub fn bounds(&self, extent: f64) -> (f64, f64) {
        let (m0, m1) = self.macro_factor.bounds(extent);
        let (c0, c1) = self.cell_profile.bounds();
        let prods = [m0 * c0, m0 * c1, m1 * c0, m1 * c1];
        (
            prods.iter().cloned().fold(f64::INFINITY, f64::min),
            prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Piecewise-linear function of time (constant outside the table range).
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSeries {
    Const(f64),
    Table(Vec<(f64, f64)>),
}

impl TimeSeries {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            TimeSeries::Const(c) => *c,
            TimeSeries::Table(pts) => {
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                for w in pts.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                pts.last().unwrap().1
            }
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            TimeSeries::Const(c) => vec![*c],
            TimeSeries::Table(p) => p.iter().map(|&(_, v)| v).collect(),
        }
    }
}

impl fmt::Display for TimeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSeries::Const(c) => write!(f, "{c}"),
            TimeSeries::Table(pts) => {
                let parts: Vec<String> = pts.iter().map(|(t, v)| format!("{t}:{v}")).collect();
                write!(f, "table:{}", parts.join(";"))
            }
        }
    }
}

impl FromStr for TimeSeries {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("table:") {
            let mut pts = Vec::new();
            for item in rest.split(';') {
                let (t, v) = item
                    .split_once(':')
                    .ok_or_else(|| format!("table entries are `t:value`, got `{item}`"))?;
                let t: f64 = t.trim().parse().map_err(|_| format!("bad time `{t}`"))?;
                let v: f64 = v.trim().parse().map_err(|_| format!("bad value `{v}`"))?;
                pts.push((t, v));
            }
            if pts.is_empty() || pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err("table times must be strictly increasing".into());
            }
            Ok(TimeSeries::Table(pts))
        } else {
            s.parse::<f64>()
                .map(TimeSeries::Const)
                .map_err(|_| format!("expected a number or table:..., got `{s}`"))
        }
    }
}

/// Prescribed outward normal fluxes: `d, g` on the inflow edge for `u, v`;
/// `e, h` on the outflow edge. Negative values feed solute into the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub d: TimeSeries,
    pub e: TimeSeries,
    pub g: TimeSeries,
    pub h: TimeSeries,
}

impl BoundaryData {
    pub fn zero() -> Self {
        BoundaryData {
            d: TimeSeries::Const(0.0),
            e: TimeSeries::Const(0.0),
            g: TimeSeries::Const(0.0),
            h: TimeSeries::Const(0.0),
        }
    }

    pub fn constant(d: f64, e: f64, g: f64, h: f64) -> Self {
        BoundaryData {
            d: TimeSeries::Const(d),
            e: TimeSeries::Const(e),
            g: TimeSeries::Const(g),
            h: TimeSeries::Const(h),
        }
    }

    pub fn is_zero(&self) -> bool {
        [&self.d, &self.e, &self.g, &self.h]
            .iter()
            .all(|s| s.values().iter().all(|&v| v == 0.0))
    }

    /// True when no prescribed flux extracts solute.
    pub fn is_nonextracting(&self) -> bool {
        [&self.d, &self.e, &self.g, &self.h]
            .iter()
            .all(|s| s.values().iter().all(|&v| v <= 0.0))
    }
}
