//! Langmuir precipitation, the multivalued dissolution graph and the surface ODE.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the dissolution rate `z ∈ ψ(w)` is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissolutionMode {
    /// Lipschitz ramp `ψ_δ`, explicit Euler on `w`.
    Regularized,
    /// Exact multivalued graph with an event-located exhaustion time.
    Event,
}

impl fmt::Display for DissolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DissolutionMode::Regularized => "regularized",
            DissolutionMode::Event => "event",
        })
    }
}

impl FromStr for DissolutionMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "regularized" => Ok(DissolutionMode::Regularized),
            "event" => Ok(DissolutionMode::Event),
            other => Err(format!("unknown dissolution mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticsParams {
    pub k_f: f64,
    pub k_d: f64,
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
    pub mode: DissolutionMode,
}

impl KineticsParams {
    pub fn new(k_f: f64, k_d: f64, k1: f64, k2: f64, delta: f64, mode: DissolutionMode) -> Result<Self> {
        let p = KineticsParams {
            k_f,
            k_d,
            k1,
            k2,
            delta,
            mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_f", self.k_f), ("k_d", self.k_d), ("k1", self.k1), ("k2", self.k2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("kinetics.{name}"), format!("must be positive, got {v}")));
            }
        }
        if self.mode == DissolutionMode::Regularized && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config(
                "kinetics.delta",
                format!("must be positive in regularized mode, got {}", self.delta),
            ));
        }
        Ok(())
    }

    /// `k = k_f / k_d`.
    pub fn k(&self) -> f64 {
        self.k_f / self.k_d
    }

    /// Upper bound `k/4` of the Langmuir rate.
    pub fn rate_bound(&self) -> f64 {
        self.k() / 4.0
    }

    /// Largest `R(u, v) / u` over the nonnegative quadrant (`k k1 / 4`).
    pub fn rate_slope_u(&self) -> f64 {
        self.k() * self.k1 / 4.0
    }

    /// Largest `R(u, v) / v` over the nonnegative quadrant (`k k2 / 4`).
    pub fn rate_slope_v(&self) -> f64 {
        self.k() * self.k2 / 4.0
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_mode(mut self, mode: DissolutionMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Langmuir precipitation rate `R(u, v)`, zero outside the nonnegative quadrant.
pub fn langmuir_rate(u: f64, v: f64, p: &KineticsParams) -> f64 {
    if u >= 0.0 && v >= 0.0 {
        let a = p.k1 * u;
        let b = p.k2 * v;
        let den = 1.0 + a + b;
        p.k() * a * b / (den * den)
    } else {
        0.0
    }
}

/// Sampled local Lipschitz constant of `R` in `u` over `[0,U] x [0,V]`.
///
/// Maximizes `k k1 k2 |v| |(1 + k2 v)² + k1² u1 u2|` over a dense grid and
/// inflates the result by 10%.
pub fn lipschitz_bound(p: &KineticsParams, u_max: f64, v_max: f64) -> Result<f64> {
    if !(u_max >= 0.0 && v_max >= 0.0) {
        return Err(Error::Argument(format!(
            "box must be nonnegative, got [0,{u_max}]x[0,{v_max}]"
        )));
    }
    const SAMPLES: usize = 64;
    let step = |m: f64, i: usize| m * i as f64 / (SAMPLES - 1) as f64;
    let mut best: f64 = 0.0;
    for iv in 0..SAMPLES {
        let v = step(v_max, iv);
        let base = (1.0 + p.k2 * v).powi(2);
        for i1 in 0..SAMPLES {
            let u1 = step(u_max, i1);
            for i2 in 0..SAMPLES {
                let u2 = step(u_max, i2);
                let e = p.k() * p.k1 * p.k2 * v.abs() * (base + p.k1 * p.k1 * u1 * u2).abs();
                best = best.max(e);
            }
        }
    }
    Ok(1.1 * best)
}

/// Admissible interval `ψ(w) ⊆ [0, 1]` of the multivalued dissolution graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissolutionValue {
    pub lo: f64,
    pub hi: f64,
}

impl DissolutionValue {
    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }
}

pub fn psi_multivalued(w: f64) -> DissolutionValue {
    if w < 0.0 {
        DissolutionValue { lo: 0.0, hi: 0.0 }
    } else if w == 0.0 {
        DissolutionValue { lo: 0.0, hi: 1.0 }
    } else {
        DissolutionValue { lo: 1.0, hi: 1.0 }
    }
}

/// Regularized dissolution ramp `ψ_δ`.
pub fn psi_delta(w: f64, delta: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else if w >= delta {
        1.0
    } else {
        w / delta
    }
}

/// Result of one surface ODE step: the new mineral mass and the
/// time-averaged dissolution value, so that `w_new = w + h k_d (R - z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceStep {
    pub w: f64,
    pub z: f64,
}

/// Advances `∂w/∂t = k_d (R(u, v) - z)` over one step with `(u, v)` frozen.
pub fn surface_ode_step(w: f64, u: f64, v: f64, h: f64, p: &KineticsParams) -> Result<SurfaceStep> {
    if !(h > 0.0) {
        return Err(Error::Argument(format!("time step must be positive, got {h}")));
    }
    let r = langmuir_rate(u, v, p);
    Ok(match p.mode {
        DissolutionMode::Regularized => {
            let z = psi_delta(w, p.delta);
            SurfaceStep {
                w: w + h * p.k_d * (r - z),
                z,
            }
        }
        DissolutionMode::Event => event_step(w, r, h, p.k_d),
    })
}

fn event_step(w: f64, r: f64, h: f64, k_d: f64) -> SurfaceStep {
    let mut w = w;
    let mut t = 0.0;
    // accumulated ∫ z dt over the step
    let mut z_int = 0.0;
    if w < 0.0 {
        // ψ = {0}: pure growth until the mineral mass reaches zero
        if r <= 0.0 {
            return SurfaceStep { w, z: 0.0 };
        }
        let t_hit = -w / (k_d * r);
        if t_hit >= h {
            return SurfaceStep {
                w: w + h * k_d * r,
                z: 0.0,
            };
        }
        w = 0.0;
        t = t_hit;
    }
    if w > 0.0 {
        let rate = k_d * (r - 1.0);
        if rate >= 0.0 {
            return SurfaceStep {
                w: w + (h - t) * rate,
                z: (h - t) / h,
            };
        }
        let t_hit = w / (-rate);
        if t + t_hit >= h {
            return SurfaceStep {
                w: w + (h - t) * rate,
                z: (h - t) / h,
            };
        }
        z_int += t_hit;
        t += t_hit;
    }
    // w == 0 for the remainder
    let rest = h - t;
    if r <= 1.0 {
        z_int += rest * r;
        SurfaceStep { w: 0.0, z: z_int / h }
    } else {
        z_int += rest;
        SurfaceStep {
            w: rest * k_d * (r - 1.0),
            z: z_int / h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(mode: DissolutionMode) -> KineticsParams {
        KineticsParams::new(1.0, 1.0, 1.0, 1.0, 0.1, mode).unwrap()
    }

    #[test]
    fn rate_examples() {
        let p = unit(DissolutionMode::Regularized);
        assert_eq!(langmuir_rate(0.0, 5.0, &p), 0.0);
        assert_eq!(langmuir_rate(-1.0, 3.0, &p), 0.0);
        assert!((langmuir_rate(1.0, 1.0, &p) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rate_maximum_on_diagonal_is_quarter_k() {
        let p = KineticsParams::new(3.0, 1.5, 2.0, 0.5, 0.1, DissolutionMode::Regularized).unwrap();
        // R is maximal along 1 + k1 u + k2 v -> large with k1 u = k2 v
        let r = langmuir_rate(1e6 / p.k1, 1e6 / p.k2, &p);
        assert!(r <= p.rate_bound());
        assert!((r - p.rate_bound()).abs() < 1e-5);
    }

    #[test]
    fn psi_branches() {
        assert_eq!(psi_multivalued(-0.3), DissolutionValue { lo: 0.0, hi: 0.0 });
        assert_eq!(psi_multivalued(0.0), DissolutionValue { lo: 0.0, hi: 1.0 });
        assert_eq!(psi_multivalued(7.0), DissolutionValue { lo: 1.0, hi: 1.0 });
        let d = 0.1;
        assert_eq!(psi_delta(d / 2.0, d), 0.5);
        assert_eq!(psi_delta(-1.0, d), 0.0);
        assert_eq!(psi_delta(2.0 * d, d), 1.0);
        assert_eq!(psi_delta(d, d), 1.0);
        assert_eq!(psi_delta(0.0, d), 0.0);
    }

    #[test]
    fn lipschitz_degenerate_box() {
        let p = unit(DissolutionMode::Regularized);
        assert_eq!(lipschitz_bound(&p, 0.0, 0.0).unwrap(), 0.0);
        let l = lipschitz_bound(&p, 1.0, 1.0).unwrap();
        // expression at u1 = u2 = v = 1: 1 * |4 + 1| = 5
        assert!(l >= 5.0);
        assert!(lipschitz_bound(&p, -1.0, 1.0).is_err());
    }

    #[test]
    fn event_holds_zero_when_precipitation_is_weak() {
        let p = unit(DissolutionMode::Event);
        // pick u, v with R = 0.2
        let (u, v) = (1.0, 1.0);
        let r = langmuir_rate(u, v, &p);
        let s = surface_ode_step(0.0, u, v, 0.1, &p).unwrap();
        assert_eq!(s.w, 0.0);
        assert!((s.z - r).abs() < 1e-15);
        let s = surface_ode_step(0.0, 0.0, 0.0, 0.1, &p).unwrap();
        assert_eq!(s, SurfaceStep { w: 0.0, z: 0.0 });
    }

    #[test]
    fn event_crossing_matches_linear_ode() {
        let p = unit(DissolutionMode::Event);
        let (u, v) = (1.0, 1.0);
        let r = langmuir_rate(u, v, &p);
        // analytic: w(t) = 1 + t k_d (R - 1), hits zero at t* = 1 / (k_d (1 - R))
        let t_star = 1.0 / (p.k_d * (1.0 - r));
        let h = 0.5;
        let s = surface_ode_step(1.0, u, v, h, &p).unwrap();
        assert!((s.w - (1.0 + h * (r - 1.0))).abs() < 1e-15);
        assert_eq!(s.z, 1.0);
        let h = t_star + 0.3;
        let s = surface_ode_step(1.0, u, v, h, &p).unwrap();
        assert_eq!(s.w, 0.0);
        let z_avg = (t_star + 0.3 * r) / h;
        assert!((s.z - z_avg).abs() < 1e-14);
        // consistency with the rate form
        assert!((s.w - (1.0 + h * p.k_d * (r - s.z))).abs() < 1e-14);
    }

    #[test]
    fn event_grows_when_precipitation_dominates() {
        let p = KineticsParams::new(20.0, 1.0, 1.0, 1.0, 0.1, DissolutionMode::Event).unwrap();
        let r = langmuir_rate(1.0, 1.0, &p);
        assert!(r > 1.0);
        let s = surface_ode_step(0.0, 1.0, 1.0, 0.1, &p).unwrap();
        assert!((s.w - 0.1 * (r - 1.0)).abs() < 1e-14);
        assert_eq!(s.z, 1.0);
    }

    #[test]
    fn regularized_step_is_explicit_euler() {
        let p = unit(DissolutionMode::Regularized);
        let s = surface_ode_step(0.05, 1.0, 1.0, 0.01, &p).unwrap();
        assert_eq!(s.z, 0.5);
        assert!((s.w - (0.05 + 0.01 * (1.0 / 9.0 - 0.5))).abs() < 1e-16);
        assert!(surface_ode_step(0.05, 1.0, 1.0, 0.0, &p).is_err());
    }

    #[test]
    fn validation_names_keys() {
        let e = KineticsParams::new(1.0, 1.0, 1.0, 1.0, 0.0, DissolutionMode::Regularized).unwrap_err();
        assert!(e.to_string().contains("kinetics.delta"));
        assert!(KineticsParams::new(1.0, 1.0, 1.0, 1.0, 0.0, DissolutionMode::Event).is_ok());
    }
}
