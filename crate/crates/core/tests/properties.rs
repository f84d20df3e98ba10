use crystal_homog::config::SimulationConfig;
use crystal_homog::geometry::{Inclusion, PerforatedDomain, UnitCell};
use crystal_homog::kinetics::{
    langmuir_rate, lipschitz_bound, psi_delta, psi_multivalued, surface_ode_step, DissolutionMode,
    KineticsParams,
};
use crystal_homog::upscaling::interpolate;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = KineticsParams> {
    (0.05..10.0, 0.05..10.0, 0.05..10.0, 0.05..10.0, 0.001..1.0, any::<bool>()).prop_map(
        |(k_f, k_d, k1, k2, delta, event)| {
            let mode = if event {
                DissolutionMode::Event
            } else {
                DissolutionMode::Regularized
            };
            KineticsParams::new(k_f, k_d, k1, k2, delta, mode).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn rate_is_bounded_and_nonnegative(p in params(), u in 0.0..1e3, v in 0.0..1e3) {
        let r = langmuir_rate(u, v, &p);
        prop_assert!((0.0..=p.k() / 4.0).contains(&r));
        prop_assert!(r <= p.rate_slope_u() * u * (1.0 + 1e-12));
        prop_assert!(r <= p.rate_slope_v() * v * (1.0 + 1e-12));
    }

    #[test]
    fn rate_is_symmetric_under_swapping_species(p in params(), u in 0.0..50.0, v in 0.0..50.0) {
        let swapped = KineticsParams { k1: p.k2, k2: p.k1, ..p };
        let a = langmuir_rate(u, v, &p);
        let b = langmuir_rate(v, u, &swapped);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0));
    }

    #[test]
    fn psi_delta_is_monotone_lipschitz_and_in_the_graph_limit(
        a in -2.0..2.0f64, b in -2.0..2.0f64, delta in 1e-3..1.0f64
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(psi_delta(lo, delta) <= psi_delta(hi, delta));
        prop_assert!(psi_delta(hi, delta) - psi_delta(lo, delta) <= (hi - lo) / delta * (1.0 + 1e-12));
        // ψ_δ(w) lies in ψ(w) outside the ramp
        if a <= 0.0 || a >= delta {
            prop_assert!(psi_multivalued(a).contains(psi_delta(a, delta)));
        }
    }

    #[test]
    fn regularized_surface_step_keeps_mass_nonnegative(
        p in params(), w in 0.0..2.0f64, u in 0.0..5.0f64, v in 0.0..5.0f64, frac in 0.01..1.0f64
    ) {
        let p = p.with_mode(DissolutionMode::Regularized);
        let h = frac * p.delta / p.k_d;
        let s = surface_ode_step(w, u, v, h, &p).unwrap();
        prop_assert!(s.w >= 0.0);
        prop_assert!((s.w - (w + h * p.k_d * (langmuir_rate(u, v, &p) - s.z))).abs() < 1e-12);
    }

    #[test]
    fn event_step_never_crosses_zero_from_above(
        p in params(), w in 0.0..1.0f64, u in 0.0..5.0f64, v in 0.0..5.0f64, h in 1e-4..1.0f64
    ) {
        let p = p.with_mode(DissolutionMode::Event);
        let s = surface_ode_step(w, u, v, h, &p).unwrap();
        prop_assert!(s.w >= 0.0);
        prop_assert!((0.0..=1.0).contains(&s.z));
        prop_assert!((s.w - (w + h * p.k_d * (langmuir_rate(u, v, &p) - s.z))).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bound_dominates_sampled_difference_quotients(
        p in params(), u1 in 0.0..3.0f64, u2 in 0.0..3.0f64, v in 0.0..3.0f64
    ) {
        prop_assume!((u1 - u2).abs() > 1e-6);
        let l = lipschitz_bound(&p, 3.0, 3.0).unwrap();
        let q = (langmuir_rate(u1, v, &p) - langmuir_rate(u2, v, &p)).abs() / (u1 - u2).abs();
        prop_assert!(q <= l);
    }

    #[test]
    fn interface_length_is_invariant_under_tiling(r in 0.1..0.4f64, k in 1usize..5) {
        let cell = UnitCell::new(16, Inclusion::Disk { radius: r }).unwrap();
        let eps = 1.0 / (1 << k) as f64;
        let dom = PerforatedDomain::new(&cell, eps, 1.0).unwrap();
        prop_assert!((dom.eps_gamma_length() - cell.boundary_measure()).abs() < 1e-12);
        prop_assert!((dom.pore_fraction() - cell.pore_volume()).abs() < 1e-12);
        // χ_ε(x) = χ(x/ε mod 1)
        let n = cell.resolution();
        for (c, &p) in dom.pore_mask().iter().enumerate() {
            let (i, j) = (c % dom.n(), c / dom.n());
            prop_assert_eq!(p, cell.is_pore(i % n, j % n));
        }
    }

    #[test]
    fn interpolation_is_exact_for_affine_fields(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, x in 0.2..0.8f64, y in 0.2..0.8f64
    ) {
        let n = 8;
        let dx = 1.0 / n as f64;
        let field: Vec<f64> = (0..n * n)
            .map(|k| a + b * ((k % n) as f64 + 0.5) * dx + c * ((k / n) as f64 + 0.5) * dx)
            .collect();
        prop_assert!((interpolate(&field, n, 1.0, [x, y]) - (a + b * x + c * y)).abs() < 1e-12);
    }

    #[test]
    fn config_round_trips(
        k_f in 0.1..5.0f64, delta in 0.05..1.0f64, d in -1.0..0.0f64, eps_pow in 1u32..4, stride in 0usize..10
    ) {
        let text = format!(
            "[kinetics]\nk_f = {k_f}\ndelta = {delta}\n[boundary]\nd = {d}\n\
             [geometry]\nepsilon = {}\n[time]\nT = 0.1\nh = 0.01\nsnapshot_stride = {stride}\n",
            1.0 / 2f64.powi(eps_pow as i32)
        );
        let cfg = SimulationConfig::parse(&text).unwrap();
        let again = SimulationConfig::parse(&cfg.emit()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(again.kinetics.k_f, k_f);
    }
}
