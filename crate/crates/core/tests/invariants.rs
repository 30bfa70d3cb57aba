//! Conservation, dissipation and equilibrium properties over many systems
//! and starting points.

use std::collections::BTreeMap;

use metriplectic::analysis::{
    check_regular_equivalence, default_seeds, find_equilibria, integrate, structural_suite, EquilibriumOptions,
    IntegratorConfig, SuiteOptions,
};
use metriplectic::sampling::{casimir_samples, uniform_box};
use metriplectic::systems::{builtin, default_system, list_builtins, OSCILLATOR, RIGID_BODY};
use metriplectic::{MetriplecticSystem, Vec3};
use proptest::prelude::*;

fn rigid_body(a: f64, b: f64, c: f64) -> MetriplecticSystem {
    let p = BTreeMap::from([("a".to_string(), a), ("b".to_string(), b), ("c".to_string(), c)]);
    builtin(RIGID_BODY, &p).unwrap().into_system().unwrap()
}

#[test]
fn energy_and_entropy_from_random_starts() {
    let cfg = IntegratorConfig { stop_at_rest: false, ..IntegratorConfig::rk4(1e-3, 100.0) };
    for info in list_builtins() {
        let sys = default_system(info.name).unwrap();
        for x0 in uniform_box(10, 11, 2.0) {
            let rec = integrate(&sys, x0, &cfg).unwrap();
            let s = &rec.summary;
            let h0 = sys.energy(x0);
            assert!(s.h_drift_max <= 1e-8 * (1.0 + h0.abs()), "{} from {x0}: drift {}", info.name, s.h_drift_max);
            assert!(s.monotone_checked);
            assert_eq!(s.s_monotone_violations, 0, "{} from {x0}", info.name);
        }
    }
}

#[test]
fn entropy_rate_matches_dissipation() {
    let sys = default_system(OSCILLATOR).unwrap();
    let h = 1e-3;
    let cfg = IntegratorConfig { stop_at_rest: false, ..IntegratorConfig::rk4(h, 20.0) };
    let rec = integrate(&sys, Vec3::new(1.0, 0.0, 0.5), &cfg).unwrap();
    for (&k, d) in rec.sample_steps.iter().zip(&rec.diagnostics) {
        if k == 0 || k + 1 >= rec.states.len() {
            continue;
        }
        let s = |i: usize| sys.entropy_value(rec.states[i]);
        let fd = (s(k + 1) - s(k - 1)) / (2.0 * h);
        let floor = 4.0 * f64::EPSILON * s(k).abs() / (2.0 * h);
        assert!((fd - d.dissipation).abs() <= 1e-4 * d.dissipation.abs() + floor, "step {k}: {fd} vs {}", d.dissipation);
    }
}

#[test]
fn equilibria_are_fixed_points_of_the_flow() {
    let cfg = IntegratorConfig { stop_at_rest: false, ..IntegratorConfig::rk4(1e-3, 10.0) };
    let cases: [(&str, f64); 4] = [("rigid_body", 3.0), ("oscillator", 2.0), ("degenerate_ex1", 1.125), ("degenerate_ex2", 1.0)];
    for (name, level) in cases {
        let sys = default_system(name).unwrap();
        let opts = EquilibriumOptions { level: Some(level), ..Default::default() };
        let found = find_equilibria(&sys, &default_seeds(&sys, level), &opts);
        assert!(!found.equilibria.is_empty(), "{name}");
        for e in &found.equilibria {
            assert!(e.residual <= opts.newton_tol, "{name}: {e:?}");
            let rec = integrate(&sys, e.point, &cfg).unwrap();
            let moved = rec.states.iter().fold(0.0_f64, |m, s| m.max(s.distance(e.point)));
            assert!(moved < 1e-8, "{name}: {} moved {moved}", e.point);
        }
    }
}

#[test]
fn regular_equivalence_holds_for_builtins() {
    for info in list_builtins() {
        let sys = default_system(info.name).unwrap();
        let r = check_regular_equivalence(&sys, &casimir_samples(), 1e-10);
        assert!(r.pass(), "{}: {:?}", info.name, r.counterexamples);
    }
}

#[test]
fn equal_coefficients_kill_dissipation() {
    let sys = rigid_body(2.0, 2.0, 2.0);
    for x in casimir_samples() {
        let p = sys.parts(x);
        assert!(p.xi_g.norm() <= 1e-13 * (1.0 + p.dh.norm_squared() * p.ds.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_for_any_rigid_body(
        a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64,
        seed in any::<u64>(),
    ) {
        let sys = rigid_body(a, b, c);
        let rep = structural_suite(&sys, &uniform_box(50, seed, 2.0), SuiteOptions::default());
        prop_assert!(rep.pass(), "{:#?}", rep);
    }

    #[test]
    fn identities_for_any_oscillator_entropy(
        coeffs in proptest::collection::vec(-3.0..3.0f64, 7),
        seed in any::<u64>(),
    ) {
        let params: BTreeMap<String, f64> = coeffs.iter().enumerate().map(|(k, v)| (format!("s{k}"), *v)).collect();
        let sys = builtin(OSCILLATOR, &params).unwrap().into_system().unwrap();
        prop_assert!(sys.casimir_verified);
        let rep = structural_suite(&sys, &uniform_box(50, seed, 2.0), SuiteOptions::default());
        prop_assert!(rep.pass(), "{:#?}", rep);
    }

    #[test]
    fn field_is_tangent_to_energy_levels(x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64) {
        for info in list_builtins() {
            let sys = default_system(info.name).unwrap();
            let p = sys.parts(Vec3::new(x, y, z));
            let scale = p.dh.norm() * (p.p.frobenius() * p.dh.norm() + p.dh.norm_squared() * p.ds.norm());
            prop_assert!(p.dh.dot(p.xi()).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }
}
