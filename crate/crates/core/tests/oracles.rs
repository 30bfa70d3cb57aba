//! Frozen values derived by hand (or by an independent implementation) for
//! the built-in systems.

use metriplectic::analysis::equilibria::classify;
use metriplectic::analysis::{integrate, EquilibriumOptions, IntegratorConfig, Stability};
use metriplectic::systems::{builtin, default_system, DEGENERATE_EX1, DEGENERATE_EX2, OSCILLATOR, RIGID_BODY};
use metriplectic::{build_g, diagnose, Vec3};
use num_complex::Complex64;
use std::collections::BTreeMap;

fn rigid_body(a: f64, b: f64, c: f64) -> metriplectic::MetriplecticSystem {
    let p = BTreeMap::from([("a".to_string(), a), ("b".to_string(), b), ("c".to_string(), c)]);
    builtin(RIGID_BODY, &p).unwrap().into_system().unwrap()
}

fn sorted(mut e: Vec<Complex64>) -> Vec<Complex64> {
    e.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    e
}

fn assert_spectrum(got: &[Complex64], want: &[Complex64], tol: f64) {
    let (g, w) = (sorted(got.to_vec()), sorted(want.to_vec()));
    assert_eq!(g.len(), w.len());
    for (a, b) in g.iter().zip(&w) {
        assert!((a - b).norm() <= tol, "got {g:?}, want {w:?}");
    }
}

#[test]
fn rigid_body_at_ones() {
    // dH = (1, 2, 3), dS = (1, 1, 1): PdH = dH × dS = (−1, 2, −1),
    // g dS = dH (dH·dS) − dS ‖dH‖² = 6 dH − 14 dS = (−8, −2, 4)
    let d = diagnose(&rigid_body(1.0, 2.0, 3.0), Vec3::splat(1.0), 1e-10);
    assert_eq!(d.xi_p, Vec3::new(-1.0, 2.0, -1.0));
    assert_eq!(d.xi_g, Vec3::new(-8.0, -2.0, 4.0));
    assert_eq!(d.xi, Vec3::new(-9.0, 0.0, 3.0));
    assert_eq!(d.ortho_residual, 0.0);
    // σ = dS × dH = (1, −2, 1)
    assert_eq!(d.sigma, Vec3::new(1.0, -2.0, 1.0));
    assert_eq!(d.dissipation, -6.0);
    assert_eq!(d.ds.dot(d.xi), -6.0);
    assert!(d.regular);
    assert_eq!(d.p_rank, 2);
}

#[test]
fn metric_examples() {
    let g = build_g(Vec3::new(1.0, 2.0, 3.0)).g;
    assert_eq!(g.rows, [[-13.0, 2.0, 3.0], [2.0, -10.0, 6.0], [3.0, 6.0, -5.0]]);
    assert_eq!(g.trace(), -28.0);
    assert_eq!(g * Vec3::new(1.0, 2.0, 3.0), Vec3::ZERO);
}

#[test]
fn tangential_spectra() {
    let opts = EquilibriumOptions::default();
    let c = Complex64::new;
    let (s2, s3, s5, s6) = (2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt(), 6f64.sqrt());

    // long pole: J_t = [[6, 2√6], [−√6, 12]] → 9 ± i√3
    let rb = rigid_body(1.0, 2.0, 3.0);
    let r = classify(&rb, Vec3::new(s6, 0.0, 0.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(9.0, s3), c(9.0, -s3)], 1e-12);
    assert_eq!(r.stability, Stability::Unstable);
    // middle pole: J_t = [[−6, −√3], [−√3, 6]] → ±√39
    let r = classify(&rb, Vec3::new(0.0, s3, 0.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(39f64.sqrt(), 0.0), c(-(39f64.sqrt()), 0.0)], 1e-12);
    assert_eq!(r.stability, Stability::Unstable);
    // short pole: J_t = [[−12, −√2], [2√2, −6]] → −9 ± √5
    let r = classify(&rb, Vec3::new(0.0, 0.0, s2), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(-9.0 + s5, 0.0), c(-9.0 - s5, 0.0)], 1e-12);
    assert_eq!(r.stability, Stability::Stable);

    // a = b: the equator is a circle of equilibria, J_t = [[0, 2√6], [0, 12]]
    let r = classify(&rigid_body(1.0, 1.0, 3.0), Vec3::new(s6, 0.0, 0.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(0.0, 0.0), c(12.0, 0.0)], 1e-12);
    assert_eq!(r.stability, Stability::Undetermined);

    // oscillator pole (0, 0, z0): J_t = [[z0², 1], [−1, z0²]]
    let r = classify(&default_system(OSCILLATOR).unwrap(), Vec3::new(0.0, 0.0, 2.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(4.0, 1.0), c(4.0, -1.0)], 1e-12);

    // Example 1 at (r0, 0, 0): diag(−r0, −r0²); at (−r0, 0, 0): diag(r0, −r0²)
    let ex1 = default_system(DEGENERATE_EX1).unwrap();
    let r = classify(&ex1, Vec3::new(1.5, 0.0, 0.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(-1.5, 0.0), c(-2.25, 0.0)], 1e-12);
    assert_eq!(r.stability, Stability::Stable);
    let r = classify(&ex1, Vec3::new(-1.5, 0.0, 0.0), &opts);
    assert_spectrum(&r.tangential_eigenvalues, &[c(1.5, 0.0), c(-2.25, 0.0)], 1e-12);
    assert_eq!(r.stability, Stability::Unstable);
}

#[test]
fn degenerate_fields_on_the_plane() {
    // on y = 0, P = 0 and ξ = g dS = (xz², 0, −x²z)
    let ex1 = default_system(DEGENERATE_EX1).unwrap();
    assert_eq!(ex1.xi(Vec3::new(2.0, 0.0, 3.0)), Vec3::new(18.0, 0.0, -12.0));
    // Example 2: dH = (x, y − 1, z) so ξ_y = H2·H3·S′ = (−1)(½)(½) at (1, 0, ½)
    let ex2 = default_system(DEGENERATE_EX2).unwrap();
    let xi = ex2.xi(Vec3::new(1.0, 0.0, 0.5));
    assert_eq!(xi.y, -0.25);
    assert_eq!(ex2.xi(Vec3::new(1.0, 0.0, 0.0)), Vec3::ZERO);
}

/// Reference numbers for the (1, 2, 3) rigid body from (1, 1, 1) over
/// t = 100, produced by an independent double-precision RK4 script.
#[test]
fn rk4_drift_reference() {
    let sys = rigid_body(1.0, 2.0, 3.0);
    let run = |h: f64| {
        let cfg = IntegratorConfig { stop_at_rest: false, ..IntegratorConfig::rk4(h, 100.0) };
        integrate(&sys, Vec3::splat(1.0), &cfg).unwrap().summary
    };
    let coarse = run(1e-3);
    assert!((coarse.h_drift_max / 8.0924e-11 - 1.0).abs() < 0.01, "{}", coarse.h_drift_max);
    assert!((sys.entropy_value(coarse.final_state) - 1.000000000026963).abs() < 1e-14);
    let fine = run(5e-4);
    assert!((fine.h_drift_max / 5.0675e-12 - 1.0).abs() < 0.01, "{}", fine.h_drift_max);
}
