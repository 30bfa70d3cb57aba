//! Sample-based checks of the pointwise identities behind the flow.
//!
//! Every residual is divided by the natural magnitude of the terms that
//! cancel to produce it, so the tolerances are close to machine precision
//! independent of where the sample lies.

use serde::Serialize;

use crate::dynamics::{closed_form_oscillator, closed_form_rigid_body, MetriplecticSystem};
use crate::fields::verify_casimir;
use crate::linalg3::{cross, Vec3};
use crate::metric::{build_g, double_cross, rank_check, sigma, RANK_TOL};
use crate::systems::SystemSpec;

pub const CASIMIR_TOL: f64 = crate::dynamics::CASIMIR_TOL;
pub const G_DH_TOL: f64 = 1e-13;
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tol: f64,
    /// Samples violating the check.
    pub failures: usize,
    pub worst_point: Option<Vec3>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralReport {
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl StructuralReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `r / scale`, with `0/0 = 0`.
fn rel(r: f64, scale: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r / scale
    }
}

struct Acc {
    name: &'static str,
    tol: f64,
    max: f64,
    worst: Option<Vec3>,
    failures: usize,
}

impl Acc {
    fn new(name: &'static str, tol: f64) -> Self {
        Acc { name, tol, max: 0.0, worst: None, failures: 0 }
    }

    fn push(&mut self, x: Vec3, r: f64) {
        // NaN counts as a failure
        if r.is_nan() || r > self.tol {
            self.failures += 1;
        }
        if r.is_nan() || r > self.max {
            self.max = r;
            self.worst = Some(x);
        }
    }

    fn done(self) -> CheckResult {
        CheckResult {
            name: self.name,
            max_residual: self.max,
            tol: self.tol,
            failures: self.failures,
            worst_point: self.worst,
            pass: self.failures == 0,
        }
    }
}

/// Which checks to run; the Casimir and orthogonality checks can be turned
/// off for systems known to violate them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub casimir: bool,
    pub ortho: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { casimir: true, ortho: true }
    }
}

/// Runs, at every sample:
///
/// * `casimir`: `‖P dS‖ / (1 + ‖P‖_F‖dS‖)`
/// * `g_dh`: `‖g dH‖ / ‖dH‖³`
/// * `rank`: `g` has rank 0 at `dH = 0` and 2 elsewhere; the residual is the
///   eigen-relation error on the image of `g`
/// * `ortho`: `|ξ_P·ξ_g| / (‖P‖_F‖dH‖³‖dS‖)`
/// * `dissipation`: `|dS·g dS + ‖σ‖²| / (‖dS‖²‖dH‖²)`
/// * `double_cross`: `‖g dS − dH×(dH×dS)‖ / (‖dH‖²‖dS‖)`
/// * `cross_form`: `‖ξ − (P dH + dH×(dH×dS))‖ / (‖P‖_F‖dH‖ + ‖dH‖²‖dS‖)`
/// * `energy`: `|dH·ξ| / (‖dH‖(‖P‖_F‖dH‖ + ‖dH‖²‖dS‖))`
pub fn structural_suite(sys: &MetriplecticSystem, samples: &[Vec3], opts: SuiteOptions) -> StructuralReport {
    let mut checks = Vec::new();
    if opts.casimir {
        let rep = verify_casimir(&sys.poisson, &sys.entropy, samples, CASIMIR_TOL);
        let mut acc = Acc::new("casimir", CASIMIR_TOL);
        for s in &rep.samples {
            let scale = s.bound / CASIMIR_TOL;
            acc.push(s.point, rel(s.residual, scale));
        }
        checks.push(acc.done());
    }

    let mut g_dh = Acc::new("g_dh", G_DH_TOL);
    let mut rank = Acc::new("rank", IDENTITY_TOL);
    let mut ortho = Acc::new("ortho", IDENTITY_TOL);
    let mut dissipation = Acc::new("dissipation", IDENTITY_TOL);
    let mut dcross = Acc::new("double_cross", IDENTITY_TOL);
    let mut cform = Acc::new("cross_form", IDENTITY_TOL);
    let mut energy = Acc::new("energy", IDENTITY_TOL);

    for &x in samples {
        let parts = sys.parts(x);
        let (dh, ds) = (parts.dh, parts.ds);
        let (nh, ns, np) = (dh.norm(), ds.norm(), parts.p.frobenius());
        let g = build_g(dh);

        g_dh.push(x, rel((g.g * dh).norm(), nh * nh * nh));
        match rank_check(dh, RANK_TOL) {
            Ok(r) => rank.push(x, r.eigen_residual),
            Err(_) => rank.push(x, f64::INFINITY),
        }
        ortho.push(x, rel(parts.xi_p.dot(parts.xi_g).abs(), np * nh * nh * nh * ns));
        let gds = g.apply(ds);
        dissipation.push(x, rel((ds.dot(gds) + sigma(ds, dh).norm_squared()).abs(), ns * ns * nh * nh));
        dcross.push(x, rel((gds - cross(dh, cross(dh, ds))).norm(), nh * nh * ns));
        let field_scale = np * nh + nh * nh * ns;
        cform.push(x, rel((parts.xi() - (parts.p * dh + double_cross(dh, ds))).norm(), field_scale));
        energy.push(x, rel(dh.dot(parts.xi()).abs(), nh * field_scale));
    }
    checks.push(g_dh.done());
    checks.push(rank.done());
    if opts.ortho {
        checks.push(ortho.done());
    }
    checks.extend([dissipation.done(), dcross.done(), cform.done(), energy.done()]);
    StructuralReport { samples: samples.len(), checks }
}

/// Compares `ξ` with the component-wise closed form of a built-in system,
/// relative to `1 + ‖ξ‖`. `None` for systems without one.
pub fn closed_form_check(spec: &SystemSpec, sys: &MetriplecticSystem, samples: &[Vec3]) -> Option<CheckResult> {
    let oracle: Box<dyn Fn(Vec3) -> Vec3> = if let Some((a, b, c)) = spec.rigid_body_coefficients() {
        Box::new(move |m| closed_form_rigid_body(a, b, c, m))
    } else if spec.oscillator_coefficients().is_some() {
        let s_prime = spec.entropy.partial(2);
        Box::new(move |m| closed_form_oscillator(|z| s_prime.eval(Vec3::new(0.0, 0.0, z)), m))
    } else {
        return None;
    };
    let mut acc = Acc::new("closed_form", IDENTITY_TOL);
    for &x in samples {
        let xi = sys.xi(x);
        acc.push(x, (xi - oracle(x)).norm() / (1.0 + xi.norm()));
    }
    Some(acc.done())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::casimir_samples;
    use crate::systems::{builtin, list_builtins};
    use std::collections::BTreeMap;

    #[test]
    fn builtins_pass() {
        for info in list_builtins() {
            let spec = builtin(info.name, &BTreeMap::new()).unwrap();
            let sys = spec.clone().into_system().unwrap();
            let samples = casimir_samples();
            let rep = structural_suite(&sys, &samples, SuiteOptions::default());
            assert!(rep.pass(), "{}: {:#?}", info.name, rep);
            if let Some(c) = closed_form_check(&spec, &sys, &samples) {
                assert!(c.pass, "{}: {c:?}", info.name);
            }
        }
    }

    #[test]
    fn non_casimir_fails_casimir_and_ortho() {
        let sys = MetriplecticSystem::new(
            "bad",
            crate::fields::PoissonField::rigid_body(),
            "0.5x^2 + 1y^2 + 1.5z^2".parse().unwrap(),
            "x".parse().unwrap(),
        )
        .unwrap();
        let rep = structural_suite(&sys, &casimir_samples(), SuiteOptions::default());
        assert!(!rep.get("casimir").unwrap().pass);
        assert!(!rep.get("ortho").unwrap().pass);
        assert!(rep.get("dissipation").unwrap().pass);
        let rep = structural_suite(&sys, &casimir_samples(), SuiteOptions { casimir: false, ortho: false });
        assert!(rep.pass());
    }

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(rel(0.0, 0.0), 0.0);
        assert!(rel(1.0, 0.0).is_infinite());
    }
}
