//! Trajectory- and sample-level checks of equilibrium and invariance claims.

use serde::Serialize;

use crate::analysis::integrate::{integrate, IntegrationError, IntegratorConfig};
use crate::dynamics::{MetriplecticSystem, DIAG_TOL};
use crate::linalg3::Vec3;
use crate::systems::{default_system, RegistryError, DEGENERATE_EX1, DEGENERATE_EX2};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceCounterexample {
    pub point: Vec3,
    pub xi_p_norm: f64,
    pub xi_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegularEquivalenceReport {
    /// Regular samples that were tested.
    pub checked: usize,
    /// Samples where `P` vanishes; the equivalence is not claimed there.
    pub skipped_nonregular: usize,
    /// Regular samples where both fields vanish.
    pub both_zero: usize,
    pub counterexamples: Vec<EquivalenceCounterexample>,
}

impl RegularEquivalenceReport {
    pub fn pass(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// At each regular sample, tests `‖ξ_P‖ < tol ⇔ ‖ξ‖ < tol`.
pub fn check_regular_equivalence(sys: &MetriplecticSystem, samples: &[Vec3], tol: f64) -> RegularEquivalenceReport {
    let mut report = RegularEquivalenceReport::default();
    for &x in samples {
        if !sys.is_regular(x, DIAG_TOL) {
            report.skipped_nonregular += 1;
            continue;
        }
        report.checked += 1;
        let parts = sys.parts(x);
        let (np, nx) = (parts.xi_p.norm(), parts.xi().norm());
        match (np < tol, nx < tol) {
            (true, true) => report.both_zero += 1,
            (false, false) => {}
            _ => report.counterexamples.push(EquivalenceCounterexample { point: x, xi_p_norm: np, xi_norm: nx }),
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafReport {
    pub pass: bool,
    /// `‖dS‖` at the start; the check is vacuous unless this is `≤ tol`.
    pub initial_ds_norm: f64,
    pub max_ds_norm: f64,
    pub first_violation: Option<f64>,
    pub final_state: Vec3,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("precondition failed: |dS(x0)| = {ds_norm:e} exceeds {tol:e}")]
    NotOnLeaf { ds_norm: f64, tol: f64 },
    #[error("initial point must lie on y = 0, got y = {y:e}")]
    NotOnPlane { y: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Integrates from a point with `dS = 0` and checks `‖dS‖ ≤ 10·tol` at
/// every step.
pub fn check_invariant_leaf(sys: &MetriplecticSystem, x0: Vec3, cfg: &IntegratorConfig, tol: f64) -> Result<LeafReport, CheckError> {
    let initial = sys.entropy.grad(x0).norm();
    if initial.is_nan() || initial > tol {
        return Err(CheckError::NotOnLeaf { ds_norm: initial, tol });
    }
    let rec = integrate(sys, x0, cfg)?;
    let mut max_ds: f64 = 0.0;
    let mut first_violation = None;
    for (&t, &x) in rec.times.iter().zip(&rec.states) {
        let n = sys.entropy.grad(x).norm();
        max_ds = max_ds.max(n);
        if first_violation.is_none() && n > 10.0 * tol {
            first_violation = Some(t);
        }
    }
    Ok(LeafReport {
        pass: first_violation.is_none(),
        initial_ds_norm: initial,
        max_ds_norm: max_ds,
        first_violation,
        final_state: rec.summary.final_state,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DegenerateExample {
    /// `H = ½‖m‖²`: the plane `y = 0` is invariant.
    One,
    /// `H = ½(x² + (y−1)² + z²)`: only its `z = 0` line is.
    Two,
}

impl DegenerateExample {
    pub fn system_name(self) -> &'static str {
        match self {
            DegenerateExample::One => DEGENERATE_EX1,
            DegenerateExample::Two => DEGENERATE_EX2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegenerateReport {
    pub example: DegenerateExample,
    pub max_abs_y: f64,
    /// `max|y| ≤ tol` over the run.
    pub stayed_on_plane: bool,
    /// Whether `stayed_on_plane` agrees with the expected behavior: always
    /// for Example 1, only when `z0 = 0` for Example 2.
    pub as_expected: bool,
    pub final_state: Vec3,
    pub max_displacement: f64,
}

pub fn check_degenerate_invariance(
    example: DegenerateExample,
    x0: Vec3,
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<DegenerateReport, CheckError> {
    if x0.y != 0.0 {
        return Err(CheckError::NotOnPlane { y: x0.y });
    }
    let sys = default_system(example.system_name())?;
    let rec = integrate(&sys, x0, cfg)?;
    let max_abs_y = rec.states.iter().fold(0.0_f64, |m, s| m.max(s.y.abs()));
    let max_displacement = rec.states.iter().fold(0.0_f64, |m, s| m.max(s.distance(x0)));
    let stayed_on_plane = max_abs_y <= tol;
    let expected = match example {
        DegenerateExample::One => true,
        DegenerateExample::Two => x0.z == 0.0,
    };
    Ok(DegenerateReport {
        example,
        max_abs_y,
        stayed_on_plane,
        as_expected: stayed_on_plane == expected,
        final_state: rec.summary.final_state,
        max_displacement,
    })
}
