//! The metriplectic vector field `ξ = P dH + g(dH) dS` and its pointwise
//! diagnostics.

use serde::Serialize;
use thiserror::Error;

use crate::fields::{verify_casimir, PoissonField, ScalarField, DEFAULT_MAX_DEGREE};
use crate::linalg3::{cross, rank3, Mat3, Vec3};
use crate::metric::{build_g, dissipation_rate, sigma};
use crate::sampling;

/// Relative tolerance for the Casimir check run at construction.
pub const CASIMIR_TOL: f64 = 1e-12;
/// Default tolerance for [`diagnose`] and [`rest_state`].
pub const DIAG_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("{which} has degree {degree}, above the limit of {max}")]
    DegreeTooHigh { which: &'static str, degree: u64, max: u32 },
    #[error("{which} has a non-finite coefficient")]
    NonFinite { which: &'static str },
}

/// A Poisson tensor `P`, energy `H` and entropy-like Casimir `S`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetriplecticSystem {
    pub name: String,
    pub poisson: PoissonField,
    pub hamiltonian: ScalarField,
    pub entropy: ScalarField,
    /// Outcome of the sampled `P dS = 0` check at construction time.
    pub casimir_verified: bool,
}

impl MetriplecticSystem {
    /// Builds a system with the default degree cap, verifying the Casimir
    /// property on the default sample set. A failed Casimir check is
    /// recorded, not rejected.
    pub fn new(
        name: impl Into<String>,
        poisson: PoissonField,
        hamiltonian: ScalarField,
        entropy: ScalarField,
    ) -> Result<Self, SystemError> {
        Self::with_max_degree(name, poisson, hamiltonian, entropy, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(
        name: impl Into<String>,
        poisson: PoissonField,
        hamiltonian: ScalarField,
        entropy: ScalarField,
        max_degree: u32,
    ) -> Result<Self, SystemError> {
        let [p12, p13, p23] = poisson.entries();
        let named = [("P12", p12), ("P13", p13), ("P23", p23), ("H", &hamiltonian), ("S", &entropy)];
        for (which, f) in named {
            if f.degree() > u64::from(max_degree) {
                return Err(SystemError::DegreeTooHigh { which, degree: f.degree(), max: max_degree });
            }
            if f.terms().any(|(_, c)| !c.is_finite()) {
                return Err(SystemError::NonFinite { which });
            }
        }
        let casimir_verified =
            verify_casimir(&poisson, &entropy, &sampling::casimir_samples(), CASIMIR_TOL).pass;
        Ok(MetriplecticSystem { name: name.into(), poisson, hamiltonian, entropy, casimir_verified })
    }

    pub fn energy(&self, x: Vec3) -> f64 {
        self.hamiltonian.eval(x)
    }

    pub fn entropy_value(&self, x: Vec3) -> f64 {
        self.entropy.eval(x)
    }

    /// Both halves of the field at `x`.
    pub fn parts(&self, x: Vec3) -> FieldParts {
        let dh = self.hamiltonian.grad(x);
        let ds = self.entropy.grad(x);
        let p = self.poisson.eval(x);
        FieldParts { dh, ds, p, xi_p: p * dh, xi_g: build_g(dh).apply(ds) }
    }

    pub fn xi(&self, x: Vec3) -> Vec3 {
        xi_field(self, x)
    }

    /// Exact Jacobian `∂ξ/∂x` from the polynomial derivatives of P, H and S.
    pub fn xi_jacobian(&self, x: Vec3) -> Mat3 {
        let h = self.hamiltonian.grad(x);
        let s = self.entropy.grad(x);
        let hess_h = self.hamiltonian.hessian(x);
        let hess_s = self.entropy.hessian(x);
        let p = self.poisson.eval(x);
        let dp = self.poisson.partials(x);

        // ξ = P h + (h·s) h − (h·h) s
        let dp_h = Mat3::from_cols(dp[0] * h, dp[1] * h, dp[2] * h);
        let grad_hs = hess_h * s + hess_s * h;
        let grad_hh = hess_h * h * 2.0;
        dp_h + p * hess_h + Mat3::outer(h, grad_hs) + hess_h.scale(h.dot(s))
            - Mat3::outer(s, grad_hh)
            - hess_s.scale(h.norm_squared())
    }

    /// Whether `P(x)` is nonzero under the relative threshold
    /// `max|P_ij(x)| > tol·(1 + ‖x‖)`.
    pub fn is_regular(&self, x: Vec3, tol: f64) -> bool {
        self.poisson.eval(x).max_norm() > tol * (1.0 + x.norm())
    }
}

/// Pieces of `ξ` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldParts {
    pub dh: Vec3,
    pub ds: Vec3,
    pub p: Mat3,
    /// Hamiltonian part `P dH`.
    pub xi_p: Vec3,
    /// Dissipative part `g dS`.
    pub xi_g: Vec3,
}

impl FieldParts {
    pub fn xi(&self) -> Vec3 {
        self.xi_p + self.xi_g
    }
}

pub fn xi_field(sys: &MetriplecticSystem, x: Vec3) -> Vec3 {
    sys.parts(x).xi()
}

/// Everything worth knowing about the field at a single point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticSample {
    pub x: Vec3,
    pub h_val: f64,
    pub s_val: f64,
    pub dh: Vec3,
    pub ds: Vec3,
    pub sigma: Vec3,
    pub xi: Vec3,
    pub xi_p: Vec3,
    pub xi_g: Vec3,
    /// `−‖σ‖²`.
    pub dissipation: f64,
    /// `ξ_P · ξ_g`.
    pub ortho_residual: f64,
    /// `|ξ_P · ξ_g| ≤ tol·(1 + ‖ξ_P‖‖ξ_g‖)`.
    pub ortho_ok: bool,
    pub p_rank: usize,
    pub regular: bool,
}

impl DiagnosticSample {
    pub fn sigma2(&self) -> f64 {
        -self.dissipation
    }
}

pub fn diagnose(sys: &MetriplecticSystem, x: Vec3, tol: f64) -> DiagnosticSample {
    let parts = sys.parts(x);
    let sig = sigma(parts.ds, parts.dh);
    let ortho = parts.xi_p.dot(parts.xi_g);
    DiagnosticSample {
        x,
        h_val: sys.energy(x),
        s_val: sys.entropy_value(x),
        dh: parts.dh,
        ds: parts.ds,
        sigma: sig,
        xi: parts.xi(),
        xi_p: parts.xi_p,
        xi_g: parts.xi_g,
        dissipation: dissipation_rate(parts.ds, parts.dh),
        ortho_residual: ortho,
        ortho_ok: ortho.abs() <= tol * (1.0 + parts.xi_p.norm() * parts.xi_g.norm()),
        p_rank: rank3(&parts.p, tol),
        regular: parts.p.max_norm() > tol * (1.0 + x.norm()),
    }
}

/// Dissipation is off: `‖σ‖² ≤ tol·(1 + ‖dS‖²‖dH‖²)`.
pub fn rest_state(sample: &DiagnosticSample, tol: f64) -> bool {
    sample.sigma.norm_squared() <= tol * (1.0 + sample.ds.norm_squared() * sample.dh.norm_squared())
}

/// The relaxing rigid body written out component by component, for
/// `H = ½(ax² + by² + cz²)` and `S = ½‖m‖²`.
pub fn closed_form_rigid_body(a: f64, b: f64, c: f64, m: Vec3) -> Vec3 {
    let Vec3 { x, y, z } = m;
    Vec3::new(
        (b - c) * y * z + b * y * (a - b) * x * y + c * z * (a - c) * x * z,
        (c - a) * x * z + c * z * (b - c) * y * z + a * x * (b - a) * x * y,
        (a - b) * x * y + a * x * (c - a) * x * z + b * y * (c - b) * y * z,
    )
}

/// Rigid-body field in cross-product form `dH × dS + dH × (dH × dS)`.
pub fn cross_form_rigid_body(a: f64, b: f64, c: f64, m: Vec3) -> Vec3 {
    let dh = Vec3::new(a * m.x, b * m.y, c * m.z);
    let ham = cross(dh, m);
    ham + cross(dh, ham)
}

/// The dissipative oscillator with `H = ½‖m‖²` and `S = S(z)`:
/// `(y + xzS′, −x + yzS′, −(x² + y²)S′)` with `S′` evaluated at `z`.
pub fn closed_form_oscillator(s_prime: impl Fn(f64) -> f64, m: Vec3) -> Vec3 {
    let Vec3 { x, y, z } = m;
    let sp = s_prime(z);
    Vec3::new(y + x * z * sp, -x + y * z * sp, -(x * x + y * y) * sp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigid_body(a: f64, b: f64, c: f64) -> MetriplecticSystem {
        let h = ScalarField::from_terms([(0.5 * a, [2, 0, 0]), (0.5 * b, [0, 2, 0]), (0.5 * c, [0, 0, 2])]);
        let s = ScalarField::from_terms([(0.5, [2, 0, 0]), (0.5, [0, 2, 0]), (0.5, [0, 0, 2])]);
        MetriplecticSystem::new("rb", PoissonField::rigid_body(), h, s).unwrap()
    }

    fn oscillator() -> MetriplecticSystem {
        let p = PoissonField::new(ScalarField::constant(1.0), ScalarField::zero(), ScalarField::zero());
        let h = "0.5x^2 + 0.5y^2 + 0.5z^2".parse().unwrap();
        MetriplecticSystem::new("osc", p, h, "0.5z^2".parse().unwrap()).unwrap()
    }

    fn degenerate_ex1() -> MetriplecticSystem {
        let p = PoissonField::new(ScalarField::coordinate(1), ScalarField::zero(), ScalarField::zero());
        let h = "0.5x^2 + 0.5y^2 + 0.5z^2".parse().unwrap();
        MetriplecticSystem::new("ex1", p, h, "0.5z^2".parse().unwrap()).unwrap()
    }

    #[test]
    fn xi_field_examples() {
        let rb = rigid_body(1.0, 2.0, 3.0);
        assert_eq!(xi_field(&rb, Vec3::splat(1.0)), Vec3::new(-9.0, 0.0, 3.0));
        assert_eq!(xi_field(&rb, Vec3::ZERO), Vec3::ZERO);
        let ex1 = degenerate_ex1();
        for (x, z) in [(1.0, 1.0), (0.5, -2.0), (-1.5, 0.25)] {
            let got = xi_field(&ex1, Vec3::new(x, 0.0, z));
            assert_eq!(got, Vec3::new(x * z * z, 0.0, -x * x * z));
        }
    }

    #[test]
    fn diagnose_examples() {
        let rb = rigid_body(1.0, 2.0, 3.0);
        let d = diagnose(&rb, Vec3::splat(1.0), DIAG_TOL);
        assert_eq!(d.xi_p, Vec3::new(-1.0, 2.0, -1.0));
        assert_eq!(d.xi_g, Vec3::new(-8.0, -2.0, 4.0));
        assert_eq!(d.ortho_residual, 0.0);
        assert!(d.ortho_ok && d.regular);
        assert_eq!(d.p_rank, 2);
        assert_eq!(d.xi, d.xi_p + d.xi_g);

        let d = diagnose(&oscillator(), Vec3::E3, DIAG_TOL);
        assert_eq!(d.xi, Vec3::ZERO);
        assert_eq!(d.dissipation, 0.0);

        let d = diagnose(&degenerate_ex1(), Vec3::new(5.0, 0.0, 2.0), DIAG_TOL);
        assert!(!d.regular);
        assert_eq!(d.p_rank, 0);
    }

    #[test]
    fn rest_state_examples() {
        let rb = rigid_body(1.0, 2.0, 3.0);
        assert!(rest_state(&diagnose(&rb, Vec3::new(0.0, 0.0, 0.7), DIAG_TOL), DIAG_TOL));
        assert!(!rest_state(&diagnose(&rb, Vec3::splat(1.0), DIAG_TOL), DIAG_TOL));
        // dS = 0 on the plane z = 0 for S = ½z²
        assert!(rest_state(&diagnose(&oscillator(), Vec3::new(0.3, -0.8, 0.0), DIAG_TOL), DIAG_TOL));
    }

    #[test]
    fn closed_form_rigid_body_examples() {
        let m = Vec3::new(0.4, -1.1, 2.0);
        assert_eq!(closed_form_rigid_body(2.0, 2.0, 2.0, m), Vec3::ZERO);
        assert_eq!(closed_form_rigid_body(1.0, 2.0, 3.0, Vec3::splat(1.0)), Vec3::new(-9.0, 0.0, 3.0));
        assert_eq!(closed_form_rigid_body(1.0, 2.0, 3.0, Vec3::E3), Vec3::ZERO);
        assert_eq!(cross_form_rigid_body(1.0, 2.0, 3.0, Vec3::splat(1.0)), Vec3::new(-9.0, 0.0, 3.0));
        // z-component's last term is b·y·(c−b)·y·z; at (1, 2, 0.5) it differs from b·y·(c−b)·y·x
        let m = Vec3::new(1.0, 2.0, 0.5);
        assert_eq!(closed_form_rigid_body(1.0, 2.0, 3.0, m), Vec3::new(-10.5, 1.5, 3.0));
        assert_eq!(cross_form_rigid_body(1.0, 2.0, 3.0, m), Vec3::new(-10.5, 1.5, 3.0));
    }

    #[test]
    fn closed_form_oscillator_examples() {
        assert_eq!(closed_form_oscillator(|z| z, Vec3::new(0.0, 0.0, 1.3)), Vec3::ZERO);
        // y = 0 here, so ẋ = xzS′ = 1
        assert_eq!(closed_form_oscillator(|z| z, Vec3::new(1.0, 0.0, 1.0)), Vec3::new(1.0, -1.0, -1.0));
        assert_eq!(xi_field(&oscillator(), Vec3::new(1.0, 0.0, 1.0)), Vec3::new(1.0, -1.0, -1.0));
        let m = Vec3::new(0.7, -0.2, 5.0);
        assert_eq!(closed_form_oscillator(|_| 0.0, m), Vec3::new(-0.2, -0.7, 0.0));
    }

    #[test]
    fn non_casimir_entropy_is_recorded() {
        let h = "0.5x^2 + 1y^2 + 1.5z^2".parse().unwrap();
        let sys = MetriplecticSystem::new("bad", PoissonField::rigid_body(), h, ScalarField::coordinate(0)).unwrap();
        assert!(!sys.casimir_verified);
        assert!(rigid_body(1.0, 2.0, 3.0).casimir_verified);
    }

    #[test]
    fn degree_cap_enforced() {
        let h: ScalarField = "x^7".parse().unwrap();
        let err = MetriplecticSystem::new("deg", PoissonField::rigid_body(), h, ScalarField::zero()).unwrap_err();
        assert_eq!(err, SystemError::DegreeTooHigh { which: "H", degree: 7, max: 6 });
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let systems = [rigid_body(1.0, 2.0, 3.0), oscillator(), degenerate_ex1()];
        let pts = sampling::uniform_box(25, 3, 2.0);
        let step = 1e-6;
        for sys in &systems {
            for &x in &pts {
                let jac = sys.xi_jacobian(x);
                for k in 0..3 {
                    let e = Vec3::axis(k) * step;
                    let fd = (sys.xi(x + e) - sys.xi(x - e)) * (0.5 / step);
                    let col = jac.col(k);
                    let err = (fd - col).norm();
                    assert!(err <= 1e-6 * (1.0 + col.norm()), "{} at {x}: {err}", sys.name);
                }
            }
        }
    }
}
