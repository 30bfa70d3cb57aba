//! Equilibrium search on an energy level and tangential stability.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{MetriplecticSystem, DIAG_TOL};
use crate::linalg3::{cross, eigenvalues_2x2, Mat3, Vec3};
use crate::metric::sigma;
use crate::sampling;

/// Seed of the random part of the default seed set.
pub const SEED_RANDOM: u64 = 7;
/// Number of random seeds in the default seed set.
pub const N_RANDOM_SEEDS: usize = 50;
/// Real parts within this band of zero are treated as neutral.
pub const EIG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumOptions {
    /// Converged when `‖ξ‖ ≤ newton_tol` and `|H − level| ≤ newton_tol·(1 + |level|)`.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Energy level to search on; `None` keeps each seed on its own level.
    pub level: Option<f64>,
    /// Threshold for the kind taxonomy (‖dH‖, ‖dS‖, P and σ vanishing).
    pub classify_tol: f64,
    pub eig_tol: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions { newton_tol: 1e-12, max_iter: 100, level: None, classify_tol: 1e-9, eig_tol: EIG_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    /// `dH = 0`.
    CriticalH,
    /// `dS = 0`.
    DsZero,
    /// `P(x) = 0`.
    Nonregular,
    /// `dS ∥ dH`: the level sets of H and S touch.
    Tangency,
    /// None of the above; only possible when S is not a Casimir of P.
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    #[serde(rename = "center/undetermined")]
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub point: Vec3,
    /// `‖ξ(point)‖`.
    pub residual: f64,
    pub kind: EquilibriumKind,
    pub regular: bool,
    pub stability: Stability,
    /// Spectrum of the full Jacobian of ξ.
    pub eigenvalues: [Complex64; 3],
    /// Spectrum of the Jacobian restricted to the tangent plane of the H
    /// level set; empty when `dH = 0`.
    pub tangential_eigenvalues: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonConvergence {
    pub seed: Vec3,
    pub last: Vec3,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EquilibriumSearch {
    pub equilibria: Vec<EquilibriumReport>,
    pub failed: Vec<NonConvergence>,
}

/// Solves the 3×3 system `a·x = b` by Gaussian elimination with partial
/// pivoting; `None` if singular.
fn solve3(a: Mat3, b: Vec3) -> Option<Vec3> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a.rows[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = ((i + 1)..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][3] - s) / m[i][i];
    }
    Some(x.into())
}

struct Residual {
    xi: Vec3,
    energy_gap: f64,
}

impl Residual {
    fn cost(&self) -> f64 {
        self.xi.norm_squared() + self.energy_gap * self.energy_gap
    }
}

/// Extra iterations allowed after the tolerance is met, taken only while
/// they still reduce the residual. Unstable equilibria amplify any leftover
/// error exponentially, so roots are pushed to the rounding floor.
const POLISH_STEPS: usize = 20;

/// Levenberg–Marquardt on `[ξ(x); H(x) − level] = 0`.
fn converge(sys: &MetriplecticSystem, seed: Vec3, level: f64, opts: &EquilibriumOptions) -> Result<Vec3, NonConvergence> {
    let residual = |x: Vec3| Residual { xi: sys.xi(x), energy_gap: sys.energy(x) - level };
    let done = |r: &Residual| r.xi.norm() <= opts.newton_tol && r.energy_gap.abs() <= opts.newton_tol * (1.0 + level.abs());

    // one accepted damped step, or false if none reduces the cost
    let step = |x: &mut Vec3, r: &mut Residual, mu: &mut f64| -> bool {
        let jac = sys.xi_jacobian(*x);
        let dh = sys.hamiltonian.grad(*x);
        // normal equations of the stacked 4×3 Jacobian [Dξ; dHᵀ]
        let jtj = jac.transpose() * jac + Mat3::outer(dh, dh);
        let jtr = jac.transpose() * r.xi + dh * r.energy_gap;
        let scale = jtj.max_norm().max(f64::MIN_POSITIVE);
        for _ in 0..30 {
            let damped = jtj + Mat3::IDENTITY.scale(*mu * scale);
            let Some(dx) = solve3(damped, -jtr) else {
                *mu *= 10.0;
                continue;
            };
            let candidate = *x + dx;
            let rc = residual(candidate);
            if candidate.is_finite() && rc.cost() < r.cost() {
                *x = candidate;
                *r = rc;
                *mu = (*mu * 0.1).max(1e-15);
                return true;
            }
            *mu *= 10.0;
        }
        false
    };

    let mut x = seed;
    let mut r = residual(x);
    let mut mu = 1e-6;
    let mut iterations = 0;
    while !done(&r) {
        if iterations == opts.max_iter || !step(&mut x, &mut r, &mut mu) {
            return Err(NonConvergence { seed, last: x, residual: r.cost().sqrt(), iterations });
        }
        iterations += 1;
    }
    for _ in 0..POLISH_STEPS {
        if r.cost() == 0.0 || !step(&mut x, &mut r, &mut mu) {
            break;
        }
    }
    Ok(x)
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn tangent_basis(n: Vec3) -> (Vec3, Vec3) {
    let a = n.to_array().map(f64::abs);
    let least = (0..3).min_by(|&i, &j| a[i].total_cmp(&a[j])).unwrap_or(0);
    let t1 = cross(n, Vec3::axis(least)).normalized().unwrap_or(Vec3::E1);
    (t1, cross(n, t1))
}

fn classify_spectrum(eigs: &[Complex64], eps: f64) -> Stability {
    if eigs.iter().any(|l| l.re.abs() <= eps) {
        Stability::Undetermined
    } else if eigs.iter().all(|l| l.re < -eps) {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Classifies a converged equilibrium.
pub fn classify(sys: &MetriplecticSystem, point: Vec3, opts: &EquilibriumOptions) -> EquilibriumReport {
    let parts = sys.parts(point);
    let tol = opts.classify_tol;
    let regular = sys.is_regular(point, DIAG_TOL);
    let sig = sigma(parts.ds, parts.dh).norm();
    let kind = if parts.dh.norm() < tol {
        EquilibriumKind::CriticalH
    } else if parts.ds.norm() < tol {
        EquilibriumKind::DsZero
    } else if !regular {
        EquilibriumKind::Nonregular
    } else if sig <= tol * (1.0 + parts.ds.norm() * parts.dh.norm()) {
        EquilibriumKind::Tangency
    } else {
        EquilibriumKind::Unclassified
    };

    let jac = sys.xi_jacobian(point);
    let eigenvalues = jac.eigenvalues();
    let (tangential_eigenvalues, stability) = match parts.dh.normalized() {
        Some(n) if parts.dh.norm() >= tol => {
            let (t1, t2) = tangent_basis(n);
            let (j1, j2) = (jac * t1, jac * t2);
            let te = eigenvalues_2x2(t1.dot(j1), t1.dot(j2), t2.dot(j1), t2.dot(j2));
            let st = classify_spectrum(&te, opts.eig_tol);
            (te.to_vec(), st)
        }
        _ => (Vec::new(), classify_spectrum(&eigenvalues, opts.eig_tol)),
    };

    EquilibriumReport {
        point,
        residual: parts.xi().norm(),
        kind,
        regular,
        stability,
        eigenvalues,
        tangential_eigenvalues,
    }
}

/// Runs the damped Newton iteration from every seed, deduplicates roots
/// closer than `10·newton_tol` (the first one found wins) and classifies
/// each. Seeds that fail to converge are returned in `failed`.
pub fn find_equilibria(sys: &MetriplecticSystem, seeds: &[Vec3], opts: &EquilibriumOptions) -> EquilibriumSearch {
    let mut out = EquilibriumSearch::default();
    let mut roots: Vec<Vec3> = Vec::new();
    for &seed in seeds {
        let level = opts.level.unwrap_or_else(|| sys.energy(seed));
        match converge(sys, seed, level, opts) {
            Ok(x) => {
                if roots.iter().all(|r| r.distance(x) > 10.0 * opts.newton_tol) {
                    roots.push(x);
                }
            }
            Err(nc) => out.failed.push(nc),
        }
    }
    out.equilibria = roots.into_iter().map(|x| classify(sys, x, opts)).collect();
    out
}

/// Points `t·e` with `H(t·e) = level` along each half-axis, nearest the
/// origin first, when the level is attained.
pub fn axis_seeds(sys: &MetriplecticSystem, level: f64) -> Vec<Vec3> {
    let mut seeds = Vec::new();
    for axis in 0..3 {
        for dir in [1.0, -1.0] {
            let e = Vec3::axis(axis) * dir;
            let f = |t: f64| sys.energy(e * t) - level;
            if let Some(t) = first_root_along_ray(f) {
                seeds.push(e * t);
            }
        }
    }
    seeds
}

fn first_root_along_ray(f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut t_prev = 0.0;
    let mut f_prev = f(0.0);
    if f_prev == 0.0 {
        return Some(0.0);
    }
    let mut t = 1e-3;
    while t <= 1e4 {
        let ft = f(t);
        if ft == 0.0 {
            return Some(t);
        }
        if ft.signum() != f_prev.signum() {
            let (mut lo, mut hi) = (t_prev, t);
            let f_lo_sign = f_prev.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid).signum() == f_lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        t_prev = t;
        f_prev = ft;
        t *= 1.05;
    }
    None
}

/// Default seeds: the six axis points on the level, then 50 random points
/// in `[-2, 2]³`.
pub fn default_seeds(sys: &MetriplecticSystem, level: f64) -> Vec<Vec3> {
    let mut seeds = axis_seeds(sys, level);
    seeds.extend(sampling::uniform_box(N_RANDOM_SEEDS, SEED_RANDOM, sampling::BOX_HALF_WIDTH));
    seeds
}
