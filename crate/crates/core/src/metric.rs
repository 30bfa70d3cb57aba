//! The dissipative metric built from the energy gradient.
//!
//! For an energy gradient `h = dH` the metric is
//! `g = h ⊗ h − I ‖h‖²`, a symmetric negative semidefinite tensor whose
//! kernel contains `h`. Applied to `dS` it equals the double cross product
//! `h × (h × dS)`, and `dS · g dS = −‖dS × h‖²`.

use serde::Serialize;
use thiserror::Error;

use crate::linalg3::{cross, rank3, Mat3, Vec3};

/// The metric `g` at one point together with the `dH` that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DissipativeMetric {
    pub g: Mat3,
    pub dh: Vec3,
}

impl DissipativeMetric {
    pub fn matrix(&self) -> &Mat3 {
        &self.g
    }

    pub fn apply(&self, ds: Vec3) -> Vec3 {
        g_apply(self, ds)
    }
}

/// `g^{ij} = H^i H^j − δ^{ij} ‖dH‖²`, well defined for any `dH`.
pub fn build_g(dh: Vec3) -> DissipativeMetric {
    let n2 = dh.norm_squared();
    let g = Mat3::outer(dh, dh) - Mat3::IDENTITY.scale(n2);
    DissipativeMetric { g, dh }
}

/// Matrix route: `g · dS`.
pub fn g_apply(g: &DissipativeMetric, ds: Vec3) -> Vec3 {
    g.g * ds
}

/// Cross-product route: `dH × (dH × dS)`. Independent of the matrix.
pub fn double_cross(dh: Vec3, ds: Vec3) -> Vec3 {
    cross(dh, cross(dh, ds))
}

/// `σ = dS × dH`.
pub fn sigma(ds: Vec3, dh: Vec3) -> Vec3 {
    cross(ds, dh)
}

/// `dS/dt` contribution of the metric: `−‖dS × dH‖²`, never positive.
pub fn dissipation_rate(ds: Vec3, dh: Vec3) -> f64 {
    -sigma(ds, dh).norm_squared()
}

/// Relative threshold used by [`rank_check`] when none is given.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// Largest `‖g v_k + ‖dH‖² v_k‖` over the spanning vectors `v_k`,
    /// divided by `‖dH‖² · max_k ‖v_k‖` (0 when `dH = 0`).
    pub eigen_residual: f64,
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric has rank {rank} at dH = {dh}; expected 0 or 2")]
    InconsistentRank { rank: usize, dh: Vec3 },
}

/// Numerical rank of `g(dH)`, which must be 0 for `dH = 0` and 2 otherwise.
///
/// Also evaluates the eigen-relation `g v_k = −‖dH‖² v_k` on the vectors
/// `v1 = (0, H3, −H2)`, `v2 = (H3, 0, −H1)`, `v3 = (H2, −H1, 0)` that span
/// the image of `g`.
pub fn rank_check(dh: Vec3, tol: f64) -> Result<RankReport, MetricError> {
    let metric = build_g(dh);
    let rank = rank3(&metric.g, tol);
    let n2 = dh.norm_squared();
    let spanning = [
        Vec3::new(0.0, dh.z, -dh.y),
        Vec3::new(dh.z, 0.0, -dh.x),
        Vec3::new(dh.y, -dh.x, 0.0),
    ];
    let scale = n2 * spanning.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let eigen_residual = if scale > 0.0 {
        spanning
            .iter()
            .map(|&v| (metric.g * v + v * n2).norm())
            .fold(0.0, f64::max)
            / scale
    } else {
        0.0
    };
    let expected = if n2 == 0.0 { 0 } else { 2 };
    if rank != expected {
        return Err(MetricError::InconsistentRank { rank, dh });
    }
    Ok(RankReport { rank, eigen_residual })
}
