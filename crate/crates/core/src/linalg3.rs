//! Fixed-size linear algebra in three dimensions.
//!
//! The ambient metric is the Euclidean one, so vectors and covectors share a
//! representation and raising or lowering an index never touches components.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default relative tolerance for the skew and symmetry predicates.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// A point, tangent vector or covector in R³.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    /// Unit basis vector along axis `i` (0, 1 or 2).
    pub fn axis(i: usize) -> Self {
        let mut out = [0.0; 3];
        out[i] = 1.0;
        out.into()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        cross(self, other)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    /// Euclidean distance between two points.
    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", Num(self.x), Num(self.y), Num(self.z))
    }
}

/// Right-handed cross product.
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    Vec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

/// A 3×3 real matrix stored row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { rows: [[0.0; 3]; 3] };
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    pub fn from_row_vecs(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3::from_rows([r0.to_array(), r1.to_array(), r2.to_array()])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3::from_row_vecs(c0, c1, c2).transpose()
    }

    pub fn diag(d: Vec3) -> Self {
        Mat3::from_rows([[d.x, 0.0, 0.0], [0.0, d.y, 0.0], [0.0, 0.0, d.z]])
    }

    /// Outer product `a ⊗ b`, entry (i, j) = a_i b_j.
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        let (a, b) = (a.to_array(), b.to_array());
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * b[j];
            }
        }
        Mat3 { rows }
    }

    pub fn row(&self, i: usize) -> Vec3 {
        self.rows[i].into()
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.rows[j][i];
            }
        }
        Mat3 { rows }
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        self.map(|e| e * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat3 {
        let mut rows = self.rows;
        rows.iter_mut().flatten().for_each(|e| *e = f(*e));
        Mat3 { rows }
    }

    pub fn matvec(&self, v: Vec3) -> Vec3 {
        matvec(self, v)
    }

    pub fn matmul(&self, other: &Mat3) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.rows[i][k] * other.rows[k][j]).sum();
            }
        }
        Mat3 { rows }
    }

    pub fn trace(&self) -> f64 {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }

    pub fn det(&self) -> f64 {
        self.row(0).dot(cross(self.row(1), self.row(2)))
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.is_finite())
    }

    /// `Aᵀ = −A` up to `tol` relative to the max-norm.
    pub fn is_skew(&self, tol: f64) -> bool {
        let bound = tol * self.max_norm();
        (0..3).all(|i| (0..3).all(|j| (self.rows[i][j] + self.rows[j][i]).abs() <= bound))
    }

    /// `Aᵀ = A` up to `tol` relative to the max-norm.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let bound = tol * self.max_norm();
        (0..3).all(|i| (0..3).all(|j| (self.rows[i][j] - self.rows[j][i]).abs() <= bound))
    }

    /// Singular values in descending order (one-sided Jacobi).
    pub fn singular_values(&self) -> [f64; 3] {
        let mut cols = [self.col(0), self.col(1), self.col(2)];
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..2 {
                for q in (p + 1)..3 {
                    let alpha = cols[p].norm_squared();
                    let beta = cols[q].norm_squared();
                    let gamma = cols[p].dot(cols[q]);
                    if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (cp, cq) = (cols[p], cols[q]);
                    cols[p] = cp * c - cq * s;
                    cols[q] = cp * s + cq * c;
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv = cols.map(Vec3::norm);
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
    ///
    /// Only the upper triangle is read.
    pub fn symmetric_eigenvalues(&self) -> [f64; 3] {
        let mut a = self.rows;
        for i in 0..3 {
            for j in 0..i {
                a[i][j] = a[j][i];
            }
        }
        for _sweep in 0..60 {
            let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
            let scale = a.iter().flatten().map(|e| e * e).sum::<f64>();
            if off <= f64::EPSILON.powi(2) * scale || off == 0.0 {
                break;
            }
            for p in 0..2 {
                for q in (p + 1)..3 {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..3 {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..3 {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2]];
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    }

    /// All three (possibly complex) eigenvalues, from the characteristic
    /// cubic. Real roots come first, sorted ascending; a complex pair is
    /// ordered with the negative imaginary part first.
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        let r = &self.rows;
        let tr = self.trace();
        let minors = r[0][0] * r[1][1] - r[0][1] * r[1][0] + r[0][0] * r[2][2]
            - r[0][2] * r[2][0]
            + r[1][1] * r[2][2]
            - r[1][2] * r[2][1];
        cubic_roots(-tr, minors, -self.det())
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        matvec(&self, v)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        self.matmul(&o)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut rows = self.rows;
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += o.rows[i][j];
            }
        }
        Mat3 { rows }
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

pub fn matvec(a: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(a.row(0).dot(v), a.row(1).dot(v), a.row(2).dot(v))
}

/// Numerical rank: the number of singular values above `tol` times the
/// largest one. The zero matrix has rank 0.
pub fn rank3(a: &Mat3, tol: f64) -> usize {
    let sv = a.singular_values();
    if sv[0] == 0.0 || !sv[0].is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * sv[0]).count()
}

/// Eigenvalues of the 2×2 matrix `[[a, b], [c, d]]`.
pub fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    quadratic_roots(-(a + d), a * d - b * c)
}

/// Roots of `λ² + p λ + q`.
fn quadratic_roots(p: f64, q: f64) -> [Complex64; 2] {
    let half = -0.5 * p;
    let disc = half * half - q;
    if disc >= 0.0 {
        // avoid cancellation in the smaller root
        let s = disc.sqrt();
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { q / big } else { 0.0 };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, -im), Complex64::new(half, im)]
    }
}

/// Roots of the monic cubic `λ³ + a λ² + b λ + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;

    // one real root always exists inside the Cauchy bound
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if p(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dp(root);
        if d == 0.0 {
            break;
        }
        let next = root - p(root) / d;
        if (p(next)).abs() < p(root).abs() {
            root = next;
        } else {
            break;
        }
    }

    // deflate: λ³ + aλ² + bλ + c = (λ − r)(λ² + (a + r)λ + (b + r(a + r)))
    let q1 = a + root;
    let q0 = b + root * q1;
    let [z0, z1] = quadratic_roots(q1, q0);
    let r = Complex64::new(root, 0.0);
    let mut out = [r, z0, z1];
    if z0.im == 0.0 {
        out.sort_by(|x, y| x.re.total_cmp(&y.re));
    }
    out
}
