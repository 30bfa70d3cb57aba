//! Polynomial scalar fields and skew-symmetric matrix fields over R³.
//!
//! Everything here is exact polynomial arithmetic: gradients and Hessians
//! come from differentiating monomials, never from finite differences.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::linalg3::{Mat3, Vec3};

/// Default cap on the total degree of user-supplied polynomials.
pub const DEFAULT_MAX_DEGREE: u32 = 6;

/// Exponents `(e1, e2, e3)` of the monomial `x^e1 y^e2 z^e3`.
pub type Exponents = [u32; 3];

const VARS: [char; 3] = ['x', 'y', 'z'];

/// A polynomial `R³ → R` stored as a sparse monomial → coefficient map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarField {
    terms: BTreeMap<Exponents, f64>,
}

impl ScalarField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(coeff: f64, exps: Exponents) -> Self {
        let mut f = Self::zero();
        f.add_term(coeff, exps);
        f
    }

    /// The coordinate function `x`, `y` or `z` for `axis` 0, 1 or 2.
    pub fn coordinate(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(1.0, e)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (f64, Exponents)>) -> Self {
        let mut f = Self::zero();
        for (c, e) in terms {
            f.add_term(c, e);
        }
        f
    }

    /// `Σ_k coeffs[k] · z^k`, the polynomial in the third coordinate only.
    pub fn polynomial_in_z(coeffs: &[f64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(k, &c)| (c, [0, 0, k as u32])))
    }

    pub fn add_term(&mut self, coeff: f64, exps: Exponents) {
        if coeff == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponents, f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == [0, 0, 0])
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| u64::from(k)).sum())
            .max()
            .unwrap_or(0)
    }

    /// True when no monomial involves the variable `axis`.
    pub fn is_independent_of(&self, axis: usize) -> bool {
        self.terms.keys().all(|e| e[axis] == 0)
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.eval_derivative([0, 0, 0], x)
    }

    /// Mixed partial derivative `∂^(d1+d2+d3) f / ∂x^d1 ∂y^d2 ∂z^d3` at `x`.
    pub fn eval_derivative(&self, orders: Exponents, x: Vec3) -> f64 {
        let p = x.to_array();
        self.terms
            .iter()
            .map(|(e, &c)| {
                let mut acc = c;
                for k in 0..3 {
                    if e[k] < orders[k] {
                        return 0.0;
                    }
                    acc *= falling_factorial(e[k], orders[k]) * powu(p[k], e[k] - orders[k]);
                }
                acc
            })
            .sum()
    }

    /// Exact gradient `(∂f/∂x, ∂f/∂y, ∂f/∂z)`.
    pub fn grad(&self, x: Vec3) -> Vec3 {
        Vec3::new(
            self.eval_derivative([1, 0, 0], x),
            self.eval_derivative([0, 1, 0], x),
            self.eval_derivative([0, 0, 1], x),
        )
    }

    /// Exact (symmetric) Hessian.
    pub fn hessian(&self, x: Vec3) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let mut d = [0; 3];
                d[i] += 1;
                d[j] += 1;
                let v = self.eval_derivative(d, x);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Mat3::from_rows(rows)
    }

    /// Symbolic partial derivative with respect to `axis`.
    pub fn partial(&self, axis: usize) -> ScalarField {
        let mut out = ScalarField::zero();
        for (e, &c) in &self.terms {
            if e[axis] > 0 {
                let mut de = *e;
                de[axis] -= 1;
                out.add_term(c * f64::from(e[axis]), de);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        ScalarField::from_terms(self.terms().map(|(e, c)| (c * s, e)))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i)).product()
}

fn powu(base: f64, exp: u32) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(f64::from(exp)),
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(c, e);
        }
        out
    }
}

impl Add for ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: ScalarField) -> ScalarField {
        &self + &rhs
    }
}

impl Sub for ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: ScalarField) -> ScalarField {
        &self + &rhs.scale(-1.0)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in rhs.terms() {
                out.add_term(ca * cb, [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]);
            }
        }
        out
    }
}

impl Mul for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: ScalarField) -> ScalarField {
        &self * &rhs
    }
}

impl Mul<f64> for ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.scale(s)
    }
}

/// Renders in the same grammar [`FromStr`] accepts, so `to_string` then
/// `parse` reproduces the polynomial exactly.
impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest degree first, ties in lexicographic exponent order
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by(|(ea, _), (eb, _)| {
            let da: u64 = ea.iter().map(|&k| u64::from(k)).sum();
            let db: u64 = eb.iter().map(|&k| u64::from(k)).sum();
            db.cmp(&da).then(eb.cmp(ea))
        });
        for (i, (e, c)) in terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_sign_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write!(f, "{mag}")?;
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "{}", VARS[k])?,
                    _ => write!(f, "{}^{}", VARS[k], p)?,
                }
            }
        }
        Ok(())
    }
}

impl Serialize for ScalarField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Why a polynomial string was rejected. Positions are byte offsets.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum PolyParseError {
    #[error("empty polynomial")]
    Empty,
    #[error("unexpected character {found:?} at byte {pos}")]
    Unexpected { pos: usize, found: char },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
    #[error("malformed number at byte {pos}")]
    BadNumber { pos: usize },
    #[error("coefficient at byte {pos} is not finite")]
    NonFinite { pos: usize },
    #[error("exponent at byte {pos} is out of range")]
    ExponentOverflow { pos: usize },
}

impl FromStr for ScalarField {
    type Err = PolyParseError;

    /// Parses `term (± term)*` where a term is an optional coefficient
    /// followed by factors `x`, `y`, `z`, each with an optional `^k`.
    /// A `*` may separate the coefficient and factors. Examples:
    /// `0.5x^2 + 1y^2 + 1.5z^2`, `-z`, `2*x*y^3 - 4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolyParser::new(s).parse()
    }
}

struct PolyParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> PolyParser<'a> {
    fn new(src: &'a str) -> Self {
        PolyParser { src, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn unexpected(&self) -> PolyParseError {
        match self.peek() {
            Some(found) => PolyParseError::Unexpected { pos: self.pos, found },
            None => PolyParseError::UnexpectedEnd { expected: "a term" },
        }
    }

    fn parse(mut self) -> Result<ScalarField, PolyParseError> {
        self.skip_ws();
        if self.peek().is_none() {
            return Err(PolyParseError::Empty);
        }
        let mut out = ScalarField::zero();
        let mut sign = match self.peek() {
            Some('-') => {
                self.bump();
                -1.0
            }
            Some('+') => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        loop {
            self.skip_ws();
            let (coeff, exps) = self.term()?;
            out.add_term(sign * coeff, exps);
            self.skip_ws();
            sign = match self.bump() {
                None => break,
                Some('+') => 1.0,
                Some('-') => -1.0,
                Some(found) => {
                    return Err(PolyParseError::Unexpected { pos: self.pos - found.len_utf8(), found })
                }
            };
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(f64, Exponents), PolyParseError> {
        let mut coeff = 1.0;
        let mut exps = [0u32; 3];
        let mut seen_any = false;

        if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            coeff = self.number()?;
            seen_any = true;
        }
        loop {
            self.skip_ws();
            let star = self.peek() == Some('*');
            if star {
                if !seen_any {
                    return Err(self.unexpected());
                }
                self.bump();
                self.skip_ws();
            }
            let axis = match self.peek() {
                Some('x') => 0,
                Some('y') => 1,
                Some('z') => 2,
                _ if star => return Err(self.unexpected()),
                _ => break,
            };
            self.bump();
            seen_any = true;
            self.skip_ws();
            let power = if self.peek() == Some('^') {
                self.bump();
                self.skip_ws();
                self.exponent()?
            } else {
                1
            };
            exps[axis] = exps[axis]
                .checked_add(power)
                .ok_or(PolyParseError::ExponentOverflow { pos: self.pos })?;
        }
        if !seen_any {
            return Err(self.unexpected());
        }
        Ok((coeff, exps))
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<f64, PolyParseError> {
        let start = self.pos;
        let mut mantissa = self.digits();
        if self.peek() == Some('.') {
            self.bump();
            mantissa += self.digits();
        }
        if mantissa == 0 {
            return Err(PolyParseError::BadNumber { pos: start });
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if self.digits() == 0 {
                return Err(PolyParseError::BadNumber { pos: start });
            }
        }
        let v: f64 = self.src[start..self.pos]
            .parse()
            .map_err(|_| PolyParseError::BadNumber { pos: start })?;
        if !v.is_finite() {
            return Err(PolyParseError::NonFinite { pos: start });
        }
        Ok(v)
    }

    fn exponent(&mut self) -> Result<u32, PolyParseError> {
        let start = self.pos;
        if self.digits() == 0 {
            return Err(match self.peek() {
                Some(found) => PolyParseError::Unexpected { pos: self.pos, found },
                None => PolyParseError::UnexpectedEnd { expected: "an exponent" },
            });
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| PolyParseError::ExponentOverflow { pos: start })
    }
}

/// A skew-symmetric 3×3 matrix field defined by its upper-triangular
/// entries `P12`, `P13`, `P23`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PoissonField {
    pub p12: ScalarField,
    pub p13: ScalarField,
    pub p23: ScalarField,
}

impl PoissonField {
    pub fn new(p12: ScalarField, p13: ScalarField, p23: ScalarField) -> Self {
        PoissonField { p12, p13, p23 }
    }

    /// The Lie–Poisson structure of so(3): `P(m)·v = v × m`.
    pub fn rigid_body() -> Self {
        PoissonField::new(
            ScalarField::coordinate(2),
            -ScalarField::coordinate(1),
            ScalarField::coordinate(0),
        )
    }

    /// Skew-symmetric matrix assembled from the three entry values.
    pub fn skew(p12: f64, p13: f64, p23: f64) -> Mat3 {
        Mat3::from_rows([[0.0, p12, p13], [-p12, 0.0, p23], [-p13, -p23, 0.0]])
    }

    pub fn eval(&self, x: Vec3) -> Mat3 {
        Self::skew(self.p12.eval(x), self.p13.eval(x), self.p23.eval(x))
    }

    /// `∂P/∂x_k` for k = 0, 1, 2.
    pub fn partials(&self, x: Vec3) -> [Mat3; 3] {
        let g12 = self.p12.grad(x);
        let g13 = self.p13.grad(x);
        let g23 = self.p23.grad(x);
        [0, 1, 2].map(|k| Self::skew(g12[k], g13[k], g23[k]))
    }

    pub fn degree(&self) -> u64 {
        self.p12.degree().max(self.p13.degree()).max(self.p23.degree())
    }

    pub fn entries(&self) -> [&ScalarField; 3] {
        [&self.p12, &self.p13, &self.p23]
    }
}

pub fn eval(f: &ScalarField, x: Vec3) -> f64 {
    f.eval(x)
}

pub fn grad(f: &ScalarField, x: Vec3) -> Vec3 {
    f.grad(x)
}

pub fn eval_poisson(p: &PoissonField, x: Vec3) -> Mat3 {
    p.eval(x)
}

/// Residual of the Casimir condition `P dS = 0` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CasimirSample {
    pub point: Vec3,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CasimirReport {
    pub samples: Vec<CasimirSample>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Checks `‖P(x)·dS(x)‖ ≤ tol·(1 + ‖P(x)‖_F·‖dS(x)‖)` at each sample point.
pub fn verify_casimir(p: &PoissonField, s: &ScalarField, samples: &[Vec3], tol: f64) -> CasimirReport {
    let samples: Vec<CasimirSample> = samples
        .iter()
        .map(|&x| {
            let pm = p.eval(x);
            let ds = s.grad(x);
            let residual = (pm * ds).norm();
            let bound = tol * (1.0 + pm.frobenius() * ds.norm());
            CasimirSample { point: x, residual, bound, pass: residual <= bound }
        })
        .collect();
    let max_residual = samples.iter().fold(0.0_f64, |m, s| m.max(s.residual));
    let pass = samples.iter().all(|s| s.pass);
    CasimirReport { samples, max_residual, pass }
}
