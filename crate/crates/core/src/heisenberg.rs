//! Finite Weyl–Heisenberg group on `L²(Z/NZ)`.
//!
//! The clock `U1 ψ(Q) = e^{2πiQ/N} ψ(Q)` and shift `U2 ψ(Q) = ψ(Q+1)` satisfy
//! `U2 U1 = e^{2πi/N} U1 U2`. Translations use the symmetric phase
//! convention
//!
//! ```text
//! T(m, n) = e^{iπmn/N} U1^m U2^n
//! ```
//!
//! so that `T(v)† = T(-v)` and `T(v) T(w) = e^{-iπ ω(v,w)/N} T(v+w)` with
//! `ω(v,w) = m n' - n m'`. Every `T(v)` is a monomial matrix (one nonzero
//! entry per row); [`Translation`] keeps that structure so products with
//! dense matrices cost `O(N²)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix type used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance used when checking the role tag of a [`WeylMatrix`].
pub const ROLE_TOLERANCE: f64 = 1e-10;

/// Lattice frequency `(m, n)`: `m` pairs with `x`, `n` with `ξ`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub m: i64,
    pub n: i64,
}

impl FrequencyVector {
    pub const ZERO: FrequencyVector = FrequencyVector { m: 0, n: 0 };

    pub const fn new(m: i64, n: i64) -> Self {
        FrequencyVector { m, n }
    }

    pub fn norm_sqr(self) -> i64 {
        self.m * self.m + self.n * self.n
    }

    pub fn is_zero(self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> i64 {
        self.m.abs().max(self.n.abs())
    }

    pub fn dot(self, other: FrequencyVector) -> i64 {
        self.m * other.m + self.n * other.n
    }

    pub fn scale(self, k: i64) -> Self {
        FrequencyVector::new(self.m * k, self.n * k)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

impl Add for FrequencyVector {
    type Output = FrequencyVector;
    fn add(self, rhs: Self) -> Self {
        FrequencyVector::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl Sub for FrequencyVector {
    type Output = FrequencyVector;
    fn sub(self, rhs: Self) -> Self {
        FrequencyVector::new(self.m - rhs.m, self.n - rhs.n)
    }
}

impl Neg for FrequencyVector {
    type Output = FrequencyVector;
    fn neg(self) -> Self {
        FrequencyVector::new(-self.m, -self.n)
    }
}

impl From<(i64, i64)> for FrequencyVector {
    fn from((m, n): (i64, i64)) -> Self {
        FrequencyVector::new(m, n)
    }
}

/// `ω(v, w) = m n' − n m'`.
pub fn symplectic_pairing(v: FrequencyVector, w: FrequencyVector) -> i64 {
    v.m * w.n - v.n * w.m
}

/// `e^{iπ k / n}` with `k` reduced modulo `2n` before evaluation.
///
/// Quarter turns are returned exactly.
pub fn exp_i_pi(k: i64, n: i64) -> Complex64 {
    debug_assert!(n > 0);
    let two_n = 2 * n;
    let k = k.rem_euclid(two_n);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if k == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 2 * k == n {
        return Complex64::new(0.0, 1.0);
    }
    if 2 * k == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    let (s, c) = (PI * k as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// Structural tag carried by a [`WeylMatrix`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Unitary,
    Hermitian,
    General,
}

/// Dense `N × N` operator on `L²(Z/NZ)` with a role tag.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylMatrix {
    entries: CMatrix,
    role: Role,
}

impl WeylMatrix {
    /// Wraps a square matrix as a general operator.
    pub fn general(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidDimension(entries.nrows()));
        }
        Ok(WeylMatrix { entries, role: Role::General })
    }

    /// Wraps `entries` with the requested role, checking the role invariant.
    pub fn with_role(entries: CMatrix, role: Role) -> Result<Self> {
        let mut m = WeylMatrix::general(entries)?;
        let defect = match role {
            Role::General => 0.0,
            Role::Unitary => m.unitarity_defect(),
            Role::Hermitian => m.hermiticity_defect(),
        };
        if defect > ROLE_TOLERANCE {
            return Err(Error::Contract(format!(
                "matrix tagged {role:?} violates its invariant by {defect:.3e}"
            )));
        }
        m.role = role;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(entries: CMatrix, role: Role) -> Self {
        WeylMatrix { entries, role }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(WeylMatrix { entries: CMatrix::identity(dim, dim), role: Role::Unitary })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Max-norm of `M M† − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let prod = &self.entries * self.entries.adjoint();
        max_abs(&(prod - CMatrix::identity(n, n)))
    }

    /// Max-norm of `M − M†`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn adjoint(&self) -> WeylMatrix {
        WeylMatrix { entries: self.entries.adjoint(), role: self.role }
    }

    /// Product; the role is kept only when both factors are unitary.
    pub fn mul(&self, rhs: &WeylMatrix) -> WeylMatrix {
        let role = match (self.role, rhs.role) {
            (Role::Unitary, Role::Unitary) => Role::Unitary,
            _ => Role::General,
        };
        WeylMatrix { entries: &self.entries * &rhs.entries, role }
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> WeylMatrix {
        let n = self.dim();
        let mut acc = CMatrix::identity(n, n);
        let mut base = self.entries.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        let role = if self.role == Role::Unitary { Role::Unitary } else { Role::General };
        WeylMatrix { entries: acc, role }
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension(0))
    } else {
        Ok(())
    }
}

/// Clock operator `ρ_N(U1)`.
pub fn rep_u1(n: usize) -> Result<WeylMatrix> {
    translation(n, FrequencyVector::new(1, 0))
}

/// Shift operator `ρ_N(U2)`.
pub fn rep_u2(n: usize) -> Result<WeylMatrix> {
    translation(n, FrequencyVector::new(0, 1))
}

/// `T_N(v)` as a dense unitary.
pub fn translation(n: usize, v: FrequencyVector) -> Result<WeylMatrix> {
    check_dim(n)?;
    Ok(WeylMatrix::from_parts_unchecked(Translation::new(n, v).to_dense(), Role::Unitary))
}

/// The scalar `λ` with `T_N(Na, Nb) = λ I`, namely `(−1)^{N a b}`.
pub fn center_scalar(n: usize, a: i64, b: i64) -> Complex64 {
    if (n as i64 * a * b).rem_euclid(2) == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

/// Monomial form of `T_N(v)`: row `Q` holds `e^{iπ(mn + 2mQ)/N}` in column
/// `Q + n mod N`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Translation {
    dim: usize,
    v: FrequencyVector,
}

impl Translation {
    pub fn new(dim: usize, v: FrequencyVector) -> Self {
        assert!(dim > 0, "translation on a zero-dimensional space");
        Translation { dim, v }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frequency(&self) -> FrequencyVector {
        self.v
    }

    /// Column index and value of the nonzero entry in `row`.
    #[inline]
    pub fn entry(&self, row: usize) -> (usize, Complex64) {
        let n = self.dim as i64;
        let FrequencyVector { m, n: s } = self.v;
        let col = (row as i64 + s).rem_euclid(n) as usize;
        let k = (m.rem_euclid(2 * n) * s.rem_euclid(2 * n) + 2 * m.rem_euclid(n) * row as i64)
            .rem_euclid(2 * n);
        (col, exp_i_pi(k, n))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for row in 0..self.dim {
            let (col, z) = self.entry(row);
            out[(row, col)] = z;
        }
        out
    }

    /// `T(v) · x`.
    pub fn mul_left(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, x.ncols());
        for row in 0..self.dim {
            let (col, z) = self.entry(row);
            for j in 0..x.ncols() {
                out[(row, j)] = z * x[(col, j)];
            }
        }
        out
    }

    /// `x · T(v)`.
    pub fn mul_right(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), self.dim);
        for k in 0..self.dim {
            let (col, z) = self.entry(k);
            for i in 0..x.nrows() {
                out[(i, col)] += x[(i, k)] * z;
            }
        }
        out
    }

    /// `x · T(v)†`.
    pub fn mul_right_adjoint(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), self.dim);
        for j in 0..self.dim {
            let (col, z) = self.entry(j);
            let zc = z.conj();
            for i in 0..x.nrows() {
                out[(i, j)] = x[(i, col)] * zc;
            }
        }
        out
    }

    /// `Tr T(v)`: `N λ` when `v ∈ N Z²` (with `λ` the center scalar), else 0.
    pub fn trace(&self) -> Complex64 {
        let n = self.dim as i64;
        if self.v.m.rem_euclid(n) == 0 && self.v.n.rem_euclid(n) == 0 {
            center_scalar(self.dim, self.v.m / n, self.v.n / n) * n as f64
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

impl Mul<&CMatrix> for &Translation {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.mul_left(rhs)
    }
}

/// `e^{-iπ ω(v,w)/N}`: the cocycle in `T(v)T(w) = c T(v+w)`.
pub fn product_cocycle(n: usize, v: FrequencyVector, w: FrequencyVector) -> Complex64 {
    exp_i_pi(-symplectic_pairing(v, w), n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rep_u1_small_cases() {
        let u = rep_u1(1).unwrap();
        assert_eq!(u.matrix()[(0, 0)], c(1.0, 0.0));
        let u = rep_u1(2).unwrap();
        assert_eq!(u.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(u.matrix()[(1, 1)], c(-1.0, 0.0));
        assert_eq!(u.matrix()[(0, 1)], c(0.0, 0.0));
        let u = rep_u1(4).unwrap();
        assert_eq!(u.matrix()[(3, 3)], c(0.0, -1.0));
    }

    #[test]
    fn rep_u2_small_cases() {
        assert_eq!(rep_u2(1).unwrap().matrix()[(0, 0)], c(1.0, 0.0));
        let u = rep_u2(2).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(u.matrix(), &expected);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(rep_u1(0), Err(Error::InvalidDimension(0))));
        assert!(matches!(rep_u2(0), Err(Error::InvalidDimension(0))));
        assert!(matches!(translation(0, FrequencyVector::ZERO), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn weyl_commutation_relation() {
        let n = 3;
        let u1 = rep_u1(n).unwrap().into_matrix();
        let u2 = rep_u2(n).unwrap().into_matrix();
        let lhs = &u2 * &u1;
        let rhs = (&u1 * &u2) * exp_i_pi(2, n as i64);
        assert!(max_abs(&(lhs - rhs)) <= 1e-15);
    }

    #[test]
    fn generators_have_order_n() {
        for n in 1..=12 {
            let u1 = rep_u1(n).unwrap().pow(n as u64);
            let u2 = rep_u2(n).unwrap().pow(n as u64);
            let id = CMatrix::identity(n, n);
            assert!(max_abs(&(u1.matrix() - &id)) <= 1e-13);
            assert_eq!(u2.matrix(), &id);
        }
    }

    #[test]
    fn translation_examples() {
        for n in [1, 3, 8] {
            let t = translation(n, FrequencyVector::ZERO).unwrap();
            assert_eq!(t.matrix(), &CMatrix::identity(n, n));
        }
        let t = translation(2, FrequencyVector::new(1, 0)).unwrap();
        assert_eq!(t.matrix(), rep_u1(2).unwrap().matrix());
    }

    #[test]
    fn translation_product_law_example() {
        let n = 8;
        let v = FrequencyVector::new(2, 3);
        let w = FrequencyVector::new(1, -1);
        assert_eq!(symplectic_pairing(v, w), -5);
        let lhs = translation(n, v).unwrap().mul(&translation(n, w).unwrap());
        let rhs = translation(n, v + w).unwrap().into_matrix() * exp_i_pi(5, n as i64);
        assert!(max_abs(&(lhs.matrix() - rhs)) <= 1e-14);
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(symplectic_pairing((1, 0).into(), (0, 1).into()), 1);
        assert_eq!(symplectic_pairing((2, 3).into(), (2, 3).into()), 0);
        assert_eq!(symplectic_pairing((2, 3).into(), (1, -1).into()), -5);
    }

    #[test]
    fn center_scalar_matches_dense_translation() {
        for (n, a, b) in [(3usize, 1i64, 1i64), (2, 1, 1), (5, 0, 7), (4, 3, -2), (7, -1, 3)] {
            let t = translation(n, FrequencyVector::new(n as i64 * a, n as i64 * b)).unwrap();
            let lambda = center_scalar(n, a, b);
            let expected = CMatrix::identity(n, n) * lambda;
            assert!(max_abs(&(t.matrix() - expected)) <= 1e-14, "n={n} a={a} b={b}");
        }
        assert_eq!(center_scalar(3, 1, 1), c(-1.0, 0.0));
        assert_eq!(center_scalar(2, 1, 1), c(1.0, 0.0));
    }

    #[test]
    fn monomial_products_match_dense() {
        let n = 6;
        let x = CMatrix::from_fn(n, n, |i, j| c(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.1));
        let t = Translation::new(n, FrequencyVector::new(-3, 4));
        let d = t.to_dense();
        assert!(max_abs(&(t.mul_left(&x) - &d * &x)) < 1e-13);
        assert!(max_abs(&(t.mul_right(&x) - &x * &d)) < 1e-13);
        assert!(max_abs(&(t.mul_right_adjoint(&x) - &x * d.adjoint())) < 1e-13);
    }

    #[test]
    fn trace_of_translation() {
        let n = 5;
        for m in -6..=6 {
            for s in -6..=6 {
                let t = Translation::new(n, FrequencyVector::new(m, s));
                assert!((t.trace() - t.to_dense().trace()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn role_checks() {
        let u = translation(4, FrequencyVector::new(1, 2)).unwrap();
        assert!(WeylMatrix::with_role(u.matrix().clone(), Role::Unitary).is_ok());
        let bad = u.matrix() * c(2.0, 0.0);
        assert!(WeylMatrix::with_role(bad, Role::Unitary).is_err());
    }
}
