//! Weyl and Toeplitz quantization on the translation basis.
//!
//! Both schemes expand `Op_N(a) = Σ_v â(v) w(v) T_N(v)`; Weyl uses `w ≡ 1`,
//! Toeplitz (the compression `Π_N a Π_N`) uses
//! `γ_N(v) = e^{−π|v|²/(2N)}`. The Toeplitz weight is measured against the
//! theta-function quadrature in [`bargmann`].

pub mod bargmann;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{CMatrix, FrequencyVector, Role, Translation, WeylMatrix};
use crate::symbols::FourierSymbol;

pub use bargmann::{quadrature_toeplitz, szego_kernel_heisenberg, HeisenbergPoint, ThetaBasis};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizationScheme {
    Weyl,
    Toeplitz,
}

impl fmt::Display for QuantizationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuantizationScheme::Weyl => "weyl",
            QuantizationScheme::Toeplitz => "toeplitz",
        })
    }
}

impl FromStr for QuantizationScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weyl" => Ok(QuantizationScheme::Weyl),
            "toeplitz" => Ok(QuantizationScheme::Toeplitz),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// `γ_N(v) = e^{−π|v|²/(2N)}`: `Π_N e_v Π_N = γ_N(v) T_N(v)`.
pub fn toeplitz_weight(level: usize, v: FrequencyVector) -> f64 {
    assert!(level > 0, "Toeplitz weight at level 0");
    (-PI * v.norm_sqr() as f64 / (2.0 * level as f64)).exp()
}

/// Diagonal weight of `scheme` on mode `v`.
pub fn scheme_weight(scheme: QuantizationScheme, level: usize, v: FrequencyVector) -> f64 {
    match scheme {
        QuantizationScheme::Weyl => 1.0,
        QuantizationScheme::Toeplitz => toeplitz_weight(level, v),
    }
}

/// `Op_N(f)` in the given scheme; tagged hermitian when `f` is real.
pub fn op_quantize(level: usize, f: &FourierSymbol, scheme: QuantizationScheme) -> Result<WeylMatrix> {
    if level == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut out = CMatrix::zeros(level, level);
    for (v, c) in f.iter() {
        let coeff = c * scheme_weight(scheme, level, v);
        let t = Translation::new(level, v);
        for row in 0..level {
            let (col, z) = t.entry(row);
            out[(row, col)] += coeff * z;
        }
    }
    let role = if f.is_real(1e-12) { Role::Hermitian } else { Role::General };
    Ok(WeylMatrix::from_parts_unchecked(out, role))
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().fold(0.0_f64, |a, &s| a.max(s))
}

/// Ratio below which [`unitarize`] refuses to take a polar factor.
pub const UNITARIZE_THRESHOLD: f64 = 1e-12;

/// Unitary polar factor `Q` of `A = Q P`.
pub fn unitarize(a: &WeylMatrix) -> Result<WeylMatrix> {
    let svd = SVD::new(a.matrix().clone(), true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |x, &s| x.max(s));
    let smin = svd.singular_values.iter().fold(f64::INFINITY, |x, &s| x.min(s));
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(ratio > UNITARIZE_THRESHOLD) {
        return Err(Error::DegenerateOperator { ratio, threshold: UNITARIZE_THRESHOLD });
    }
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Contract("SVD did not return singular vectors".into())),
    };
    Ok(WeylMatrix::from_parts_unchecked(u * v_t, Role::Unitary))
}

/// Unit-modulus `λ` minimising `‖a − λ b‖_F`, or 1 when `⟨b, a⟩ = 0`.
pub fn best_phase(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if inner.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        inner / inner.norm()
    }
}

/// `max |a − λ b|` after optimal global phase alignment of `b` onto `a`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let lambda = best_phase(a, b);
    crate::heisenberg::max_abs(&(a - b * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{max_abs, translation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn fv(m: i64, n: i64) -> FrequencyVector {
        FrequencyVector::new(m, n)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    #[test]
    fn constant_symbol_gives_scalar() {
        let c = Complex64::new(1.5, -0.5);
        for scheme in [QuantizationScheme::Weyl, QuantizationScheme::Toeplitz] {
            let op = op_quantize(7, &FourierSymbol::constant(c), scheme).unwrap();
            assert!(max_abs(&(op.matrix() - CMatrix::identity(7, 7) * c)) < 1e-15);
        }
    }

    #[test]
    fn weyl_exponential_is_translation() {
        let op = op_quantize(2, &FourierSymbol::exponential(fv(1, 0)), QuantizationScheme::Weyl).unwrap();
        assert_eq!(op.matrix(), translation(2, fv(1, 0)).unwrap().matrix());
    }

    #[test]
    fn toeplitz_exponential_is_weighted_translation() {
        let op = op_quantize(16, &FourierSymbol::exponential(fv(1, 0)), QuantizationScheme::Toeplitz).unwrap();
        let expected = translation(16, fv(1, 0)).unwrap().into_matrix() * Complex64::from(toeplitz_weight(16, fv(1, 0)));
        assert!(max_abs(&(op.matrix() - expected)) < 1e-15);
        assert!((toeplitz_weight(16, fv(1, 0)) - (-PI / 32.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn real_symbols_are_hermitian() {
        let f = &FourierSymbol::cosine(fv(1, 2)) + &FourierSymbol::sine(fv(3, -1));
        for scheme in [QuantizationScheme::Weyl, QuantizationScheme::Toeplitz] {
            let op = op_quantize(9, &f, scheme).unwrap();
            assert_eq!(op.role(), Role::Hermitian);
            assert!(op.hermiticity_defect() < 1e-14);
        }
        let g = FourierSymbol::exponential(fv(1, 0));
        assert_eq!(op_quantize(9, &g, QuantizationScheme::Weyl).unwrap().role(), Role::General);
    }

    #[test]
    fn unitarize_examples() {
        let u = translation(6, fv(2, -1)).unwrap();
        let q = unitarize(&u).unwrap();
        assert!(max_abs(&(q.matrix() - u.matrix())) < 1e-12);

        let two = WeylMatrix::general(CMatrix::identity(5, 5) * Complex64::new(2.0, 0.0)).unwrap();
        let q = unitarize(&two).unwrap();
        assert!(max_abs(&(q.matrix() - CMatrix::identity(5, 5))) < 1e-12);
    }

    #[test]
    fn unitarize_rejects_singular() {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = Complex64::new(0.0, 0.0);
        let err = unitarize(&WeylMatrix::general(m).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateOperator { .. }));
    }

    #[test]
    fn unitarize_matches_eigen_polar_factor() {
        let n = 16;
        let a = random_matrix(n, 7) + CMatrix::identity(n, n) * Complex64::new(6.0, 0.0);
        let q = unitarize(&WeylMatrix::general(a.clone()).unwrap()).unwrap();
        let qm = q.matrix();
        assert!(max_abs(&(qm.adjoint() * qm - CMatrix::identity(n, n))) <= 1e-12);

        // Oracle: Q = A (A†A)^{-1/2} from the Hermitian eigendecomposition.
        let eig = (a.adjoint() * &a).symmetric_eigen();
        let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
        let oracle = &a * (&eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint());
        assert!(max_abs(&(qm - &oracle)) <= 1e-10);

        // Nearest unitary: no random unitary is closer in Hilbert–Schmidt norm.
        let dist = (&a - qm).norm();
        for seed in 0..5 {
            let w = unitarize(&WeylMatrix::general(random_matrix(n, 100 + seed)).unwrap()).unwrap();
            assert!((&a - w.matrix()).norm() >= dist);
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("weyl".parse::<QuantizationScheme>().unwrap(), QuantizationScheme::Weyl);
        assert_eq!("Toeplitz".parse::<QuantizationScheme>().unwrap(), QuantizationScheme::Toeplitz);
        assert!("wick".parse::<QuantizationScheme>().is_err());
    }
}
