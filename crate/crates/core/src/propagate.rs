//! Quantum propagators of affine torus maps and their Egorov residuals.
//!
//! A propagator `U` for `χ(p) = g p + t` is the unitary intertwiner
//! `U† T_N(v) U = e^{2πi v·t} T_N(gᵀ v)`, which is exactly the operator
//! counterpart of the pullback `e_v ∘ χ`.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{CMatrix, FrequencyVector, Role, Translation, WeylMatrix};
use crate::maps::{act_on_frequency, holonomy_defect, require_quantizable_at_level, AffineTorusMap};
use crate::quantize::{op_quantize, operator_norm, unitarize, QuantizationScheme};
use crate::symbols::{pullback, turn_phase, FourierSymbol};

/// Maximum number of fresh draws after the first degenerate one.
pub const MAX_RETRIES: usize = 8;
const DEGENERACY_RATIO: f64 = 1e-8;
const PHASE_THRESHOLD: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionTag {
    Intertwiner,
    LatticeTranslation,
    UnitarizedToeplitz,
}

impl fmt::Display for ConstructionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstructionTag::Intertwiner => "intertwiner",
            ConstructionTag::LatticeTranslation => "lattice-translation",
            ConstructionTag::UnitarizedToeplitz => "unitarized-toeplitz",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    level: usize,
    unitary: WeylMatrix,
    source: AffineTorusMap,
    tag: ConstructionTag,
    seed: Option<u64>,
}

impl Propagator {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn unitary(&self) -> &WeylMatrix {
        &self.unitary
    }

    pub fn matrix(&self) -> &CMatrix {
        self.unitary.matrix()
    }

    pub fn source(&self) -> &AffineTorusMap {
        &self.source
    }

    pub fn tag(&self) -> ConstructionTag {
        self.tag
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `U† A U`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        let u = self.matrix();
        u.adjoint() * a * u
    }
}

/// `(w, c)` with `U† T_N(v) U = c T_N(w)` for any propagator of `χ`.
pub fn conjugation_image(chi: &AffineTorusMap, v: FrequencyVector) -> (FrequencyVector, Complex64) {
    let (w, phase) = act_on_frequency(chi, v);
    (w, turn_phase(phase))
}

/// One-parameter average `N⁻¹ Σ_k T(k s) X α(T(k s))†` over the cyclic
/// subgroup generated by the unit step `s`.
type Monomial = Vec<(usize, Complex64)>;

fn cyclic_average(x: &CMatrix, chi: &AffineTorusMap, step: FrequencyVector) -> CMatrix {
    let n = x.nrows();
    let rows: Vec<Complex64> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| x[(r, c)]).collect();
    let factors: Vec<(Monomial, Monomial)> = (0..n as i64)
        .map(|k| {
            let v = step.scale(k);
            let (w, c) = conjugation_image(chi, v);
            let left = Translation::new(n, v);
            let right = Translation::new(n, w);
            let l = (0..n).map(|r| {
                let (col, z) = left.entry(r);
                (col, z * c.conj())
            });
            let rt = (0..n).map(|j| {
                let (col, z) = right.entry(j);
                (col, z.conj())
            });
            (l.collect(), rt.collect())
        })
        .collect();
    let scale = 1.0 / n as f64;
    let out: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (l, rt) in &factors {
                let (src, a) = l[r];
                let row = &rows[src * n..(src + 1) * n];
                for (slot, &(col, b)) in acc.iter_mut().zip(rt) {
                    *slot += a * b * row[col];
                }
            }
            acc.into_iter().map(move |z| z * scale)
        })
        .collect();
    CMatrix::from_row_slice(n, n, &out)
}

/// Intertwiner projection `Φ(X) = N⁻² Σ_{v ∈ [0,N)²} T(v) X α(T(v))†` with
/// `α(T(v)) = e^{2πi v·t} T(gᵀv)`.
///
/// `T(m,n)` is a unimodular multiple of `T(m,0) T(0,n)` and `α` is
/// multiplicative, so `Φ` factors into two cyclic averages of cost `N³` each.
pub fn intertwiner_average(x: &CMatrix, chi: &AffineTorusMap) -> CMatrix {
    let inner = cyclic_average(x, chi, FrequencyVector::new(0, 1));
    cyclic_average(&inner, chi, FrequencyVector::new(1, 0))
}

/// Multiplies by the unimodular scalar making the first entry above
/// threshold (row-major) real positive.
pub fn fix_phase(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let first = (0..n).flat_map(|r| (0..m.ncols()).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]).find(|z| z.norm() > PHASE_THRESHOLD);
    match first {
        Some(z) => m * (z.conj() / z.norm()),
        None => m.clone(),
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

fn averaged_unitary(level: usize, chi: &AffineTorusMap, seed: u64) -> Result<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..=MAX_RETRIES {
        let x = random_matrix(level, &mut rng);
        let phi = intertwiner_average(&x, chi);
        if phi.norm() < DEGENERACY_RATIO * x.norm() {
            continue;
        }
        let q = unitarize(&WeylMatrix::general(phi)?)?;
        return Ok(fix_phase(q.matrix()));
    }
    Err(Error::ConstructionFailure { attempts: MAX_RETRIES + 1 })
}

fn check_level(level: usize) -> Result<()> {
    if level == 0 {
        Err(Error::InvalidDimension(0))
    } else {
        Ok(())
    }
}

/// Quantum cat map for `g ∈ SL₂(ℤ)`; requires `(g, 0)` quantizable.
pub fn cat_propagator(level: usize, g: [[i64; 2]; 2], seed: u64) -> Result<Propagator> {
    check_level(level)?;
    let chi = AffineTorusMap::linear(g)?;
    require_quantizable_at_level(&chi, 1)?;
    let u = averaged_unitary(level, &chi, seed)?;
    Ok(Propagator {
        level,
        unitary: WeylMatrix::from_parts_unchecked(u, Role::Unitary),
        source: chi,
        tag: ConstructionTag::Intertwiner,
        seed: Some(seed),
    })
}

/// Translation by `t` on the torus, realized as `T_N(N t₂, −N t₁)`.
pub fn kronecker_propagator(level: usize, t: [num_rational::Rational64; 2]) -> Result<Propagator> {
    check_level(level)?;
    let chi = AffineTorusMap::new(crate::maps::IDENTITY, t)?;
    require_quantizable_at_level(&chi, level as u64)?;
    let [t1, t2] = chi.shift();
    let scale = |r: num_rational::Rational64| (r * level as i64).to_integer();
    let v = FrequencyVector::new(scale(t2), -scale(t1));
    let u = fix_phase(&Translation::new(level, v).to_dense());
    Ok(Propagator {
        level,
        unitary: WeylMatrix::from_parts_unchecked(u, Role::Unitary),
        source: chi,
        tag: ConstructionTag::LatticeTranslation,
        seed: None,
    })
}

/// Level-`N` propagator of an arbitrary quantizable affine map: intertwiner
/// average followed by the unitary polar factor.
pub fn toeplitz_propagator(level: usize, chi: &AffineTorusMap) -> Result<Propagator> {
    toeplitz_propagator_seeded(level, chi, 0)
}

pub fn toeplitz_propagator_seeded(level: usize, chi: &AffineTorusMap, seed: u64) -> Result<Propagator> {
    check_level(level)?;
    require_quantizable_at_level(chi, level as u64)?;
    let u = averaged_unitary(level, chi, seed)?;
    Ok(Propagator {
        level,
        unitary: WeylMatrix::from_parts_unchecked(u, Role::Unitary),
        source: *chi,
        tag: ConstructionTag::UnitarizedToeplitz,
        seed: Some(seed),
    })
}

/// The symbol-level automorphism `f ↦ f ∘ χ`; defined for every affine map.
pub fn symbol_automorphism(chi: &AffineTorusMap, f: &FourierSymbol) -> FourierSymbol {
    pullback(f, chi)
}

/// `‖U† Op_N(f) U − Op_N(f ∘ χ)‖` in operator norm.
///
/// The zero mode quantizes to a scalar and is fixed by `χ`, so it cancels
/// exactly and is dropped before the dense conjugation.
pub fn egorov_residual(level: usize, p: &Propagator, f: &FourierSymbol, scheme: QuantizationScheme) -> Result<f64> {
    if p.level() != level {
        return Err(Error::InvalidArgument(format!("propagator has level {} but N = {level}", p.level())));
    }
    let f = FourierSymbol::from_modes(f.iter().filter(|(v, _)| !v.is_zero()));
    if f.is_empty() {
        return Ok(0.0);
    }
    let f = &f;
    let lhs = p.conjugate(op_quantize(level, f, scheme)?.matrix());
    let rhs = op_quantize(level, &pullback(f, p.source()), scheme)?;
    Ok(operator_norm(&(lhs - rhs.matrix())))
}

/// Frobenius norm of `T(v) U − c U T(w)`, an upper bound for the operator
/// norm of `U† T(v) U − c T(w)`.
pub fn translation_egorov_defect(p: &Propagator, v: FrequencyVector) -> f64 {
    let n = p.level();
    let (w, c) = conjugation_image(p.source(), v);
    let u = p.matrix();
    let lhs = Translation::new(n, v).mul_left(u);
    let rhs = Translation::new(n, w).mul_right(u) * c;
    (lhs - rhs).norm()
}

/// Non-quantizable Kronecker data at level `N`: the loop with nontrivial
/// holonomy and its phase in turns.
pub fn kronecker_obstruction(level: usize, t: [num_rational::Rational64; 2]) -> Option<(FrequencyVector, num_rational::Rational64)> {
    let chi = AffineTorusMap::translation(t[0], t[1]);
    let defect = holonomy_defect(&chi);
    defect.witness_at_level(level as u64).map(|w| {
        let value = defect.evaluate(w.m, w.n) * level as i64;
        (w, crate::maps::frac(value))
    })
}

/// Serialized propagator: source map, level, tag, seed and the row-major
/// matrix as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropagatorRecord {
    pub level: usize,
    pub tag: ConstructionTag,
    pub seed: Option<u64>,
    pub source: AffineTorusMap,
    pub matrix: Vec<[f64; 2]>,
}

impl From<&Propagator> for PropagatorRecord {
    fn from(p: &Propagator) -> Self {
        let m = p.matrix();
        let n = p.level();
        let matrix = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| [m[(r, c)].re, m[(r, c)].im]).collect();
        PropagatorRecord { level: n, tag: p.tag(), seed: p.seed(), source: *p.source(), matrix }
    }
}

impl TryFrom<PropagatorRecord> for Propagator {
    type Error = Error;
    fn try_from(r: PropagatorRecord) -> Result<Self> {
        check_level(r.level)?;
        if r.matrix.len() != r.level * r.level {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} entries, expected {}",
                r.matrix.len(),
                r.level * r.level
            )));
        }
        let entries: Vec<Complex64> = r.matrix.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let unitary = WeylMatrix::with_role(CMatrix::from_row_slice(r.level, r.level, &entries), Role::Unitary)?;
        Ok(Propagator { level: r.level, unitary, source: r.source, tag: r.tag, seed: r.seed })
    }
}

impl Serialize for Propagator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PropagatorRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Propagator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PropagatorRecord::deserialize(d)?;
        Propagator::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{exp_i_pi, max_abs, translation};
    use crate::maps::transpose;
    use crate::quantize::phase_aligned_distance;
    use num_rational::Rational64;

    const CAT: [[i64; 2]; 2] = [[2, 1], [3, 2]];

    fn fv(m: i64, n: i64) -> FrequencyVector {
        FrequencyVector::new(m, n)
    }

    fn naive_average(x: &CMatrix, chi: &AffineTorusMap) -> CMatrix {
        let n = x.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for m in 0..n as i64 {
            for s in 0..n as i64 {
                let v = fv(m, s);
                let (w, c) = conjugation_image(chi, v);
                let left = translation(n, v).unwrap().into_matrix();
                let right = translation(n, w).unwrap().into_matrix() * c;
                acc += left * x * right.adjoint();
            }
        }
        acc / Complex64::from((n * n) as f64)
    }

    #[test]
    fn factored_average_matches_full_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chis = [
            AffineTorusMap::linear(CAT).unwrap(),
            AffineTorusMap::new([[1, 1], [0, 1]], [Rational64::new(1, 2), Rational64::new(0, 1)]).unwrap(),
            AffineTorusMap::translation(Rational64::new(1, 3), Rational64::new(2, 3)),
        ];
        for n in [3usize, 4, 6] {
            for chi in &chis {
                let x = random_matrix(n, &mut rng);
                let d = max_abs(&(intertwiner_average(&x, chi) - naive_average(&x, chi)));
                assert!(d < 1e-12, "N={n} chi={chi} d={d}");
            }
        }
    }

    #[test]
    fn identity_gives_identity() {
        let p = cat_propagator(7, [[1, 0], [0, 1]], 3).unwrap();
        assert!(max_abs(&(p.matrix() - CMatrix::identity(7, 7))) < 1e-12);
        let q = toeplitz_propagator(5, &AffineTorusMap::identity()).unwrap();
        assert!(max_abs(&(q.matrix() - CMatrix::identity(5, 5))) < 1e-12);
    }

    #[test]
    fn fourier_transform_case() {
        for n in [4usize, 8, 16] {
            let plus = CMatrix::from_fn(n, n, |j, k| exp_i_pi(2 * (j * k % n) as i64, n as i64) / (n as f64).sqrt());
            let p = cat_propagator(n, [[0, -1], [1, 0]], 0).unwrap();
            assert!(phase_aligned_distance(p.matrix(), &plus) <= 1e-9);
            let q = cat_propagator(n, [[0, 1], [-1, 0]], 0).unwrap();
            assert!(phase_aligned_distance(q.matrix(), &plus.adjoint()) <= 1e-9);
        }
    }

    #[test]
    fn exact_egorov_on_translations() {
        let n = 32;
        let p = cat_propagator(n, CAT, 0).unwrap();
        let gt = transpose(&CAT);
        let mut worst = 0.0_f64;
        for m in -(n as i64 - 1)..n as i64 {
            for s in -(n as i64 - 1)..n as i64 {
                let v = fv(m, s);
                let (w, c) = conjugation_image(p.source(), v);
                assert_eq!(w, fv(gt[0][0] * m + gt[0][1] * s, gt[1][0] * m + gt[1][1] * s));
                assert_eq!(c, Complex64::new(1.0, 0.0));
                worst = worst.max(translation_egorov_defect(&p, v));
            }
        }
        assert!(worst <= 1e-9, "worst {worst}");
    }

    #[test]
    fn seed_independence_and_determinism() {
        let a = cat_propagator(12, CAT, 1).unwrap();
        let b = cat_propagator(12, CAT, 99).unwrap();
        assert!(phase_aligned_distance(a.matrix(), b.matrix()) <= 1e-9);
        let c = cat_propagator(12, CAT, 1).unwrap();
        assert_eq!(a.matrix(), c.matrix());
    }

    #[test]
    fn multiplicative_up_to_phase() {
        let n = 10;
        let g1 = [[2, 1], [3, 2]];
        let g2 = [[0, -1], [1, 0]];
        let prod = crate::maps::mat_mul(&g1, &g2);
        let u1 = cat_propagator(n, g1, 0).unwrap();
        let u2 = cat_propagator(n, g2, 0).unwrap();
        let u12 = cat_propagator(n, prod, 0).unwrap();
        let lhs = u1.matrix() * u2.matrix();
        assert!(phase_aligned_distance(&lhs, u12.matrix()) <= 1e-8);
    }

    #[test]
    fn non_quantizable_cat_is_rejected() {
        let err = cat_propagator(8, [[2, 1], [1, 1]], 0).unwrap_err();
        match err {
            Error::NotQuantizable { level, witness } => {
                assert_eq!(level, 1);
                assert_eq!(witness, fv(0, 1));
            }
            other => panic!("unexpected {other}"),
        }
        // Level-N quantizable at even N through the general constructor.
        let chi = AffineTorusMap::linear([[2, 1], [1, 1]]).unwrap();
        let p = toeplitz_propagator(8, &chi).unwrap();
        for v in [fv(1, 0), fv(0, 1), fv(3, 5)] {
            assert!(translation_egorov_defect(&p, v) <= 1e-9);
        }
        assert!(toeplitz_propagator(7, &chi).is_err());
    }

    #[test]
    fn kronecker_examples() {
        let zero = kronecker_propagator(5, [Rational64::new(0, 1), Rational64::new(0, 1)]).unwrap();
        assert!(max_abs(&(zero.matrix() - CMatrix::identity(5, 5))) < 1e-15);

        let half = [Rational64::new(1, 2), Rational64::new(0, 1)];
        let p = kronecker_propagator(2, half).unwrap();
        let t01 = translation(2, fv(0, 1)).unwrap().into_matrix();
        let t10 = translation(2, fv(1, 0)).unwrap().into_matrix();
        assert!(max_abs(&(p.conjugate(&t10) + &t10)) < 1e-12);
        assert!(max_abs(&(p.conjugate(&t01) - &t01)) < 1e-12);

        let err = kronecker_propagator(3, half).unwrap_err();
        assert!(matches!(err, Error::NotQuantizable { level: 3, .. }));
        let (w, phase) = kronecker_obstruction(3, half).unwrap();
        assert_eq!(w, fv(0, 1));
        assert_eq!(phase, Rational64::new(1, 2));
        assert!(kronecker_obstruction(4, half).is_none());
    }

    #[test]
    fn kronecker_conjugation_phases() {
        let n = 12;
        let t = [Rational64::new(1, 4), Rational64::new(5, 6)];
        let p = kronecker_propagator(n, t).unwrap();
        for v in [fv(1, 0), fv(0, 1), fv(-3, 7)] {
            let expected = turn_phase(t[0] * v.m + t[1] * v.n);
            let tv = translation(n, v).unwrap().into_matrix();
            assert!(max_abs(&(p.conjugate(&tv) - &tv * expected)) <= 1e-12);
        }
    }

    #[test]
    fn toeplitz_propagator_agrees_with_special_cases() {
        let chi = AffineTorusMap::linear(CAT).unwrap();
        let a = toeplitz_propagator(16, &chi).unwrap();
        let b = cat_propagator(16, CAT, 4).unwrap();
        assert!(phase_aligned_distance(a.matrix(), b.matrix()) <= 1e-9);

        let t = [Rational64::new(3, 8), Rational64::new(1, 4)];
        let k = kronecker_propagator(8, t).unwrap();
        let c = toeplitz_propagator(8, &AffineTorusMap::translation(t[0], t[1])).unwrap();
        assert!(phase_aligned_distance(k.matrix(), c.matrix()) <= 1e-9);
        assert_eq!(c.tag(), ConstructionTag::UnitarizedToeplitz);
    }

    #[test]
    fn weyl_egorov_is_exact() {
        let f = &FourierSymbol::cosine(fv(1, 0)) + &FourierSymbol::sine(fv(1, 2));
        for n in [8usize, 32] {
            let p = cat_propagator(n, CAT, 0).unwrap();
            assert!(egorov_residual(n, &p, &f, QuantizationScheme::Weyl).unwrap() <= 1e-9);
            let c = FourierSymbol::constant(Complex64::new(2.0, 0.0));
            assert_eq!(egorov_residual(n, &p, &c, QuantizationScheme::Toeplitz).unwrap(), 0.0);
        }
    }

    #[test]
    fn weyl_conjugation_matches_symbol_automorphism() {
        let n = 32;
        let f = &(&FourierSymbol::cosine(fv(1, 0)) + &FourierSymbol::exponential(fv(2, -1))) + &FourierSymbol::sine(fv(0, 3));
        let chi = AffineTorusMap::new(CAT, [Rational64::new(1, 4), Rational64::new(3, 8)]).unwrap();
        let p = toeplitz_propagator(n, &chi).unwrap();
        let lhs = p.conjugate(op_quantize(n, &f, QuantizationScheme::Weyl).unwrap().matrix());
        let rhs = op_quantize(n, &symbol_automorphism(&chi, &f), QuantizationScheme::Weyl).unwrap();
        assert!(max_abs(&(lhs - rhs.matrix())) <= 1e-9);
    }

    #[test]
    fn symbol_automorphism_examples() {
        let chi = AffineTorusMap::translation(Rational64::new(13, 97), Rational64::new(0, 1));
        let a = symbol_automorphism(&chi, &FourierSymbol::exponential(fv(1, 0)));
        assert!((a.coefficient(fv(1, 0)) - turn_phase(Rational64::new(13, 97))).norm() < 1e-15);
        let b = symbol_automorphism(&chi, &FourierSymbol::exponential(fv(0, 1)));
        assert!((b.coefficient(fv(0, 1)) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let f = FourierSymbol::cosine(fv(2, 1));
        assert_eq!(symbol_automorphism(&AffineTorusMap::identity(), &f), f);
    }

    #[test]
    fn json_round_trip() {
        let p = cat_propagator(4, CAT, 2).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"tag\":\"intertwiner\""));
        let q: Propagator = serde_json::from_str(&s).unwrap();
        assert_eq!(q.seed(), Some(2));
        assert!(max_abs(&(p.matrix() - q.matrix())) == 0.0);
    }
}
