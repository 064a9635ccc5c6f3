//! Affine symplectic maps of the torus and their quantizability.
//!
//! A map is `χ(p) = g p + t (mod 1)` with `g ∈ SL(2, Z)` and an exact
//! rational translation. The holonomy defect of `χ` is the character on
//! loops `γ_{(m,n)}` given by
//!
//! ```text
//! H(m, n) = ½(mn − m'n') + t₂ m' − t₁ n'  (mod 1),   (m', n') = g (m, n)
//! ```
//!
//! `χ` lifts to the prequantum circle bundle iff `H ≡ 0`, and to its level-N
//! quotient iff `N·H ≡ 0`. Both are decided by enumerating residues.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::FrequencyVector;

/// Integer 2×2 matrix stored row-major.
pub type IntMatrix = [[i64; 2]; 2];

pub const IDENTITY: IntMatrix = [[1, 0], [0, 1]];

/// Reduces `r` into `[0, 1)`.
pub fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

fn is_integer(r: Rational64) -> bool {
    r.is_integer()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det(g: &IntMatrix) -> i64 {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

/// Inverse of a determinant-one matrix.
pub fn sl2_inverse(g: &IntMatrix) -> IntMatrix {
    [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
}

pub fn transpose(g: &IntMatrix) -> IntMatrix {
    [[g[0][0], g[1][0]], [g[0][1], g[1][1]]]
}

/// Affine map `p ↦ g p + t` of `R²/Z²` with `det g = 1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MapRecord", into = "MapRecord")]
pub struct AffineTorusMap {
    g: IntMatrix,
    t: [Rational64; 2],
}

impl AffineTorusMap {
    pub fn new(g: IntMatrix, t: [Rational64; 2]) -> Result<Self> {
        if det(&g) != 1 {
            return Err(Error::InvalidMap(format!(
                "linear part {g:?} has determinant {}, expected 1",
                det(&g)
            )));
        }
        Ok(AffineTorusMap { g, t: [frac(t[0]), frac(t[1])] })
    }

    pub fn identity() -> Self {
        AffineTorusMap { g: IDENTITY, t: [Rational64::from_integer(0); 2] }
    }

    /// Linear (cat) map with zero translation.
    pub fn linear(g: IntMatrix) -> Result<Self> {
        Self::new(g, [Rational64::from_integer(0); 2])
    }

    /// Kronecker translation `T_{(a,b)}`.
    pub fn translation(a: Rational64, b: Rational64) -> Self {
        AffineTorusMap { g: IDENTITY, t: [frac(a), frac(b)] }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.g
    }

    pub fn shift(&self) -> [Rational64; 2] {
        self.t
    }

    pub fn is_linear(&self) -> bool {
        self.t[0] == Rational64::from_integer(0) && self.t[1] == Rational64::from_integer(0)
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &AffineTorusMap) -> AffineTorusMap {
        let g = mat_mul(&self.g, &other.g);
        let gt = apply_linear(&self.g, other.t);
        AffineTorusMap { g, t: [frac(gt[0] + self.t[0]), frac(gt[1] + self.t[1])] }
    }

    pub fn inverse(&self) -> AffineTorusMap {
        let gi = sl2_inverse(&self.g);
        let git = apply_linear(&gi, self.t);
        AffineTorusMap { g: gi, t: [frac(-git[0]), frac(-git[1])] }
    }

    /// Image of an exact point, reduced mod 1.
    pub fn apply(&self, p: [Rational64; 2]) -> [Rational64; 2] {
        let q = apply_linear(&self.g, p);
        [frac(q[0] + self.t[0]), frac(q[1] + self.t[1])]
    }

    /// Image of a floating point, reduced mod 1.
    pub fn apply_f64(&self, p: [f64; 2]) -> [f64; 2] {
        let g = &self.g;
        let x = g[0][0] as f64 * p[0] + g[0][1] as f64 * p[1] + rat_f64(self.t[0]);
        let y = g[1][0] as f64 * p[0] + g[1][1] as f64 * p[1] + rat_f64(self.t[1]);
        [x.rem_euclid(1.0), y.rem_euclid(1.0)]
    }

    /// Least common multiple of the translation denominators.
    pub fn translation_denominator(&self) -> i64 {
        self.t[0].denom().lcm(self.t[1].denom())
    }
}

impl fmt::Display for AffineTorusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g=[[{},{}],[{},{}]] t=({},{})",
            self.g[0][0], self.g[0][1], self.g[1][0], self.g[1][1], self.t[0], self.t[1]
        )
    }
}

pub fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn apply_linear(g: &IntMatrix, p: [Rational64; 2]) -> [Rational64; 2] {
    [
        p[0] * g[0][0] + p[1] * g[0][1],
        p[0] * g[1][0] + p[1] * g[1][1],
    ]
}

/// Exact rational in the map file format.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: i64,
    pub den: i64,
}

impl TryFrom<RationalRecord> for Rational64 {
    type Error = Error;
    fn try_from(r: RationalRecord) -> Result<Self> {
        if r.den == 0 {
            return Err(Error::InvalidMap("zero denominator".into()));
        }
        Ok(Rational64::new(r.num, r.den))
    }
}

impl From<Rational64> for RationalRecord {
    fn from(r: Rational64) -> Self {
        RationalRecord { num: *r.numer(), den: *r.denom() }
    }
}

/// Map file schema: `{"g": [[a,b],[c,d]], "t": [{"num":..,"den":..}, ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub g: IntMatrix,
    #[serde(default = "zero_translation")]
    pub t: [RationalRecord; 2],
}

fn zero_translation() -> [RationalRecord; 2] {
    [RationalRecord { num: 0, den: 1 }; 2]
}

impl TryFrom<MapRecord> for AffineTorusMap {
    type Error = Error;
    fn try_from(r: MapRecord) -> Result<Self> {
        AffineTorusMap::new(r.g, [r.t[0].try_into()?, r.t[1].try_into()?])
    }
}

impl From<AffineTorusMap> for MapRecord {
    fn from(m: AffineTorusMap) -> Self {
        MapRecord { g: m.g, t: [m.t[0].into(), m.t[1].into()] }
    }
}

/// `αm² + βmn + γn² + δm + εn (mod 1)` on `Z²`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolonomyDefect {
    /// `(α, β, γ)`, each with denominator dividing 2.
    pub quadratic: [Rational64; 3],
    /// `(δ, ε)`.
    pub linear: [Rational64; 2],
}

impl HolonomyDefect {
    pub fn zero() -> Self {
        let z = Rational64::from_integer(0);
        HolonomyDefect { quadratic: [z; 3], linear: [z; 2] }
    }

    /// Value in `[0, 1)`.
    pub fn evaluate(&self, m: i64, n: i64) -> Rational64 {
        let [a, b, c] = self.quadratic;
        let [d, e] = self.linear;
        frac(a * (m * m) + b * (m * n) + c * (n * n) + d * m + e * n)
    }

    /// A period of the defect in each variable.
    pub fn period(&self) -> i64 {
        self.quadratic
            .iter()
            .chain(self.linear.iter())
            .fold(2_i64, |acc, r| acc.lcm(r.denom()))
    }

    /// First `(m, n)` (row-major over one period) where `level · defect ≢ 0`.
    pub fn witness_at_level(&self, level: u64) -> Option<FrequencyVector> {
        let p = self.period();
        let level = level as i64;
        for m in 0..p {
            for n in 0..p {
                if !is_integer(self.evaluate(m, n) * level) {
                    return Some(FrequencyVector::new(m, n));
                }
            }
        }
        None
    }

    pub fn is_trivial_at_level(&self, level: u64) -> bool {
        self.witness_at_level(level).is_none()
    }
}

impl fmt::Display for HolonomyDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.quadratic;
        let [d, e] = self.linear;
        write!(f, "({a})m^2 + ({b})mn + ({c})n^2 + ({d})m + ({e})n mod 1")
    }
}

/// Holonomy defect of `χ` (translation applied after the linear part).
pub fn holonomy_defect(chi: &AffineTorusMap) -> HolonomyDefect {
    let [[a, b], [c, d]] = chi.g;
    let [t1, t2] = chi.t;
    let half = Rational64::new(1, 2);
    HolonomyDefect {
        quadratic: [
            frac(half * (-a * c)),
            frac(half * (1 - a * d - b * c)),
            frac(half * (-b * d)),
        ],
        linear: [frac(t2 * a - t1 * c), frac(t2 * b - t1 * d)],
    }
}

pub fn is_quantizable(chi: &AffineTorusMap) -> bool {
    is_quantizable_at_level(chi, 1)
}

pub fn is_quantizable_at_level(chi: &AffineTorusMap, level: u64) -> bool {
    holonomy_defect(chi).is_trivial_at_level(level)
}

/// Fails with the first loop whose holonomy changes at this level.
pub fn require_quantizable_at_level(chi: &AffineTorusMap, level: u64) -> Result<()> {
    match holonomy_defect(chi).witness_at_level(level) {
        None => Ok(()),
        Some(witness) => Err(Error::NotQuantizable { level, witness }),
    }
}

/// Mode map of the pullback `e_v ∘ χ = e^{2πi v·t} e_{gᵀv}`; the phase is
/// returned in turns, reduced to `[0, 1)`.
pub fn act_on_frequency(chi: &AffineTorusMap, v: FrequencyVector) -> (FrequencyVector, Rational64) {
    let g = &chi.g;
    let w = FrequencyVector::new(g[0][0] * v.m + g[1][0] * v.n, g[0][1] * v.m + g[1][1] * v.n);
    (w, frac(chi.t[0] * v.m + chi.t[1] * v.n))
}

/// Phase (in turns) of the center scalar `T_N(Na, Nb) = (−1)^{Nab}`.
pub fn center_phase(level: u64, a: i64, b: i64) -> Rational64 {
    frac(Rational64::new(level as i64 * a * b, 2))
}

/// The generator of `N·Z²` on which the induced automorphism fails to fix
/// the central relation `T_N(N u) = λ(u) I`, with the mismatch in turns.
///
/// The symbol automorphism sends `T_N(v)` to `e^{2πi v·t} T_N(gᵀ v)`; it
/// descends to the matrix algebra at level `N` iff for `u = (1,0), (0,1)`
///
/// ```text
/// e^{2πi N u·t} λ(gᵀu) = λ(u).
/// ```
///
/// Generators suffice because the automorphism preserves the product
/// cocycle.
pub fn kernel_character_witness(
    chi: &AffineTorusMap,
    level: u64,
) -> Option<(FrequencyVector, Rational64)> {
    for u in [FrequencyVector::new(1, 0), FrequencyVector::new(0, 1)] {
        let (w, phase) = act_on_frequency(chi, u);
        let mismatch = frac(phase * level as i64 + center_phase(level, w.m, w.n)
            - center_phase(level, u.m, u.n));
        if mismatch != Rational64::from_integer(0) {
            return Some((u.scale(level as i64), mismatch));
        }
    }
    None
}

pub fn preserves_kernel_character(chi: &AffineTorusMap, level: u64) -> bool {
    kernel_character_witness(chi, level).is_none()
}
