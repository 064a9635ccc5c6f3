//! Observables on `T²` as finite Fourier series
//! `a(x, ξ) = Σ â(m,n) e^{2πi(mx + nξ)}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::heisenberg::{exp_i_pi, symplectic_pairing, FrequencyVector};
use crate::maps::{act_on_frequency, frac, AffineTorusMap};

/// `e^{2πi r}` for an exact rational number of turns.
pub fn turn_phase(r: Rational64) -> Complex64 {
    let r = frac(r);
    exp_i_pi(2 * *r.numer(), *r.denom())
}

/// Point of the torus with exact coordinates in `[0, 1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    x: Rational64,
    xi: Rational64,
}

impl RationalPoint {
    pub fn new(x: Rational64, xi: Rational64) -> Self {
        RationalPoint { x: frac(x), xi: frac(xi) }
    }

    pub fn x(&self) -> Rational64 {
        self.x
    }

    pub fn xi(&self) -> Rational64 {
        self.xi
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [crate::maps::rat_f64(self.x), crate::maps::rat_f64(self.xi)]
    }
}

/// Finitely supported Fourier series; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierSymbol {
    coeffs: BTreeMap<FrequencyVector, Complex64>,
}

impl FourierSymbol {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_modes([(FrequencyVector::ZERO, c)])
    }

    /// The exponential `e_v`.
    pub fn exponential(v: FrequencyVector) -> Self {
        Self::from_modes([(v, Complex64::new(1.0, 0.0))])
    }

    /// `cos 2π(v·p) = ½ e_v + ½ e_{−v}`.
    pub fn cosine(v: FrequencyVector) -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self::from_modes([(v, h), (-v, h)])
    }

    /// `sin 2π(v·p)`.
    pub fn sine(v: FrequencyVector) -> Self {
        let h = Complex64::new(0.0, 0.5);
        Self::from_modes([(v, -h), (-v, h)])
    }

    /// Sums repeated modes and drops exact zeros.
    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (FrequencyVector, Complex64)>,
    {
        let mut s = FourierSymbol::zero();
        for (v, c) in modes {
            s.add_mode(v, c);
        }
        s
    }

    pub fn add_mode(&mut self, v: FrequencyVector, c: Complex64) {
        let entry = self.coeffs.entry(v).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&v);
        }
    }

    pub fn coefficient(&self, v: FrequencyVector) -> Complex64 {
        self.coeffs.get(&v).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FrequencyVector, Complex64)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, *c))
    }

    pub fn support(&self) -> impl Iterator<Item = FrequencyVector> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|m|` or `|n|` over the support (0 for the empty symbol).
    pub fn max_frequency(&self) -> i64 {
        self.support().map(FrequencyVector::max_abs).max().unwrap_or(0)
    }

    /// `â(−v) = conj â(v)` to within `tol` for every mode.
    pub fn is_real(&self, tol: f64) -> bool {
        self.iter().all(|(v, c)| (self.coefficient(-v) - c.conj()).norm() <= tol)
    }

    /// Whether the only mode present is `(0,0)`.
    pub fn is_constant(&self) -> bool {
        self.support().all(FrequencyVector::is_zero)
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        FourierSymbol {
            coeffs: self.coeffs.iter().filter(|(_, c)| c.norm() > tol).map(|(v, c)| (*v, *c)).collect(),
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_modes(self.iter().map(|(v, c)| (v, c * k)))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients<F>(&self, mut f: F) -> Self
    where
        F: FnMut(FrequencyVector, Complex64) -> Complex64,
    {
        Self::from_modes(self.iter().map(|(v, c)| (v, f(v, c))))
    }

    /// Largest coefficient modulus of `self − other`.
    pub fn max_coefficient_distance(&self, other: &FourierSymbol) -> f64 {
        (self - other).iter().fold(0.0, |acc, (_, c)| acc.max(c.norm()))
    }

    /// Pointwise product (convolution of coefficients).
    pub fn multiply(&self, other: &FourierSymbol) -> FourierSymbol {
        let mut out = FourierSymbol::zero();
        for (v, a) in self.iter() {
            for (w, b) in other.iter() {
                out.add_mode(v + w, a * b);
            }
        }
        out
    }
}

impl Add for &FourierSymbol {
    type Output = FourierSymbol;
    fn add(self, rhs: &FourierSymbol) -> FourierSymbol {
        let mut out = self.clone();
        for (v, c) in rhs.iter() {
            out.add_mode(v, c);
        }
        out
    }
}

impl Sub for &FourierSymbol {
    type Output = FourierSymbol;
    fn sub(self, rhs: &FourierSymbol) -> FourierSymbol {
        let mut out = self.clone();
        for (v, c) in rhs.iter() {
            out.add_mode(v, -c);
        }
        out
    }
}

impl Neg for &FourierSymbol {
    type Output = FourierSymbol;
    fn neg(self) -> FourierSymbol {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &FourierSymbol {
    type Output = FourierSymbol;
    fn mul(self, rhs: &FourierSymbol) -> FourierSymbol {
        self.multiply(rhs)
    }
}

/// `Σ â(v) e^{2πi(m x + n ξ)}` at a real point.
pub fn evaluate(f: &FourierSymbol, p: [f64; 2]) -> Complex64 {
    f.iter()
        .map(|(v, c)| {
            let (s, co) = (2.0 * PI * (v.m as f64 * p[0] + v.n as f64 * p[1])).sin_cos();
            c * Complex64::new(co, s)
        })
        .sum()
}

/// `{f, g} = ∂ₓf ∂_ξ g − ∂_ξ f ∂ₓg`, so `{e_v, e_w} = −4π² ω(v,w) e_{v+w}`.
pub fn poisson_bracket(f: &FourierSymbol, g: &FourierSymbol) -> FourierSymbol {
    let k = -4.0 * PI * PI;
    let mut out = FourierSymbol::zero();
    for (v, a) in f.iter() {
        for (w, b) in g.iter() {
            let w_vw = symplectic_pairing(v, w);
            if w_vw != 0 {
                out.add_mode(v + w, a * b * (k * w_vw as f64));
            }
        }
    }
    out
}

/// `f ∘ χ`; mode phases are exact rationals until the final conversion.
pub fn pullback(f: &FourierSymbol, chi: &AffineTorusMap) -> FourierSymbol {
    FourierSymbol::from_modes(f.iter().map(|(v, c)| {
        let (w, phase) = act_on_frequency(chi, v);
        (w, c * turn_phase(phase))
    }))
}

/// Diagonal action of the Berezin transform on the mode `v` at level `N`:
/// `μ_N(v) = e^{−π|v|²/N}`.
///
/// This is the square of the Toeplitz weight
/// [`toeplitz_weight`](crate::quantize::toeplitz_weight). On the torus the
/// transform also feeds alias modes `v − N u` with relative weight
/// `e^{−π(|v−Nu|² − |v|²)/(2N)}`; those are not represented.
pub fn berezin_multiplier(level: usize, v: FrequencyVector) -> f64 {
    assert!(level > 0, "Berezin multiplier at level 0");
    (-PI * v.norm_sqr() as f64 / level as f64).exp()
}

/// Contravariant to covariant symbol.
pub fn berezin_transform(level: usize, f: &FourierSymbol) -> FourierSymbol {
    f.map_coefficients(|v, c| c * berezin_multiplier(level, v))
}

/// Covariant to contravariant symbol.
pub fn inverse_berezin(level: usize, f: &FourierSymbol) -> FourierSymbol {
    f.map_coefficients(|v, c| c / berezin_multiplier(level, v))
}

/// One record of the symbol file format.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

impl FourierSymbol {
    pub fn to_records(&self) -> Vec<ModeRecord> {
        self.iter().map(|(v, c)| ModeRecord { m: v.m, n: v.n, re: c.re, im: c.im }).collect()
    }

    pub fn from_records(records: &[ModeRecord]) -> Self {
        Self::from_modes(records.iter().map(|r| (FrequencyVector::new(r.m, r.n), Complex64::new(r.re, r.im))))
    }
}

impl Serialize for FourierSymbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<ModeRecord>::deserialize(deserializer)?;
        Ok(FourierSymbol::from_records(&records))
    }
}
