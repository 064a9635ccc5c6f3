//! Eigenphases of propagators and the spectrum of the conjugation
//! automorphism `α(A) = U† A U` on Hilbert–Schmidt space.

use std::f64::consts::{PI, TAU};

use nalgebra::Schur;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{max_abs, CMatrix, WeylMatrix};
use crate::quantize::{op_quantize, QuantizationScheme};
use crate::symbols::FourierSymbol;

/// Unitarity slack accepted by [`eigenphases`].
pub const UNITARITY_TOLERANCE: f64 = 1e-8;
const PHASE_SNAP: f64 = 1e-12;

/// `[0, 2π)`, with rounding residue just below `2π` sent to 0.
fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r < PHASE_SNAP {
        0.0
    } else {
        r
    }
}

/// Eigenphases in `[0, 2π)` (ascending) with an orthonormal eigenbasis.
#[derive(Clone, Debug)]
pub struct SpectralData {
    phases: Vec<f64>,
    vectors: CMatrix,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Columns are eigenvectors, in the order of [`phases`](Self::phases).
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// `V diag(e^{iθ}) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.phases.iter().map(|&t| Complex64::from_polar(1.0, t)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// `|Σ_j e^{iℓθ_j}|²`.
    pub fn form_factor(&self, ell: u64) -> f64 {
        let s: Complex64 = self.phases.iter().map(|&t| Complex64::from_polar(1.0, ell as f64 * t)).sum();
        s.norm_sqr()
    }
}

/// Dense eigendecomposition of a unitary matrix through its complex Schur
/// form, which is diagonal for normal matrices.
pub fn eigenphases(u: &WeylMatrix) -> Result<SpectralData> {
    let defect = u.unitarity_defect();
    if defect > UNITARITY_TOLERANCE {
        return Err(Error::Contract(format!("eigenphases needs a unitary matrix; unitarity defect {defect:.3e}")));
    }
    let n = u.dim();
    let (q, t) = Schur::new(u.matrix().clone()).unpack();
    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (reduce_phase(t[(i, i)].arg()), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let phases = order.iter().map(|&(p, _)| p).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| q[(r, order[c].1)]);
    Ok(SpectralData { phases, vectors })
}

/// The `N²` phases `θ_j − θ_k mod 2π`, row-major in `(j, k)`.
///
/// With `α(A) = U† A U`, the rank-one operator `φ_j φ_k†` is an eigenoperator
/// with eigenvalue `e^{−i(θ_j − θ_k)}`.
#[derive(Clone, Debug)]
pub struct AutomorphismSpectrum {
    dim: usize,
    phases: Vec<f64>,
}

impl AutomorphismSpectrum {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phase(&self, j: usize, k: usize) -> f64 {
        self.phases[j * self.dim + k]
    }

    /// Eigenvalue of `α` on `φ_j φ_k†`.
    pub fn eigenvalue(&self, j: usize, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, -self.phase(j, k))
    }

    /// Phases sorted ascending, for multiset comparisons.
    pub fn sorted(&self) -> Vec<f64> {
        let mut p = self.phases.clone();
        p.sort_by(f64::total_cmp);
        p
    }
}

pub fn automorphism_spectrum(s: &SpectralData) -> AutomorphismSpectrum {
    let n = s.dim();
    let phases = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| if j == k { 0.0 } else { reduce_phase(s.phases[j] - s.phases[k]) })
        .collect();
    AutomorphismSpectrum { dim: n, phases }
}

/// `φ_j φ_k†`.
pub fn eigenoperator(s: &SpectralData, j: usize, k: usize) -> CMatrix {
    let v = s.vectors();
    v.column(j) * v.column(k).adjoint()
}

/// `|Tr U^ℓ|²` from the eigenphases.
pub fn form_factor(u: &WeylMatrix, ell: u64) -> Result<f64> {
    Ok(eigenphases(u)?.form_factor(ell))
}

/// `|Tr U^ℓ|²` from the matrix power.
pub fn form_factor_by_power(u: &WeylMatrix, ell: u64) -> f64 {
    u.pow(ell).matrix().trace().norm_sqr()
}

/// `Σ_{a,b} ⟨α^ℓ(E_ab), E_ab⟩_HS` over matrix units, `α^ℓ(A) = U^{−ℓ} A U^ℓ`.
pub fn form_factor_via_automorphism(u: &WeylMatrix, ell: u64) -> f64 {
    let n = u.dim();
    let fwd = u.pow(ell).into_matrix();
    let back = u.adjoint().pow(ell).into_matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            // α^ℓ(E_ab) is the outer product of column a of U^{−ℓ} and row b of U^ℓ.
            let image = back.column(a) * fwd.row(b);
            let unit = CMatrix::from_fn(n, n, |i, j| if i == a && j == b { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            total += unit.iter().zip(image.iter()).map(|(e, x)| e.conj() * x).sum::<Complex64>();
        }
    }
    total.re
}

/// Truncated pair-correlation sum and its tail bound.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff: usize,
    pub includes_zero: bool,
}

/// `Σ_{ℓ=0}^{L} f̂(ℓ/N) |Tr U^ℓ|²` with `samples[ℓ] = f̂(ℓ/N)`.
///
/// Samples past `L` only feed the tail bound `N² Σ_{ℓ>L} |f̂(ℓ/N)|`.
pub fn pair_correlation(s: &SpectralData, samples: &[f64], cutoff: usize, include_zero: bool) -> Result<PairCorrelation> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("pair correlation cutoff L must be at least 1".into()));
    }
    if samples.len() <= cutoff {
        return Err(Error::InvalidArgument(format!(
            "need samples for ell = 0..={cutoff}, got {}",
            samples.len()
        )));
    }
    let start = usize::from(!include_zero);
    let value = (start..=cutoff).map(|ell| samples[ell] * s.form_factor(ell as u64)).sum();
    let n2 = (s.dim() * s.dim()) as f64;
    let tail_bound = n2 * samples[cutoff + 1..].iter().map(|x| x.abs()).sum::<f64>();
    Ok(PairCorrelation { value, tail_bound, cutoff, includes_zero: include_zero })
}

/// Counts of `θ_j − θ_k mod 2π` in `bins` cells centred on `2πr/bins`.
pub fn pair_histogram(s: &SpectralData, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = TAU / bins as f64;
    for &a in s.phases() {
        for &b in s.phases() {
            let d = (a - b).rem_euclid(TAU);
            let r = ((d / width).round() as usize) % bins;
            h[r] += 1.0;
        }
    }
    h
}

/// Inverse DFT of one period of form factors: for `U^P ∝ I`,
/// `h[r] = P⁻¹ Σ_{ℓ<P} |Tr U^ℓ|² e^{−2πiℓr/P}` counts pairs with
/// `θ_j − θ_k = 2πr/P`.
pub fn histogram_from_form_factors(form_factors: &[f64]) -> Vec<f64> {
    let p = form_factors.len();
    (0..p)
        .map(|r| {
            let s: Complex64 = form_factors
                .iter()
                .enumerate()
                .map(|(ell, &ff)| ff * Complex64::from_polar(1.0, -TAU * ((ell * r) % p) as f64 / p as f64))
                .sum();
            s.re / p as f64
        })
        .collect()
}

/// Histogram on `[0, max)` of circular nearest-neighbour spacings in units
/// of the mean spacing `2π/N`.
pub fn spacing_histogram(s: &SpectralData, bins: usize, max: f64) -> Vec<f64> {
    let n = s.dim();
    let mut h = vec![0.0; bins];
    if n < 2 {
        return h;
    }
    let mean = TAU / n as f64;
    for i in 0..n {
        let next = if i + 1 < n { s.phases[i + 1] } else { s.phases[0] + TAU };
        let x = (next - s.phases[i]) / mean;
        if x < max {
            h[((x / max) * bins as f64) as usize % bins] += 1.0;
        }
    }
    h
}

/// Diagonal matrix elements `d_j = ⟨Op_N(f) φ_j, φ_j⟩` against the normalized
/// trace `τ = N⁻¹ Tr Op_N(f)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementStats {
    pub mean: f64,
    pub variance: f64,
    pub max_deviation: f64,
    pub trace: f64,
}

pub fn matrix_element_diagnostics(u: &WeylMatrix, f: &FourierSymbol, scheme: QuantizationScheme) -> Result<MatrixElementStats> {
    let s = eigenphases(u)?;
    diagnostics_in_basis(&s, f, scheme)
}

pub fn diagnostics_in_basis(s: &SpectralData, f: &FourierSymbol, scheme: QuantizationScheme) -> Result<MatrixElementStats> {
    if !f.is_real(1e-12) {
        return Err(Error::InvalidArgument("matrix element diagnostics need a real symbol".into()));
    }
    let n = s.dim();
    let a = op_quantize(n, f, scheme)?;
    let trace = a.matrix().trace().re / n as f64;
    let rotated = s.vectors().adjoint() * a.matrix() * s.vectors();
    let d: Vec<f64> = (0..n).map(|j| rotated[(j, j)].re).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let variance = d.iter().map(|x| (x - trace).powi(2)).sum::<f64>() / n as f64;
    let max_deviation = d.iter().fold(0.0_f64, |m, x| m.max((x - trace).abs()));
    Ok(MatrixElementStats { mean, variance, max_deviation, trace })
}

/// Residuals of the automorphism axioms for `α(A) = U† A U`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismReport {
    pub star: f64,
    pub multiplicative: f64,
    pub hilbert_schmidt: f64,
    pub trace: f64,
    pub eigenoperator: f64,
    pub invariant_square: f64,
    pub eigen_product: f64,
    pub samples: usize,
}

impl AutomorphismReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.star,
            self.multiplicative,
            self.hilbert_schmidt,
            self.trace,
            self.eigenoperator,
            self.invariant_square,
            self.eigen_product,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    b.iter().zip(a.iter()).map(|(y, x)| y.conj() * x).sum()
}

fn unit_gaussian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let norm = m.norm();
    m / Complex64::from(norm)
}

/// Checks the automorphism axioms on `k` seeded random pairs of unit
/// Hilbert–Schmidt vectors and `k` random eigenoperator index triples.
pub fn automorphism_checks(u: &WeylMatrix, k: usize, seed: u64) -> Result<AutomorphismReport> {
    let s = eigenphases(u)?;
    let auto = automorphism_spectrum(&s);
    let n = u.dim();
    let um = u.matrix();
    let alpha = |a: &CMatrix| um.adjoint() * a * um;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AutomorphismReport {
        star: 0.0,
        multiplicative: 0.0,
        hilbert_schmidt: 0.0,
        trace: 0.0,
        eigenoperator: 0.0,
        invariant_square: 0.0,
        eigen_product: 0.0,
        samples: k,
    };
    for _ in 0..k {
        let a = unit_gaussian(n, &mut rng);
        let b = unit_gaussian(n, &mut rng);
        let (aa, ab) = (alpha(&a), alpha(&b));
        r.star = r.star.max(max_abs(&(alpha(&a.adjoint()) - aa.adjoint())));
        r.multiplicative = r.multiplicative.max(max_abs(&(alpha(&(&a * &b)) - &aa * &ab)));
        r.hilbert_schmidt = r.hilbert_schmidt.max((hs_inner(&aa, &ab) - hs_inner(&a, &b)).norm());
        r.trace = r.trace.max((aa.trace() - a.trace()).norm());

        let idx = |rng: &mut ChaCha8Rng| rand::Rng::random_range(rng, 0..n);
        let (i, j, l) = (idx(&mut rng), idx(&mut rng), idx(&mut rng));
        let e = eigenoperator(&s, i, j);
        r.eigenoperator = r.eigenoperator.max(max_abs(&(alpha(&e) - &e * auto.eigenvalue(i, j))));
        let sq = e.adjoint() * &e;
        r.invariant_square = r.invariant_square.max(max_abs(&(alpha(&sq) - &sq)));
        let prod = &e * eigenoperator(&s, j, l);
        let phase = auto.eigenvalue(i, j) * auto.eigenvalue(j, l);
        r.eigen_product = r.eigen_product.max(max_abs(&(alpha(&prod) - &prod * phase)));
    }
    Ok(r)
}

/// Smallest `P ≤ max` with `U^P` a scalar to within `tol`.
pub fn quantum_period(u: &WeylMatrix, max: u64, tol: f64) -> Option<u64> {
    let n = u.dim();
    let mut acc = CMatrix::identity(n, n);
    for p in 1..=max {
        acc = &acc * u.matrix();
        let lambda = acc[(0, 0)];
        if (lambda.norm() - 1.0).abs() < tol && max_abs(&(&acc - CMatrix::identity(n, n) * lambda)) < tol {
            return Some(p);
        }
    }
    None
}

/// Phase of `e^{iθ}` closest to `θ` in `(−π, π]`.
pub fn wrap_to_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
