//! Theta-function quadrature on the Bargmann side.
//!
//! Sections of the level-`N` line bundle are represented by the theta basis
//! `θ_j(z) = Σ_{|k|≤K} e^{2πiNκz − πNκ²}`, `κ = j/N + k`, evaluated at
//! `z = x − iξ`. The pointwise weight comes from the Heisenberg Szegő kernel
//! and reduces to `e^{−2πNξ²}`. A discrete Fourier change of basis takes the
//! theta sections to the frame in which `T_N(1,0)` is diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heisenberg::{CMatrix, FrequencyVector, Role, WeylMatrix};
use crate::symbols::{evaluate, FourierSymbol};

/// Point `(ζ, t)` of the reduced Heisenberg group, `ζ ∈ ℂ`, `t ∈ ℝ`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HeisenbergPoint {
    pub zeta: Complex64,
    pub t: f64,
}

impl HeisenbergPoint {
    pub fn new(zeta: Complex64, t: f64) -> Self {
        HeisenbergPoint { zeta, t }
    }

    pub fn origin() -> Self {
        HeisenbergPoint::new(Complex64::new(0.0, 0.0), 0.0)
    }
}

/// Natural log of the Szegő kernel; finite where the kernel itself underflows.
pub fn log_szego_kernel_heisenberg(x: HeisenbergPoint, y: HeisenbergPoint, level: usize) -> Complex64 {
    let n = level as f64;
    let (z, w) = (x.zeta, y.zeta);
    let exponent = n * (z * w.conj() - 0.5 * z.norm_sqr() - 0.5 * w.norm_sqr());
    Complex64::new((n / PI).ln(), n * (x.t - y.t)) + exponent
}

/// `Π_N(x, y) = (N/π) e^{iN(t−s)} e^{N(ζ η̄ − |ζ|²/2 − |η|²/2)}`.
pub fn szego_kernel_heisenberg(x: HeisenbergPoint, y: HeisenbergPoint, level: usize) -> Complex64 {
    log_szego_kernel_heisenberg(x, y, level).exp()
}

/// Level-`N` theta basis truncated to `|k| ≤ K`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ThetaBasis {
    level: usize,
    truncation: usize,
}

pub const DEFAULT_TRUNCATION: usize = 5;

impl ThetaBasis {
    pub fn new(level: usize, truncation: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if truncation < 3 {
            return Err(Error::InvalidArgument(format!("theta truncation K = {truncation} must be at least 3")));
        }
        Ok(ThetaBasis { level, truncation })
    }

    pub fn with_default_truncation(level: usize) -> Result<Self> {
        ThetaBasis::new(level, DEFAULT_TRUNCATION)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Log of the Gaussian weight at `(x, ξ)`, read off the Szegő kernel on
    /// the diagonal with the holomorphic gauge `e^{Nζ²/2}`, `ζ = √π(x − iξ)`.
    pub fn log_weight(&self, x: f64, xi: f64) -> f64 {
        let n = self.level as f64;
        let zeta = Complex64::new(x, -xi) * PI.sqrt();
        let p = HeisenbergPoint::new(zeta, 0.0);
        let diag = log_szego_kernel_heisenberg(p, HeisenbergPoint::origin(), self.level).re + (PI / n).ln();
        2.0 * diag + n * (zeta * zeta).re
    }

    /// `θ_j(x − iξ)·e^{w/2}` for all `j`, with the weight folded into each term.
    pub fn weighted_thetas(&self, x: f64, xi: f64) -> Vec<Complex64> {
        let n = self.level as f64;
        let half_log_w = 0.5 * self.log_weight(x, xi);
        let z = Complex64::new(x, -xi);
        let k_max = self.truncation as i64;
        (0..self.level)
            .map(|j| {
                (-k_max..=k_max)
                    .map(|k| {
                        let kappa = j as f64 / n + k as f64;
                        let arg = Complex64::new(0.0, 2.0 * PI * n * kappa) * z - PI * n * kappa * kappa + half_log_w;
                        arg.exp()
                    })
                    .sum()
            })
            .collect()
    }

    /// Weighted sections in the frame where `T_N(1,0)` is diagonal:
    /// `ψ_Q = N^{−1/2} Σ_j e^{−2πiQj/N} θ_j`.
    pub fn weighted_frame(&self, x: f64, xi: f64) -> Vec<Complex64> {
        let n = self.level;
        let theta = self.weighted_thetas(x, xi);
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|q| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(j, th)| th * crate::heisenberg::exp_i_pi(-2 * ((q * j) % n) as i64, n as i64))
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }
}

/// Minimum admissible grid for a symbol of maximal frequency `maxfreq`.
pub fn required_grid(level: usize, maxfreq: i64) -> usize {
    (8.0 * maxfreq.max(0) as f64 * (level as f64).sqrt().max(1.0)).ceil() as usize
}

/// Default grid `16·maxfreq·⌈√N⌉`, never below 16.
pub fn default_grid(level: usize, maxfreq: i64) -> usize {
    let root = (level as f64).sqrt().ceil() as usize;
    (16 * maxfreq.max(1) as usize * root).max(16)
}

fn check_grid(level: usize, maxfreq: i64, grid: usize) -> Result<()> {
    let required = required_grid(level, maxfreq).max(1);
    if grid < required {
        return Err(Error::Resolution { grid, required });
    }
    Ok(())
}

/// Grid samples of the weighted frame, row-major in `(x, ξ)`.
fn frame_samples(basis: &ThetaBasis, grid: usize) -> Vec<(f64, f64, Vec<Complex64>)> {
    let h = 1.0 / grid as f64;
    (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / grid, idx % grid);
            let (x, xi) = (a as f64 * h, b as f64 * h);
            (x, xi, basis.weighted_frame(x, xi))
        })
        .collect()
}

/// Numerical squared norms of the frame sections.
fn frame_norms(samples: &[(f64, f64, Vec<Complex64>)], n: usize) -> Vec<f64> {
    let cells = samples.len() as f64;
    (0..n)
        .map(|q| samples.iter().map(|(_, _, psi)| psi[q].norm_sqr()).sum::<f64>() / cells)
        .collect()
}

/// `⟨Π_N f Π_N ψ_Q, ψ_P⟩` by `G×G` trapezoidal quadrature, returned in the
/// `T_N(1,0)`-diagonal frame so it is directly comparable with `op_quantize`.
pub fn quadrature_toeplitz(level: usize, f: &FourierSymbol, basis: &ThetaBasis, grid: usize) -> Result<WeylMatrix> {
    if level == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if basis.level() != level {
        return Err(Error::InvalidArgument(format!(
            "theta basis has level {} but N = {level}",
            basis.level()
        )));
    }
    check_grid(level, f.max_frequency(), grid)?;
    let n = level;
    let samples = frame_samples(basis, grid);
    let norms = frame_norms(&samples, n);
    let cells = samples.len() as f64;

    // Each (P, Q) entry is an independent sum over the grid in fixed order.
    let entries: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (p, q) = (idx / n, idx % n);
            let s: Complex64 = samples
                .iter()
                .map(|(x, xi, psi)| evaluate(f, [*x, *xi]) * psi[q] * psi[p].conj())
                .sum();
            s / cells / (norms[p] * norms[q]).sqrt()
        })
        .collect();
    let m = CMatrix::from_row_slice(n, n, &entries);
    let role = if f.is_real(1e-12) { Role::Hermitian } else { Role::General };
    Ok(WeylMatrix::from_parts_unchecked(m, role))
}

/// Fourier coefficient at `v` of the covariant symbol `⟨A Φ_z, Φ_z⟩/⟨Φ_z, Φ_z⟩`,
/// measured on a `G×G` grid of coherent states.
pub fn quadrature_covariant_coefficient(
    a: &WeylMatrix,
    basis: &ThetaBasis,
    v: FrequencyVector,
    grid: usize,
) -> Result<Complex64> {
    let n = a.dim();
    if basis.level() != n {
        return Err(Error::InvalidArgument(format!("theta basis has level {} but N = {n}", basis.level())));
    }
    check_grid(n, v.max_abs(), grid)?;
    let samples = frame_samples(basis, grid);
    let norms = frame_norms(&samples, n);
    let m = a.matrix();
    let cells = samples.len() as f64;
    let sum: Complex64 = samples
        .par_iter()
        .map(|(x, xi, psi)| {
            let unit: Vec<Complex64> = psi.iter().zip(&norms).map(|(c, nn)| c / nn.sqrt()).collect();
            let mut num = Complex64::new(0.0, 0.0);
            for p in 0..n {
                let mut row = Complex64::new(0.0, 0.0);
                for q in 0..n {
                    row += m[(p, q)] * unit[q].conj();
                }
                num += unit[p] * row;
            }
            let den: f64 = unit.iter().map(|c| c.norm_sqr()).sum();
            let phase = Complex64::from_polar(1.0, -2.0 * PI * (v.m as f64 * x + v.n as f64 * xi));
            num / den * phase
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(sum / cells)
}
