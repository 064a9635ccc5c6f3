//! The Toeplitz star product on contravariant symbols and the `1/N`
//! expansions of products and of conjugation by propagators.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{exp_i_pi, symplectic_pairing, FrequencyVector};
use crate::maps::{require_quantizable_at_level, AffineTorusMap};
use crate::propagate::conjugation_image;
use crate::quantize::{scheme_weight, toeplitz_weight, QuantizationScheme};
use crate::symbols::{inverse_berezin, FourierSymbol};

/// Largest admissible Vandermonde condition number.
pub const MAX_CONDITION: f64 = 1e12;

/// Default extrapolation levels.
pub const DEFAULT_LEVELS: [usize; 6] = [64, 96, 128, 192, 256, 384];

/// Contravariant symbol of `Op_N(f) Op_N(g)` in the Toeplitz scheme.
///
/// Each mode pair contributes `γ(v)γ(w) e^{−iπω(v,w)/N}` times the covariant
/// symbol `γ(v+w) e_{v+w}` of `T(v+w)`; the inverse Berezin transform then
/// returns the contravariant symbol.
pub fn star_compose(level: usize, f: &FourierSymbol, g: &FourierSymbol) -> FourierSymbol {
    assert!(level > 0, "star product at level 0");
    let mut covariant = FourierSymbol::zero();
    for (v, a) in f.iter() {
        for (w, b) in g.iter() {
            let u = v + w;
            let weight = toeplitz_weight(level, v) * toeplitz_weight(level, w) * toeplitz_weight(level, u);
            let cocycle = exp_i_pi(-symplectic_pairing(v, w), level as i64);
            covariant.add_mode(u, a * b * cocycle * weight);
        }
    }
    inverse_berezin(level, &covariant)
}

/// Closed form of one mode pair: `e^{(π v·w − iπ ω(v,w))/N} e_{v+w}`.
pub fn star_exponential_factor(level: usize, v: FrequencyVector, w: FrequencyVector) -> Complex64 {
    let n = level as f64;
    Complex64::new(PI * v.dot(w) as f64 / n, -PI * symplectic_pairing(v, w) as f64 / n).exp()
}

/// Contravariant symbol of `U† Op_N(f) U` for any propagator of `χ`.
pub fn conjugated_symbol(level: usize, chi: &AffineTorusMap, f: &FourierSymbol, scheme: QuantizationScheme) -> FourierSymbol {
    FourierSymbol::from_modes(f.iter().map(|(v, c)| {
        let (w, phase) = conjugation_image(chi, v);
        let ratio = scheme_weight(scheme, level, v) / scheme_weight(scheme, level, w);
        (w, c * phase * ratio)
    }))
}

/// Per-mode Richardson estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEstimate {
    pub m: i64,
    pub n: i64,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

/// Coefficient of `N^{−k}` in an asymptotic expansion, as Fourier data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEstimate {
    pub order: usize,
    pub modes: Vec<ModeEstimate>,
    pub residual: f64,
    pub levels: Vec<usize>,
}

impl ExpansionEstimate {
    pub fn coefficient(&self) -> FourierSymbol {
        FourierSymbol::from_modes(
            self.modes
                .iter()
                .map(|e| (FrequencyVector::new(e.m, e.n), Complex64::new(e.re, e.im))),
        )
    }

    pub fn residual_at(&self, v: FrequencyVector) -> Option<f64> {
        self.modes.iter().find(|e| e.m == v.m && e.n == v.n).map(|e| e.residual)
    }
}

/// Fit of `c(N) = Σ_{k<L} B_k N^{−k}` through `L` samples in the scaled
/// variable `s = N_min/N`.
struct Richardson {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n_min: f64,
}

impl Richardson {
    fn new(levels: &[usize]) -> Result<Self> {
        let n_min = levels[0] as f64;
        let l = levels.len();
        let v = DMatrix::from_fn(l, l, |i, k| (n_min / levels[i] as f64).powi(k as i32));
        let sv = v.clone().singular_values();
        let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
        let smin = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Extrapolation { condition });
        }
        Ok(Richardson { lu: v.lu(), n_min })
    }

    fn solve(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let re = nalgebra::DVector::from_iterator(samples.len(), samples.iter().map(|c| c.re));
        let im = nalgebra::DVector::from_iterator(samples.len(), samples.iter().map(|c| c.im));
        let (a, b) = (self.lu.solve(&re).expect("nonsingular"), self.lu.solve(&im).expect("nonsingular"));
        (0..samples.len())
            .map(|k| Complex64::new(a[k], b[k]) * self.n_min.powi(k as i32))
            .collect()
    }
}

fn check_levels(levels: &[usize], orders: usize) -> Result<()> {
    if levels.len() < orders + 2 {
        return Err(Error::InvalidArgument(format!(
            "extrapolating to order {orders} needs at least {} levels, got {}",
            orders + 2,
            levels.len()
        )));
    }
    if levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("levels must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Richardson extrapolation of a level-indexed family of symbols.
///
/// The residual of each coefficient is its change when the coarsest level
/// is dropped from the fit.
pub fn extrapolate<F>(levels: &[usize], orders: usize, family: F) -> Result<Vec<ExpansionEstimate>>
where
    F: Fn(usize) -> FourierSymbol + Sync,
{
    check_levels(levels, orders)?;
    let full = Richardson::new(levels)?;
    let coarse = Richardson::new(&levels[1..])?;
    let symbols: Vec<FourierSymbol> = levels.par_iter().map(|&n| family(n)).collect();
    let modes: BTreeSet<FrequencyVector> = symbols.iter().flat_map(|s| s.support()).collect();

    let mut out: Vec<ExpansionEstimate> = (0..=orders)
        .map(|order| ExpansionEstimate { order, modes: Vec::new(), residual: 0.0, levels: levels.to_vec() })
        .collect();
    for v in modes {
        let samples: Vec<Complex64> = symbols.iter().map(|s| s.coefficient(v)).collect();
        let b = full.solve(&samples);
        let b_coarse = coarse.solve(&samples[1..]);
        for (k, est) in out.iter_mut().enumerate() {
            let residual = (b[k] - b_coarse[k]).norm();
            est.residual = est.residual.max(residual);
            est.modes.push(ModeEstimate { m: v.m, n: v.n, re: b[k].re, im: b[k].im, residual });
        }
    }
    Ok(out)
}

/// `B_0, …, B_K` of `f *_N g ∼ Σ N^{−k} B_k(f, g)`.
pub fn extract_b(f: &FourierSymbol, g: &FourierSymbol, orders: usize, levels: &[usize]) -> Result<Vec<ExpansionEstimate>> {
    extrapolate(levels, orders, |n| star_compose(n, f, g))
}

/// `V_0, …, V_K` applied to `f ∘ χ`: the contravariant symbol of
/// `U† Op_N(f) U` expanded in `1/N`.
pub fn extract_v(
    chi: &AffineTorusMap,
    f: &FourierSymbol,
    orders: usize,
    levels: &[usize],
    scheme: QuantizationScheme,
) -> Result<Vec<ExpansionEstimate>> {
    for &n in levels {
        require_quantizable_at_level(chi, n as u64)?;
    }
    extrapolate(levels, orders, |n| conjugated_symbol(n, chi, f, scheme))
}
