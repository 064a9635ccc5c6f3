//! Quantized affine symplectic maps of the two-torus.
//!
//! Operators live on `ℂ^N` in the finite Heisenberg representation, symbols
//! are trigonometric polynomials on `ℝ²/ℤ²`, and propagators are unitary
//! intertwiners of translation operators.

pub mod error;
pub mod heisenberg;
pub mod maps;
pub mod propagate;
pub mod quantize;
pub mod spectra;
pub mod star;
pub mod symbols;

pub use error::{Error, Result};
pub use heisenberg::{
    center_scalar, rep_u1, rep_u2, symplectic_pairing, translation, CMatrix, FrequencyVector, Role,
    Translation, WeylMatrix,
};
pub use maps::{
    holonomy_defect, is_quantizable, is_quantizable_at_level, preserves_kernel_character, AffineTorusMap,
    HolonomyDefect,
};
pub use propagate::{
    cat_propagator, egorov_residual, kronecker_propagator, symbol_automorphism, toeplitz_propagator,
    ConstructionTag, Propagator,
};
pub use quantize::{
    op_quantize, quadrature_toeplitz, szego_kernel_heisenberg, toeplitz_weight, unitarize, QuantizationScheme,
    ThetaBasis,
};
pub use spectra::{
    automorphism_checks, automorphism_spectrum, eigenphases, form_factor, form_factor_via_automorphism,
    matrix_element_diagnostics, pair_correlation, AutomorphismSpectrum, SpectralData,
};
pub use star::{extract_b, extract_v, star_compose, ExpansionEstimate};
pub use symbols::{
    berezin_multiplier, berezin_transform, evaluate, inverse_berezin, poisson_bracket, pullback, FourierSymbol,
};
