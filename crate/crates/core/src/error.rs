use thiserror::Error;

use crate::heisenberg::FrequencyVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension N = {0}; N must be at least 1")]
    InvalidDimension(usize),

    #[error("quadrature grid G = {grid} under-resolves the integrand (need G >= {required})")]
    Resolution { grid: usize, required: usize },

    #[error("degenerate operator: smallest/largest singular value ratio {ratio:.3e} is below {threshold:.0e}")]
    DegenerateOperator { ratio: f64, threshold: f64 },

    #[error("map is not quantizable at level {level}: holonomy defect nontrivial at (m,n)={witness}")]
    NotQuantizable { level: u64, witness: FrequencyVector },

    #[error("propagator construction failed after {attempts} degenerate averaging attempts")]
    ConstructionFailure { attempts: usize },

    #[error("ill-conditioned extrapolation: Vandermonde condition number {condition:.3e} exceeds 1e12")]
    Extrapolation { condition: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
