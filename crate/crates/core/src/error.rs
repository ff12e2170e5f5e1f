use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("state does not fit the truncation: {0}")]
    StateDoesNotFit(&'static str),

    #[error("thermal parameter v = {0} is below the vacuum value 1")]
    UnphysicalThermal(f64),

    #[error("ordering parameter s = {0} outside [-1, 1]")]
    OrderingOutOfRange(f64),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("source truncation tail {0:e} exceeds the allowed 1e-6")]
    TailTooLarge(f64),

    #[error("output is not trace class (Gaussian exponent {exponent} >= 0)")]
    DivergentReconstruction { exponent: f64 },

    #[error("quadrature underresolved: doubling the grid moved a value by {shift:e}")]
    QuadratureUnderresolved { shift: f64 },

    #[error("invalid channel parameter: {0}")]
    InvalidChannel(&'static str),

    #[error("no Kraus representation: {0}")]
    NoKrausRepresentation(&'static str),

    #[error("matrix is singular (|det| = {0:e})")]
    SingularMatrix(f64),

    #[error("no sign change of the Choi minimum eigenvalue in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("family and parameter are inconsistent: {0}")]
    FamilyMismatch(&'static str),

    #[error("parse error: {0}")]
    Parse(alloc::string::String),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
}
