use thiserror::Error;

/// Errors raised by the geometry, dynamics and map-verification routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not in U(m,1): residual {residual:.3e} exceeds {tol:.1e}")]
    NotInGroup { residual: f64, tol: f64 },

    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("matrix does not have the expected block shape: residual {residual:.3e}")]
    BlockShape { residual: f64 },

    #[error("power iteration did not converge; lambda1 lies in [{lower}, {upper}]")]
    NonConvergence { lower: f64, upper: f64 },

    #[error("numerically borderline classification: lambda1 = {lambda1}, {detail}")]
    Borderline { lambda1: f64, detail: String },

    #[error("element is not loxodromic (kind {kind})")]
    NotLoxodromic { kind: String },

    #[error("point coincides with a fixed point of the element")]
    AtFixedPoint,

    #[error("distance underflow at n = {n}; use a smaller n_max")]
    Underflow { n: usize },

    #[error("orbit of the origin does not approach the boundary (max norm {max_norm})")]
    NoEscape { max_norm: f64 },

    #[error("limit set not resolved at word length {length} with eps = {eps}")]
    LimitSetUnresolved { length: usize, eps: f64 },

    #[error("budget exceeded: {needed} words requested, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("no fractional linear model fits the samples (best residual {best_residual:.3e})")]
    NoFractionalLinearModel { best_residual: f64 },

    #[error("sample images are not in general affine position (rank {rank}, need {needed})")]
    DegenerateImage { rank: usize, needed: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("denominator vanishes: |q| = {value:.3e}")]
    Pole { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
