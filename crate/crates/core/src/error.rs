//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, evaluation, and the numerical engines.
#[derive(Debug, Error)]
pub enum Error {
    /// A tabulated potential was evaluated at a radius the table does not
    /// cover.
    #[error("untabulated radius {radius}")]
    UntabulatedRadius { radius: f64 },

    /// Adaptive quadrature for the temperedness integral failed to reach the
    /// requested tolerance.
    #[error("temperedness integral did not converge")]
    TemperednessDiverged,

    /// An operation requiring a subcritical activity received
    /// `lambda0 >= e / c_phi`.
    #[error("supercritical activity")]
    SupercriticalActivity,

    /// `restrict_toward` was called with coincident points.
    #[error("degenerate restriction")]
    DegenerateRestriction,

    /// A boundary-condition point lies inside the support region.
    #[error("boundary point inside region")]
    BoundaryPointInsideRegion,

    /// The recursion tree grew past the configured node budget.
    #[error("recursion budget exceeded")]
    RecursionBudgetExceeded,

    /// A density ratio was requested at a point where the truncated series
    /// value of Z is numerically zero.
    #[error("oracle at numerical zero of Z")]
    OracleZeroPartition,

    /// Averaging weights do not form a probability vector.
    #[error("not a probability vector")]
    NotProbabilityVector,

    /// A principal-branch logarithm was requested on or across the branch
    /// cut.
    #[error("outside principal domain")]
    OutsidePrincipalDomain,

    /// A point of the wrong dimension was passed to a d-dimensional object.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A region with zero or negative volume was used where a quadrature
    /// domain is required.
    #[error("zero-volume region")]
    ZeroVolumeRegion,

    /// A potential table failed validation.
    #[error("invalid potential table: {0}")]
    InvalidTable(String),

    /// A parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Underlying I/O failure while loading external data.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
