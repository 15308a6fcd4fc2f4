//! Error taxonomy shared by every public operation.

use thiserror::Error;

/// Failure modes of the laboratory's operations.
///
/// The CLI maps these onto process exit codes: configuration and validation
/// problems ([`InvalidGeometry`](PlateError::InvalidGeometry),
/// [`InvalidInput`](PlateError::InvalidInput), [`Resolution`](PlateError::Resolution),
/// [`Parse`](PlateError::Parse)) exit 1, solver failures
/// ([`Singular`](PlateError::Singular), [`Solver`](PlateError::Solver)) exit 2,
/// and optimizer non-convergence exits 3.
#[derive(Debug, Error)]
pub enum PlateError {
    /// Degenerate or inconsistent geometry (self-intersection, nonpositive
    /// star radius, inclusion touching the outer boundary, …).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A precondition on non-geometric input failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested grid cannot represent the geometry (e.g. too few cells
    /// of clearance between the inclusion and the outer boundary).
    #[error("resolution too coarse: {0}")]
    Resolution(String),

    /// The assembled system lost definiteness.
    #[error("singular system: {0}")]
    Singular(String),

    /// The factorization or the iterative fallback failed to reach the
    /// requested residual.
    #[error("linear solve failed: {0}")]
    Solver(String),

    /// Derivative-free search exhausted its budget without converging.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Malformed input text (config, geometry, material, or data files).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PlateError>;
