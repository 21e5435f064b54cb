//! Error taxonomy shared by every module in the crate.
//!
//! Errors are split by how the caller should react: configuration and
//! parameter errors are programming or input mistakes, singular shifts and
//! near-eigenvalue refusals are mathematically meaningful outcomes that a
//! scan records and skips, and non-convergence carries enough diagnostics
//! to decide whether a point should be retried with a larger budget.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    /// A parameter is outside its documented domain (negative tolerance,
    /// odd grid size, exponent below one, dimension below three, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects that must share a geometry or a length do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A resolvent was requested at a shift that sits on (or within the
    /// guard distance of) the truncated spectrum.
    #[error("singular shift: distance {distance:.3e} from the spectrum is below the guard {guard:.3e}")]
    SingularShift { distance: f64, guard: f64 },

    /// An iterative solve was refused or abandoned because the shift sits
    /// too close to an eigenvalue; carries the best residual reached.
    #[error("near-eigenvalue solve: residual {residual:.3e} after {iterations} iterations")]
    NearEigenvalue { residual: f64, iterations: usize },

    /// An iteration ran out of budget for a reason other than a nearby
    /// eigenvalue (for example a flow-average ladder that is not Cauchy).
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// The sample set for a sup/inf estimate is demonstrably inadequate,
    /// e.g. the sup-ladder rose with T beyond tolerance.
    #[error("sampling insufficiency: {0}")]
    SamplingInsufficiency(String),

    /// Campaign configuration could not be parsed or fails validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Expected-values file is missing a key or malformed.
    #[error("expected-values error: {0}")]
    ExpectedValues(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
