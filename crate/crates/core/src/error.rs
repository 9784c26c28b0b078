use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A digit could not be decided at the working precision: the orbit value
    /// times beta lies within the certified error radius of an integer.
    #[error("ambiguous digit at step {step}: {detail}")]
    AmbiguousDigit { step: usize, detail: String },

    /// A lexicographic comparison ran out of computed digits before deciding.
    #[error("insufficient digits: {0}")]
    InsufficientDigits(String),

    /// A word fails the self-admissibility condition required to define a base.
    #[error("inadmissible word: {0}")]
    InadmissibleWord(String),

    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Evaluation too close to a pole to certify the result.
    #[error("near pole: |1-phi| within tail bound of zero")]
    NearPole,

    /// An enumeration would exceed its configured size limit.
    #[error("too large: {0}")]
    TooLarge(String),

    /// A zero lies too close to an integration contour.
    #[error("zero too close to contour at radius {radius}")]
    BoundaryZero { radius: f64 },

    /// Newton iteration failed to converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A continuation corrector jumped to a different branch.
    #[error("branch loss: {0}")]
    BranchLoss(String),

    /// An orbit value underflowed so an exponent estimate is undefined.
    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),

    /// A sub-leading eigenvalue was not simple where simplicity is required.
    #[error("eigenvalue not simple: {0}")]
    NotSimple(String),

    /// The observable construction matrix was rank-deficient beyond expectation.
    #[error("degenerate breakpoints: {0}")]
    DegenerateBreakpoints(String),

    /// Norms fell below the representable floor; the fit window was truncated.
    #[error("underflow in decay iteration at n={0}")]
    Underflow(usize),

    /// A cross-module verification clause failed.
    #[error("verification failure in clause {clause}: {detail}")]
    VerificationFailure { clause: String, detail: String },

    /// Invalid construction parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
