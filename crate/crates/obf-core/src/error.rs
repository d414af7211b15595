use thiserror::Error as ThisError;

/// Error type shared across the crate.
#[derive(Debug, Clone, ThisError)]
pub enum Error {
    /// An argument left the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A root-finding bracket does not enclose the target value.
    #[error("bracket error: {0}")]
    Bracket(String),
    /// An iterative routine exhausted its budget before reaching tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),
    /// A grid point could not be evaluated reliably (e.g. density underflow).
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    /// An operation that requires a certified Schur-concave model was refused.
    #[error("not certified: {0}")]
    NotCertified(String),
    /// A model or policy specification string failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
    /// Matrix/vector dimensions disagree with the policy or model.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
