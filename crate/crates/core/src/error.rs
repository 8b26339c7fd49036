use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// `NeedsMoreTerms` is not a failure of the inputs: it signals that a lazy
/// object has to be refined further before the question can be answered.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("resource cap exceeded: {what} (cap {cap})")]
    Resource { what: &'static str, cap: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported fragment: {0}")]
    Unsupported(String),
    #[error("not exactly representable: {0}")]
    Representation(String),
    #[error("needs more terms: {0}")]
    NeedsMoreTerms(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("generator error: {0}")]
    Generator(String),
    #[error("series is not Gevrey-1 on the inspected window: {0}")]
    NotGevrey(String),
    #[error("degenerate Padé system: {0}")]
    Rank(String),
    #[error("pole on the positive real axis near p = {0}; use the principal-value transform")]
    PoleOnPositiveAxis(f64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
