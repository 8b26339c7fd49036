//! Library half of the `surreal` command: parsing, evaluation and the
//! subcommand implementations, kept out of `main` so they can be tested.

pub mod commands;
pub mod eval;
pub mod expansion;
pub mod parse;

use std::fmt;

use surreal::Error;

/// Anything a subcommand can fail with, mapped onto process exit codes.
#[derive(Debug)]
pub enum Failure {
    Syntax(parse::SyntaxError),
    Math(Error),
    Usage(String),
}

impl Failure {
    /// 2 syntax, 3 unsupported, 4 needs more terms, 5 mathematical, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Syntax(_) => 2,
            Failure::Usage(_) => 1,
            Failure::Math(e) => match e {
                Error::Parse(_) => 2,
                Error::Unsupported(_) | Error::NotApplicable(_) => 3,
                Error::NeedsMoreTerms(_) => 4,
                Error::Resource { .. } => 1,
                _ => 5,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Syntax(e) => write!(f, "{e}"),
            Failure::Math(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<parse::SyntaxError> for Failure {
    fn from(e: parse::SyntaxError) -> Self {
        Failure::Syntax(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Math(e)
    }
}
