//! Exact arithmetic on a computable fragment of the surreal numbers.
//!
//! * [`nf`]: finite Conway normal forms and their field operations.
//! * [`stream`]: lazy grid-based normal forms, infinitesimal series, `exp` and `ln`.
//! * [`genetic`]: simplest-number brackets, birthdays and the genetic `Ei`.
//! * [`transseries`]: level-one log-free transseries with termwise integration.
//! * [`borel`]: Borel transforms, Gevrey bounds, Padé continuation and Laplace sums.
//! * [`special`]: `Ei`, `erfi`, `ln Gamma` and Stirling data plus numeric oracles.

pub mod borel;
pub mod config;
pub mod error;
pub mod genetic;
pub mod nf;
pub mod quad;
pub mod scalar;
pub mod special;
pub mod stream;
pub mod transseries;

pub use error::{Error, Result};
pub use nf::Surreal;
pub use scalar::{Constant, Rational, Scalar};
