//! Process-wide resource caps.
//!
//! Values are read with relaxed atomics; they are meant to be set once at
//! start-up (the CLI reads them from the environment) and then left alone.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

static DEPTH_CAP: AtomicUsize = AtomicUsize::new(8);
static TERM_CAP: AtomicUsize = AtomicUsize::new(250_000);
static ITERATION_CAP: AtomicUsize = AtomicUsize::new(4_096);
static FLOAT_MODE: AtomicBool = AtomicBool::new(false);

/// Maximum nesting depth of exponents in a normal form.
pub fn depth_cap() -> usize {
    DEPTH_CAP.load(Ordering::Relaxed)
}

pub fn set_depth_cap(cap: usize) {
    DEPTH_CAP.store(cap, Ordering::Relaxed);
}

/// Maximum number of terms any single truncated computation may hold.
pub fn term_cap() -> usize {
    TERM_CAP.load(Ordering::Relaxed)
}

pub fn set_term_cap(cap: usize) {
    TERM_CAP.store(cap, Ordering::Relaxed);
}

/// Maximum number of refinement rounds (series orders, grid levels).
pub fn iteration_cap() -> usize {
    ITERATION_CAP.load(Ordering::Relaxed)
}

pub fn set_iteration_cap(cap: usize) {
    ITERATION_CAP.store(cap, Ordering::Relaxed);
}

/// When enabled, values that have no exact representation fall back to
/// floats with an error bound instead of failing.
pub fn float_mode() -> bool {
    FLOAT_MODE.load(Ordering::Relaxed)
}

pub fn set_float_mode(on: bool) {
    FLOAT_MODE.store(on, Ordering::Relaxed);
}
