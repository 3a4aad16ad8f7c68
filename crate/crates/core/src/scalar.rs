//! Scalar abstraction for local scores.
//!
//! Every solver in this crate only copies, compares and sums scores, so any
//! IEEE float works. The crate root exposes `f64` aliases for everyday use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::Float;

/// A local-score scalar.
pub trait Score: Float + Sum + Debug + Display + FromStr + Send + Sync + Default + 'static {
    /// Absolute tolerance used when comparing sums produced by different solvers.
    fn sum_tolerance() -> Self;

    /// Lossy conversion from `f64`.
    fn from_f64_lossy(x: f64) -> Self;
}

impl Score for f64 {
    fn sum_tolerance() -> Self {
        1e-9
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }
}

impl Score for f32 {
    fn sum_tolerance() -> Self {
        1e-3
    }

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
}

/// `true` when two score sums agree within the scalar's tolerance.
pub fn scores_agree<S: Score>(a: S, b: S) -> bool {
    (a - b).abs() <= S::sum_tolerance()
}
