//! Scalar abstraction for the numeric core.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the numeric core.
///
/// Implemented by `f32` and `f64`. Grid arithmetic (sample rates, frequencies,
/// timestamps) stays in `f64` everywhere; this trait covers the signal values,
/// point-cloud coordinates and filtration scales derived from them.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Conversion from an `f64` constant or grid value.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value not representable in scalar type")
    }

    /// Conversion from a count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Widening conversion for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
