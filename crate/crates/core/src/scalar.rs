//! Scalar abstraction: the real field every matrix, state, and divergence is
//! built over.
//!
//! All numerical code in this crate is generic over [`Scalar`], so the same
//! routines run in `f32` or `f64`. The crate root exposes `f64` aliases,
//! which is what the CLI and the default tolerances assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type underlying all complex matrix arithmetic: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant (tolerances, grid values).
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant must convert to Scalar")
    }

    /// Back to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for `T::real` that reads well at call sites.
pub fn real<T: Scalar>(x: f64) -> T {
    T::real(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_roundtrip() {
        let x: f64 = real(1e-10);
        assert_eq!(x, 1e-10);
        let y: f32 = real(0.5);
        assert_eq!(y, 0.5f32);
    }
}
