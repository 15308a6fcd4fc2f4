//! Floating-point abstraction the numeric kernels are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating scalar for geometry, material, and solver kernels.
///
/// `f64` is the type the shipped binaries instantiate; `f32` is kept working
/// for bandwidth experiments. Anything implementing the listed `num_traits`
/// bounds plus the formatting/threading glue can participate.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` coefficient (stencil weight, fit constant, …) into
    /// this scalar type.
    #[inline]
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("coefficient not representable in scalar type")
    }

    /// Widens to `f64` for output formatting and cross-type comparisons.
    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        assert_eq!(f64::real(0.25), 0.25);
        assert_eq!(f32::real(0.25), 0.25f32);
        assert_eq!(0.25f64.as_f64(), 0.25);
    }
}
