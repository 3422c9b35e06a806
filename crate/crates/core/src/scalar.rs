use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point type the ranking math is generic over.
pub trait Scalar: Float + Debug + Display + Send + Sync + 'static {
    /// Tolerance used for "sums to one" style invariants.
    fn unit_sum_tolerance() -> Self;

    fn from_f64(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 converts to scalar")
    }
}

impl Scalar for f64 {
    fn unit_sum_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn unit_sum_tolerance() -> Self {
        1e-5
    }
}
