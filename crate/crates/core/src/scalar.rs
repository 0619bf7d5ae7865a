//! Scalar abstraction shared by the estimation and control code.

use std::fmt::{Debug, Display};

/// Floating point scalar the controllers and plants are generic over: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn half<T: Scalar>() -> T {
    lit(0.5)
}

#[inline]
pub(crate) fn clamp_abs<T: Scalar>(value: T, limit: T) -> T {
    value.max(-limit).min(limit)
}
