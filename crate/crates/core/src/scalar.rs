//! Scalar abstraction shared by the dynamics, gait, reward and network code.

use std::fmt::{Debug, Display};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Physics runs in `f64` by default; the
/// networks run in `f32` for training and `f64` for gradient checks.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
