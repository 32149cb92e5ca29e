//! Scalar abstraction: the whole library is generic over the working
//! floating-point type, with `f64` as the concrete default (see the
//! crate-root aliases).

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable throughout the library: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lift an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be representable in the scalar type")
}

/// Lift a signed integer (mode index) into the scalar type.
#[inline]
pub fn from_mode<T: Scalar>(k: i64) -> T {
    T::from_i64(k).expect("mode index must be representable in the scalar type")
}

/// Period of the circle: all fields live on `[0, 2*pi)`.
#[inline]
pub fn period<T: Scalar>() -> T {
    T::PI() + T::PI()
}

/// The imaginary unit.
#[inline]
pub fn imag_unit<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Best-effort conversion to `f64` for error reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
