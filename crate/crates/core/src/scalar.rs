//! Scalar abstraction: every quantity in this crate is generic over the
//! underlying real float, `f32` or `f64`.

use num_complex::Complex;

/// Real scalar backing amplitudes, kernels, and matrices.
///
/// Combines the `num-traits` float interface used by the kernel and state
/// arithmetic with `nalgebra`'s field trait needed by the dense linear
/// algebra. Implemented by `f32` and `f64`.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + nalgebra::RealField
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Float for T where
    T: num_traits::Float
        + num_traits::FloatConst
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + nalgebra::RealField
        + Default
        + Send
        + Sync
        + 'static
{
}

// `num_traits::Float` and `nalgebra::RealField` both expose the elementary
// functions, so method syntax on a `T: Float` is ambiguous. The free
// functions below pick the `num_traits` lane once, for use crate-wide.

#[inline]
pub(crate) fn sqrt<T: Float>(x: T) -> T {
    num_traits::Float::sqrt(x)
}

#[inline]
pub(crate) fn cos<T: Float>(x: T) -> T {
    num_traits::Float::cos(x)
}

#[inline]
pub(crate) fn sin<T: Float>(x: T) -> T {
    num_traits::Float::sin(x)
}

#[inline]
pub(crate) fn cosh<T: Float>(x: T) -> T {
    num_traits::Float::cosh(x)
}

#[inline]
pub(crate) fn sinh<T: Float>(x: T) -> T {
    num_traits::Float::sinh(x)
}

#[inline]
pub(crate) fn abs<T: Float>(x: T) -> T {
    num_traits::Float::abs(x)
}

/// Lossless-enough conversion from `f64` literals (tolerances, constants).
#[inline]
pub(crate) fn lit<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("float literal conversion")
}

/// Exact conversion of small integers (photon numbers, weights).
#[inline]
pub(crate) fn int<T: Float>(x: i64) -> T {
    T::from_i64(x).expect("integer-to-float conversion")
}

/// Unit imaginary as a complex scalar.
#[inline]
pub(crate) fn i<T: Float>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// e^{iφ} as a complex scalar.
#[inline]
pub(crate) fn cis<T: Float>(phase: T) -> Complex<T> {
    Complex::new(cos(phase), sin(phase))
}
