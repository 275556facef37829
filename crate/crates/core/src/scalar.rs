//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, metric and optimization code is written against [`Real`],
//! which is satisfied by `f32` and `f64`. Tolerances quoted throughout the
//! crate assume `f64`; `f32` is supported for the cheap closed forms
//! (geometry, steering, Doppler, pulse integrals) where single precision is
//! useful.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in vacuum (m/s), exact by definition of the metre.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn cnt<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Lossy conversion to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Speed of light as `T`.
#[inline]
pub fn light_speed<T: Real>() -> T {
    lit(SPEED_OF_LIGHT)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `exp(j·phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a % two_pi;
    if w > T::pi() {
        w -= two_pi;
    } else if w <= -T::pi() {
        w += two_pi;
    }
    w
}

/// Decibel-milliwatts to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
