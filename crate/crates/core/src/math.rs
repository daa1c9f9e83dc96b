//! Scalar helpers pinned to `libm`.
//!
//! Every transcendental evaluation in this crate goes through these wrappers
//! rather than `std` or `num_traits::Float`, so results are identical no
//! matter which platform or feature set the final binary is built with.

use crate::Complex;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// |z| via `hypot`; safe up to the overflow guard (no `|z|^2` intermediate).
#[inline]
pub fn cabs(z: Complex) -> f64 {
    hypot(z.re, z.im)
}

/// exp(z) = e^Re(z) (cos Im(z) + i sin Im(z)).
///
/// For purely real z this returns an exactly real result.
#[inline]
pub fn cexp(z: Complex) -> Complex {
    let m = exp(z.re);
    Complex::new(m * cos(z.im), m * sin(z.im))
}

/// Next representable float away from zero's side: one outward ulp step up.
#[inline]
pub fn ulp_up(x: f64) -> f64 {
    x.next_up()
}

/// One outward ulp step down.
#[inline]
pub fn ulp_down(x: f64) -> f64 {
    x.next_down()
}
