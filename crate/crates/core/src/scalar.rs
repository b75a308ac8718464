//! Scalar abstraction shared by every module.
//!
//! All numerical code is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Complex entries are `num_complex::Complex<T>`.

use std::fmt;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// A real floating-point scalar usable as the base field of [`crate::ComplexMatrix`].
pub trait Real: RealField + Copy + Default + ToPrimitive + fmt::Debug + fmt::Display {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Widens (or narrows) to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn magnitude(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cabs<T: Real>(z: Cplx<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub(crate) fn cre<T: Real>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Cplx<T>) -> bool {
    z.re.as_f64().is_finite() && z.im.as_f64().is_finite()
}
