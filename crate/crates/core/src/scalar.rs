//! Scalar abstraction shared by the numerical kernels.
//!
//! Everything that does arithmetic on rates, fields or polarizabilities is
//! written against [`Real`] so the same code runs in `f64` (the default used
//! by the sweep engine and the CLI) or `f32` for quick low-precision scans.
//! SI magnitudes span roughly 1e-58..1e9 in intermediate products, so `f32`
//! is only meaningful for dimensionless work such as the square-root branch
//! logic or γ-scaled systems.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by every kernel in this crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn im<T: Real>(x: T) -> Cplx<T> {
    Complex::new(T::zero(), x)
}

#[inline]
pub(crate) fn is_finite_c<T: Real>(z: Cplx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference<T: Real>(a: Cplx<T>, b: Cplx<T>) -> T {
    let scale = a.norm().max(b.norm());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).norm() / scale
    }
}
