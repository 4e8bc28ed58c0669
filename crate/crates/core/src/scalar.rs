//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Complex number over the crate scalar.
pub type Cx<T> = Complex<T>;

/// Real scalar used throughout the crate. Implemented for `f32` and `f64`.
///
/// `Float` and `Signed` (pulled in by `FftNum`) both define `abs` and
/// `signum`, so generic code calls [`Real::mag`] instead.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot represent finite f64 values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn mag(self) -> Self {
        Float::abs(self)
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the scalar type.
    #[inline]
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Builds a complex number from real and imaginary parts.
#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// Complex number from f64 parts.
#[inline]
pub fn cxf<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `r e^{i theta}`.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> Cx<T> {
    Complex::from_polar(r, theta)
}

/// Converts a complex value to the `f64` representation used in errors and reports.
#[inline]
pub fn to_c64<T: Real>(z: Cx<T>) -> Complex<f64> {
    Complex::new(z.re.f64(), z.im.f64())
}

/// Converts an `f64` complex value into the scalar type.
#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> Cx<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

/// `2 pi j / n` for `j = 0..n`.
pub fn uniform_angles<T: Real>(n: usize) -> Vec<T> {
    let step = T::TAU() / T::from_usize_lossy(n);
    (0..n).map(|j| step * T::from_usize_lossy(j)).collect()
}

/// Maximum of an iterator of scalars; `None` for an empty iterator. NaN propagates.
pub fn max_of<T: Real>(it: impl IntoIterator<Item = T>) -> Option<T> {
    let mut best: Option<T> = None;
    for x in it {
        best = Some(match best {
            None => x,
            Some(b) if x.is_nan() || b.is_nan() => T::nan(),
            Some(b) => b.max(x),
        });
    }
    best
}

/// Minimum of an iterator of scalars; `None` for an empty iterator. NaN propagates.
pub fn min_of<T: Real>(it: impl IntoIterator<Item = T>) -> Option<T> {
    let mut best: Option<T> = None;
    for x in it {
        best = Some(match best {
            None => x,
            Some(b) if x.is_nan() || b.is_nan() => T::nan(),
            Some(b) => b.min(x),
        });
    }
    best
}
