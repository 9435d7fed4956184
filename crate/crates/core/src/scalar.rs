//! Real scalar abstraction shared by every numerical module.
//!
//! All mathematical code is written against [`Real`], so the same routines run
//! in `f64` (the default used by the suites and the CLI) or `f32` (useful for
//! quick experiments with correspondingly looser tolerances).

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point real field usable as the base scalar of complex matrices.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Convert an `f64` literal into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance of `x`, floored at a small multiple of machine epsilon so
    /// that `f64` thresholds stay meaningful in lower precision.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Build a complex scalar from real and imaginary parts.
#[inline]
pub fn c<R: Real>(re: R, im: R) -> Complex<R> {
    Complex::new(re, im)
}

/// Promote a real scalar to a complex one.
#[inline]
pub fn cr<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}
