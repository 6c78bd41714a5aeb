//! Scalar abstraction for the numerical core.
//!
//! Every estimator, simulator and statistic in this crate is generic over a
//! floating-point scalar implementing [`Real`]. Concrete aliases for the
//! `f64` instantiation live at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftNum;
use std::fmt::{Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable by the whole pipeline (FFTs, sampling, I/O).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Display
    + LowerExp
    + FftNum
    + serde::Serialize
    + serde::de::DeserializeOwned
{
    /// Draws a standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from `f64` (panics only for non-representable NaN-free inputs).
    fn from_f(x: f64) -> Self {
        Self::from_f64(x).expect("f64 convertible to scalar")
    }

    /// Conversion from a count.
    fn from_n(n: usize) -> Self {
        Self::from_usize(n).expect("usize convertible to scalar")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// 2π.
    fn two_pi() -> Self {
        Self::PI() + Self::PI()
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
