//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type (`f32` or `f64`).
///
/// Random draws are routed through the trait so generic code does not need
/// to repeat `StandardNormal: Distribution<T>` bounds everywhere.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self;

    /// Lossless widening (or rounding, for `f32`) into `f64`.
    fn as_f64(self) -> f64;

    /// One standard normal draw.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the half-open unit interval `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Count as a scalar.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardUniform as Distribution<$t>>::sample(&StandardUniform, rng)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Dense vector helpers over slices.
pub mod vector {
    use super::Scalar;

    #[inline]
    pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
    }

    #[inline]
    pub fn norm<T: Scalar>(a: &[T]) -> T {
        dot(a, a).sqrt()
    }

    pub fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
            .sqrt()
    }

    /// Returns `a / ‖a‖`, or `None` for the zero vector.
    pub fn normalized<T: Scalar>(a: &[T]) -> Option<Vec<T>> {
        let n = norm(a);
        if n > T::zero() && n.is_finite() {
            Some(a.iter().map(|&x| x / n).collect())
        } else {
            None
        }
    }

    /// Standard Gaussian vector normalised onto the unit sphere.
    pub fn random_unit<T: Scalar, R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
        loop {
            let g: Vec<T> = (0..dim).map(|_| T::sample_normal(rng)).collect();
            if let Some(u) = normalized(&g) {
                return u;
            }
        }
    }
}
