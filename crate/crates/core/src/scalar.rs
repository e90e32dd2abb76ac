//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Total for the supported float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a small count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `max(x, 8 * epsilon)`: tolerances that stay meaningful at lower precision.
    #[inline]
    fn tol_floor(x: f64) -> Self {
        let t = Self::lit(x);
        let floor = Self::epsilon() * Self::lit(8.0);
        if t > floor {
            t
        } else {
            floor
        }
    }

    /// Largest representable value strictly below one.
    #[inline]
    fn one_below() -> Self {
        Self::one() - Self::epsilon() / Self::lit(2.0)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `k!` for small `k`.
pub fn factorial<S: Scalar>(k: u32) -> S {
    (1..=k).fold(S::one(), |acc, i| acc * S::from_u32(i).unwrap())
}

/// Binomial coefficient `C(n, r)`.
pub fn binomial<S: Scalar>(n: u32, r: u32) -> S {
    if r > n {
        return S::zero();
    }
    let r = r.min(n - r);
    let mut acc = S::one();
    for i in 0..r {
        acc = acc * S::from_u32(n - i).unwrap() / S::from_u32(i + 1).unwrap();
    }
    acc.round()
}
