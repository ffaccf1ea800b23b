use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used for means, indices and regret: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
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
    /// Converts an `f64` literal. Infallible for the supported float types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
