//! Scalar abstraction so the whole kernel can run on `f32` or `f64`.
//!
//! All model data, formulation coefficients, and solver arithmetic are
//! generic over [`Scalar`]. The crate root exports `f64` aliases, which is
//! what the CLI and the bundled data use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar used by every numeric routine in this crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion of an `f64` constant (tolerances, literals).
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant not representable in scalar type")
    }

    /// Widen to `f64` for reporting and serialization helpers.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
