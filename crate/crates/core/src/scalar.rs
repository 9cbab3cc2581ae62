use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar the whole crate is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts a literal constant. Panics only if the value cannot be represented at all.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("integer representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Natural log of the largest finite value of the type.
    fn ln_max() -> Self {
        Self::max_value().ln()
    }
}

impl Real for f32 {}
impl Real for f64 {}
