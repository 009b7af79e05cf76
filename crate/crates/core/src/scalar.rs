//! Scalar abstraction shared by every numeric type in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the game tables and solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are per type: `f64` uses the
/// documented `1e-9` normalization tolerance, `f32` a looser one matching its
/// precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Tolerance for probability normalization checks.
    const PROB_TOL: f64;

    /// Pivot/ratio tolerance used by the simplex solver.
    const PIVOT_TOL: f64;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const PROB_TOL: f64 = 1e-9;
    const PIVOT_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const PROB_TOL: f64 = 1e-5;
    const PIVOT_TOL: f64 = 1e-6;
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs().as_f64())
        .fold(0.0, f64::max)
}
