//! Scalar abstraction for costs.
//!
//! The solver and plan arithmetic are generic over the cost scalar so that
//! production runs use `f64` while oracle-equivalence tests use `i64` and
//! compare objectives exactly.

use num_traits::{Num, NumCast};

/// Numeric requirements for a cost scalar.
pub trait CostScalar:
    Num + NumCast + PartialOrd + Copy + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Lossy view used only for bound computation and reporting.
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap()
    }
}

impl<T> CostScalar for T where
    T: Num + NumCast + PartialOrd + Copy + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}
