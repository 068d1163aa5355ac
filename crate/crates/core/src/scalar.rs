//! Scalar abstractions shared by the exact and floating-point code paths.
//!
//! The rewriting engine works over any [`Coefficient`] field: exact
//! rationals for identity checks, `f64` when a polynomial carries surd
//! coefficients. The closed-form bounds are generic over [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A field element usable as a polynomial coefficient.
pub trait Coefficient:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Embeds a (small) integer.
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits the coefficient type")
    }

    /// `base^exp` for a possibly negative exponent.
    fn powi_signed(base: &Self, exp: i32) -> Self {
        let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
        if exp < 0 {
            Self::one() / p
        } else {
            p
        }
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// Lossy view used for diagnostics and tolerance comparisons.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Coefficient for T where
    T: Num
        + Clone
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalar for closed-form evaluations (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    fn int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn signed_powers() {
        let m = Rational64::from_integer(3);
        assert_eq!(Rational64::powi_signed(&m, -2), Rational64::new(1, 9));
        assert_eq!(Rational64::powi_signed(&m, 0), Rational64::from_integer(1));
        assert_eq!(f64::powi_signed(&2.0, 3), 8.0);
    }
}
