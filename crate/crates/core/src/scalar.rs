//! Scalar abstraction shared by the tensor and constructor code.
//!
//! Curvature models can be built over `f32`, `f64` or exact rationals. The
//! exact instantiation is what lets the symmetry checks demand a defect of
//! exactly zero; the floating instantiations feed the eigen-solvers.

use std::ops::Neg;

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Field element usable as a tensor entry.
pub trait Scalar:
    nalgebra::Scalar
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + Num
    + Neg<Output = Self>
    + Signed
    + FromPrimitive
    + ToPrimitive
{
    /// `true` when arithmetic is exact, so identities must hold with zero residual.
    const EXACT: bool;

    /// Residual magnitude below which an identity is considered satisfied.
    fn identity_tol() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            1e-12
        }
    }

    fn from_rational(q: &BigRational) -> Self;

    fn from_i64_exact(v: i64) -> Self {
        Self::from_i64(v).expect("integer conversion")
    }

    /// Lossy conversion used for reporting.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {
        $(
            impl Scalar for $t {
                const EXACT: bool = false;

                fn identity_tol() -> f64 {
                    (<$t>::EPSILON as f64) * 1e4
                }

                fn from_rational(q: &BigRational) -> Self {
                    q.to_f64().unwrap_or(f64::NAN) as $t
                }
            }
        )*
    };
}

impl_float_scalar!(f32, f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

/// Exact rational from an `f64`; the binary expansion is reproduced exactly.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn is_zero<S: Scalar>(x: &S) -> bool {
    Zero::is_zero(x)
}
