use crate::error::DomainError;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Numeric field the tensor pipeline is generic over.
///
/// Implemented by `f64` (plain evaluation) and by [`crate::jet::Jet<T>`]
/// (forward-mode derivatives). Because `Jet<T>` is itself generic over a
/// `Scalar`, derivative structures of any depth are obtained by nesting;
/// each level stays within the 8-direction / order-3 jet budget.
///
/// Infallible transcendentals share names with the `f64` inherent methods
/// (identical semantics on `f64`); fallible ones are `try_*` and report the
/// domain violation instead of producing NaNs.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Primal value (the order-zero slot, through all nesting levels).
    fn value(&self) -> f64;

    /// Structural exact zero (used to skip dead convolution terms).
    fn is_zero(&self) -> bool;

    /// Multiply by a plain constant.
    fn scale(&self, k: f64) -> Self;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn tanh(&self) -> Self;

    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError>;
    fn try_recip(&self) -> Result<Self, DomainError>;
    fn try_sqrt(&self) -> Result<Self, DomainError>;
    fn try_ln(&self) -> Result<Self, DomainError>;
    fn try_tan(&self) -> Result<Self, DomainError>;
    fn try_abs(&self) -> Result<Self, DomainError>;
    fn try_powi(&self, n: i32) -> Result<Self, DomainError>;
    fn try_powf(&self, e: f64) -> Result<Self, DomainError>;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    #[inline]
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }

    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError> {
        if *rhs == 0.0 {
            return Err(DomainError::DivByZero);
        }
        Ok(self / rhs)
    }

    fn try_recip(&self) -> Result<Self, DomainError> {
        if *self == 0.0 {
            return Err(DomainError::DivByZero);
        }
        Ok(1.0 / self)
    }

    fn try_sqrt(&self) -> Result<Self, DomainError> {
        if *self < 0.0 {
            return Err(DomainError::SqrtNonPositive(*self));
        }
        Ok(f64::sqrt(*self))
    }

    fn try_ln(&self) -> Result<Self, DomainError> {
        if *self <= 0.0 {
            return Err(DomainError::LogNonPositive(*self));
        }
        Ok(f64::ln(*self))
    }

    fn try_tan(&self) -> Result<Self, DomainError> {
        let c = f64::cos(*self);
        if c == 0.0 {
            return Err(DomainError::DivByZero);
        }
        f64::sin(*self).try_div(&c)
    }

    fn try_abs(&self) -> Result<Self, DomainError> {
        Ok(f64::abs(*self))
    }

    fn try_powi(&self, n: i32) -> Result<Self, DomainError> {
        if n < 0 && *self == 0.0 {
            return Err(DomainError::DivByZero);
        }
        // Binary exponentiation so the value slot of a jet power matches the
        // plain-f64 power bit for bit.
        Ok(powi_by_squaring(*self, n))
    }

    fn try_powf(&self, e: f64) -> Result<Self, DomainError> {
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return self.try_powi(e as i32);
        }
        if *self <= 0.0 {
            return Err(DomainError::PowNonPositiveBase(*self));
        }
        Ok((e * f64::ln(*self)).exp())
    }
}

pub(crate) fn powi_by_squaring<T: Scalar>(base: T, n: i32) -> T {
    if n == 0 {
        return T::one();
    }
    let mut e = n.unsigned_abs();
    let mut base = base;
    let mut acc: Option<T> = None;
    loop {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a * base.clone(),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.clone() * base;
    }
    let r = acc.expect("n != 0");
    if n < 0 {
        r.try_recip().expect("checked nonzero base")
    } else {
        r
    }
}
