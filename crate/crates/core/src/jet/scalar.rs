use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use super::JetError;

/// Number-like type the expression evaluator runs on.
///
/// `f64`, [`Taylor`](super::Taylor) and [`Dual`](super::Dual) implement it, and
/// the latter two are generic over their coefficient type, so they nest:
/// `Dual<Taylor<Dual<f64>>>` carries a partial derivative, its total
/// derivatives in `s`, and a directional derivative with respect to an outer
/// parameter, all at once.
///
/// Operations that can leave their domain (division, `sqrt`, `ln`, `tan`,
/// `atan2`) return a [`JetError`] instead of producing NaN or infinity.
pub trait Scalar:
    Copy + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;

    /// The plain real value at the base point, with every infinitesimal part dropped.
    fn re(&self) -> f64;

    fn is_zero(&self) -> bool;

    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError>;
    fn sqrt(self) -> Result<Self, JetError>;
    fn ln(self) -> Result<Self, JetError>;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan(self) -> Self;

    /// Full-circle angle of `(x, self)`; branch cut on the negative x-axis.
    fn atan2(self, x: Self) -> Result<Self, JetError>;

    fn tan(self) -> Result<Self, JetError> {
        self.sin().try_div(self.cos())
    }

    fn recip(self) -> Result<Self, JetError> {
        Self::from_f64(1.0).try_div(self)
    }

    /// Integer power by repeated multiplication; negative exponents divide.
    fn powi(self, k: i32) -> Result<Self, JetError> {
        let mut acc = Self::from_f64(1.0);
        let mut base = self;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if k < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }

    fn re(&self) -> f64 {
        *self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn scale(self, c: f64) -> Self {
        self * c
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        if rhs == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    fn sqrt(self) -> Result<Self, JetError> {
        if self < 0.0 {
            return Err(JetError::SqrtOfNegative(self));
        }
        Ok(f64::sqrt(self))
    }

    fn ln(self) -> Result<Self, JetError> {
        if self <= 0.0 {
            return Err(JetError::LogOfNonPositive(self));
        }
        Ok(f64::ln(self))
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn sinh(self) -> Self {
        f64::sinh(self)
    }

    fn cosh(self) -> Self {
        f64::cosh(self)
    }

    fn atan(self) -> Self {
        f64::atan(self)
    }

    fn atan2(self, x: Self) -> Result<Self, JetError> {
        Ok(f64::atan2(self, x))
    }

    fn tan(self) -> Result<Self, JetError> {
        let c = f64::cos(self);
        if c == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(f64::tan(self))
    }
}

/// Branch-cut test shared by the `atan2` implementations: the base point lies
/// on the negative x-axis and `y` moves off it.
pub(crate) fn on_atan2_cut<S: Scalar>(y: &S, x: &S, y_moves: bool) -> bool {
    y.re() == 0.0 && x.re() < 0.0 && y_moves
}
