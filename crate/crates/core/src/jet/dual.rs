use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{on_atan2_cut, Scalar};
use super::JetError;

/// `base + ε·perturbation` with `ε² = 0`, over any [`Scalar`] base ring.
///
/// With a [`Taylor`](super::Taylor) base this yields a partial derivative of
/// an expression that is itself a series in the curve parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub base: T,
    pub perturbation: T,
}

/// Dual number over Taylor series in the curve parameter.
pub type DualDirection = Dual<super::Taylor<f64>>;

impl<T: Scalar> Dual<T> {
    pub fn new(base: T, perturbation: T) -> Self {
        Dual { base, perturbation }
    }

    pub fn constant(base: T) -> Self {
        Dual {
            base,
            perturbation: T::from_f64(0.0),
        }
    }

    /// Seeded with unit perturbation: the direction being differentiated.
    pub fn variable(base: T) -> Self {
        Dual {
            base,
            perturbation: T::from_f64(1.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.base + rhs.base, self.perturbation + rhs.perturbation)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.base - rhs.base, self.perturbation - rhs.perturbation)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.base * rhs.base,
            self.base * rhs.perturbation + self.perturbation * rhs.base,
        )
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.base, -self.perturbation)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(c: f64) -> Self {
        Dual::constant(T::from_f64(c))
    }

    fn re(&self) -> f64 {
        self.base.re()
    }

    fn is_zero(&self) -> bool {
        self.base.is_zero() && self.perturbation.is_zero()
    }

    fn scale(self, c: f64) -> Self {
        Dual::new(self.base.scale(c), self.perturbation.scale(c))
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        let q = self.base.try_div(rhs.base)?;
        let p = (self.perturbation - q * rhs.perturbation).try_div(rhs.base)?;
        Ok(Dual::new(q, p))
    }

    fn sqrt(self) -> Result<Self, JetError> {
        let r = self.base.sqrt()?;
        if self.perturbation.is_zero() {
            return Ok(Dual::constant(r));
        }
        if r.re() == 0.0 {
            return Err(JetError::SqrtAtZero);
        }
        Ok(Dual::new(r, self.perturbation.try_div(r.scale(2.0))?))
    }

    fn ln(self) -> Result<Self, JetError> {
        Ok(Dual::new(self.base.ln()?, self.perturbation.try_div(self.base)?))
    }

    fn exp(self) -> Self {
        let e = self.base.exp();
        Dual::new(e, self.perturbation * e)
    }

    fn sin(self) -> Self {
        Dual::new(self.base.sin(), self.perturbation * self.base.cos())
    }

    fn cos(self) -> Self {
        Dual::new(self.base.cos(), -(self.perturbation * self.base.sin()))
    }

    fn sinh(self) -> Self {
        Dual::new(self.base.sinh(), self.perturbation * self.base.cosh())
    }

    fn cosh(self) -> Self {
        Dual::new(self.base.cosh(), self.perturbation * self.base.sinh())
    }

    fn atan(self) -> Self {
        let denom = T::from_f64(1.0) + self.base * self.base;
        Dual::new(
            self.base.atan(),
            self.perturbation
                .try_div(denom)
                .expect("1 + a^2 has constant term >= 1"),
        )
    }

    fn atan2(self, x: Self) -> Result<Self, JetError> {
        if on_atan2_cut(&self, &x, !self.perturbation.is_zero()) {
            return Err(JetError::Atan2BranchCut);
        }
        let (a, b) = (self.base, self.perturbation);
        let (c, d) = (x.base, x.perturbation);
        let value = a.atan2(c)?;
        let rate = (c * b - a * d).try_div(a * a + c * c)?;
        Ok(Dual::new(value, rate))
    }
}
