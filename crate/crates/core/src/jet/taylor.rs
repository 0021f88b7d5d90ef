use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{on_atan2_cut, Scalar};
use super::JetError;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Truncated univariate Taylor series `c0 + c1 h + ... + cK h^K`.
///
/// Coefficient `j` is `(1/j!) d^j/dh^j` of the represented quantity. Binary
/// operations work to the larger of the two operand orders, so a constant
/// (order 0) combines with a series of any order.
#[derive(Clone, Copy, PartialEq)]
pub struct Taylor<T = f64> {
    coeffs: [T; MAX_ORDER + 1],
    order: usize,
}

/// Taylor series with plain real coefficients.
pub type TaylorScalar = Taylor<f64>;

impl<T: Scalar> Taylor<T> {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: &[T]) -> Result<Self, JetError> {
        if coeffs.is_empty() || coeffs.len() > MAX_ORDER + 1 {
            return Err(JetError::UnsupportedOrder(coeffs.len().saturating_sub(1)));
        }
        let mut c = [T::from_f64(0.0); MAX_ORDER + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Taylor {
            coeffs: c,
            order: coeffs.len() - 1,
        })
    }

    /// Lifts a value to `[c, 0, ..., 0]` of the given order.
    pub fn constant(c: T, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "taylor order {order} exceeds {MAX_ORDER}");
        let mut coeffs = [T::from_f64(0.0); MAX_ORDER + 1];
        coeffs[0] = c;
        Taylor { coeffs, order }
    }

    /// The independent variable itself, `[x0, 1, 0, ..., 0]`.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut t = Self::constant(x0, order);
        if order >= 1 {
            t.coeffs[1] = T::from_f64(1.0);
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: usize) -> T {
        if k <= self.order {
            self.coeffs[k]
        } else {
            T::from_f64(0.0)
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs[..=self.order]
    }

    /// `k`-th derivative at the expansion point: `k! * c_k`.
    pub fn derivative(&self, k: usize) -> T {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k).scale(fact)
    }

    /// Same values truncated or zero-padded to another order.
    pub fn with_order(&self, order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut out = Self::constant(T::from_f64(0.0), order);
        for k in 0..=order.min(self.order) {
            out.coeffs[k] = self.coeffs[k];
        }
        out
    }

    fn zeros(order: usize) -> Self {
        Self::constant(T::from_f64(0.0), order)
    }

    /// Series of `d/dh` of `self`, kept at the same order (top coefficient zero).
    fn shifted_derivative(&self) -> Self {
        let mut d = Self::zeros(self.order);
        for j in 0..self.order {
            d.coeffs[j] = self.coeffs[j + 1].scale((j + 1) as f64);
        }
        d
    }

    /// Inverse of [`shifted_derivative`] with the given constant term.
    fn integrate(c0: T, deriv: &Self) -> Self {
        let mut out = Self::zeros(deriv.order);
        out.coeffs[0] = c0;
        for k in 1..=deriv.order {
            out.coeffs[k] = deriv.coeffs[k - 1].scale(1.0 / k as f64);
        }
        out
    }

    fn higher_terms_zero(&self) -> bool {
        self.coeffs[1..=self.order].iter().all(Scalar::is_zero)
    }

    fn sin_cos(self) -> (Self, Self) {
        let k_max = self.order;
        let mut s = Self::zeros(k_max);
        let mut c = Self::zeros(k_max);
        s.coeffs[0] = self.coeffs[0].sin();
        c.coeffs[0] = self.coeffs[0].cos();
        for k in 1..=k_max {
            let mut sk = T::from_f64(0.0);
            let mut ck = T::from_f64(0.0);
            for j in 1..=k {
                let ja = self.coeffs[j].scale(j as f64);
                sk = sk + ja * c.coeffs[k - j];
                ck = ck + ja * s.coeffs[k - j];
            }
            s.coeffs[k] = sk.scale(1.0 / k as f64);
            c.coeffs[k] = -ck.scale(1.0 / k as f64);
        }
        (s, c)
    }

    fn sinh_cosh(self) -> (Self, Self) {
        let k_max = self.order;
        let mut s = Self::zeros(k_max);
        let mut c = Self::zeros(k_max);
        s.coeffs[0] = self.coeffs[0].sinh();
        c.coeffs[0] = self.coeffs[0].cosh();
        for k in 1..=k_max {
            let mut sk = T::from_f64(0.0);
            let mut ck = T::from_f64(0.0);
            for j in 1..=k {
                let ja = self.coeffs[j].scale(j as f64);
                sk = sk + ja * c.coeffs[k - j];
                ck = ck + ja * s.coeffs[k - j];
            }
            s.coeffs[k] = sk.scale(1.0 / k as f64);
            c.coeffs[k] = ck.scale(1.0 / k as f64);
        }
        (s, c)
    }
}

impl<T: Scalar> Add for Taylor<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut out = Self::zeros(order);
        for k in 0..=order {
            out.coeffs[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        out
    }
}

impl<T: Scalar> Sub for Taylor<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut out = Self::zeros(order);
        for k in 0..=order {
            out.coeffs[k] = self.coeffs[k] - rhs.coeffs[k];
        }
        out
    }
}

impl<T: Scalar> Mul for Taylor<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.max(rhs.order);
        let mut out = Self::zeros(order);
        for k in 0..=order {
            let mut acc = T::from_f64(0.0);
            for j in 0..=k {
                acc = acc + self.coeffs[j] * rhs.coeffs[k - j];
            }
            out.coeffs[k] = acc;
        }
        out
    }
}

impl<T: Scalar> Neg for Taylor<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.coeffs[k] = -self.coeffs[k];
        }
        out
    }
}

impl<T: Scalar> Scalar for Taylor<T> {
    fn from_f64(c: f64) -> Self {
        Self::constant(T::from_f64(c), 0)
    }

    fn re(&self) -> f64 {
        self.coeffs[0].re()
    }

    fn is_zero(&self) -> bool {
        self.coeffs[..=self.order].iter().all(Scalar::is_zero)
    }

    fn scale(self, c: f64) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.coeffs[k] = self.coeffs[k].scale(c);
        }
        out
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        let b0 = rhs.coeffs[0];
        if b0.re() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let order = self.order.max(rhs.order);
        let mut out = Self::zeros(order);
        for k in 0..=order {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc = acc - rhs.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = acc.try_div(b0)?;
        }
        Ok(out)
    }

    fn sqrt(self) -> Result<Self, JetError> {
        if self.is_zero() {
            return Ok(self);
        }
        let a0 = self.coeffs[0];
        if a0.re() < 0.0 {
            return Err(JetError::SqrtOfNegative(a0.re()));
        }
        let s0 = a0.sqrt()?;
        let mut out = Self::zeros(self.order);
        out.coeffs[0] = s0;
        if self.higher_terms_zero() {
            return Ok(out);
        }
        if s0.re() == 0.0 {
            return Err(JetError::SqrtAtZero);
        }
        let two_s0 = s0.scale(2.0);
        for k in 1..=self.order {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc = acc - out.coeffs[j] * out.coeffs[k - j];
            }
            out.coeffs[k] = acc.try_div(two_s0)?;
        }
        Ok(out)
    }

    fn ln(self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0.re() <= 0.0 {
            return Err(JetError::LogOfNonPositive(a0.re()));
        }
        let mut out = Self::zeros(self.order);
        out.coeffs[0] = a0.ln()?;
        for k in 1..=self.order {
            let mut acc = T::from_f64(0.0);
            for j in 1..k {
                acc = acc + (out.coeffs[j] * self.coeffs[k - j]).scale(j as f64);
            }
            out.coeffs[k] = (self.coeffs[k] - acc.scale(1.0 / k as f64)).try_div(a0)?;
        }
        Ok(out)
    }

    fn exp(self) -> Self {
        let mut out = Self::zeros(self.order);
        out.coeffs[0] = self.coeffs[0].exp();
        for k in 1..=self.order {
            let mut acc = T::from_f64(0.0);
            for j in 1..=k {
                acc = acc + (self.coeffs[j] * out.coeffs[k - j]).scale(j as f64);
            }
            out.coeffs[k] = acc.scale(1.0 / k as f64);
        }
        out
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sinh(self) -> Self {
        self.sinh_cosh().0
    }

    fn cosh(self) -> Self {
        self.sinh_cosh().1
    }

    fn atan(self) -> Self {
        let one_plus_sq = Self::from_f64(1.0) + self * self;
        let rate = self
            .shifted_derivative()
            .try_div(one_plus_sq)
            .expect("1 + a^2 has constant term >= 1");
        Self::integrate(self.coeffs[0].atan(), &rate)
    }

    fn atan2(self, x: Self) -> Result<Self, JetError> {
        if on_atan2_cut(&self, &x, !self.is_zero()) {
            return Err(JetError::Atan2BranchCut);
        }
        let order = self.order.max(x.order);
        let y = self.with_order(order);
        let x = x.with_order(order);
        let t0 = y.coeffs[0].atan2(x.coeffs[0])?;
        let num = x * y.shifted_derivative() - y * x.shifted_derivative();
        let rate = num.try_div(x * x + y * y)?;
        Ok(Self::integrate(t0, &rate))
    }

    fn tan(self) -> Result<Self, JetError> {
        let (s, c) = self.sin_cos();
        s.try_div(c)
    }
}

impl<T: Scalar> fmt::Debug for Taylor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t(c: &[f64]) -> Taylor {
        Taylor::new(c).unwrap()
    }

    #[test]
    fn product_rule() {
        let r = t(&[1.0, 1.0, 0.0]) * t(&[2.0, 0.0, 0.0]);
        assert_eq!(r.coeffs(), &[2.0, 2.0, 0.0]);
    }

    #[test]
    fn sqrt_expansion() {
        // sqrt(4 + 4h + 2h^2) = 2 + h + h^2/4 + O(h^3)
        let r = t(&[4.0, 4.0, 2.0]).sqrt().unwrap();
        assert_relative_eq!(r.coeff(0), 2.0);
        assert_relative_eq!(r.coeff(1), 1.0);
        assert_relative_eq!(r.coeff(2), 0.25);
    }

    #[test]
    fn division_by_zero_constant_term() {
        let one = Taylor::<f64>::from_f64(1.0);
        assert_eq!(one.try_div(t(&[0.0, 1.0, 0.0])), Err(JetError::DivisionByZero));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(t(&[-1.0, 1.0]).sqrt(), Err(JetError::SqrtOfNegative(_))));
        assert!(matches!(t(&[0.0, 1.0]).ln(), Err(JetError::LogOfNonPositive(_))));
        assert_eq!(t(&[0.0, 1.0]).sqrt(), Err(JetError::SqrtAtZero));
        assert_eq!(t(&[0.0, 0.0]).sqrt().unwrap().coeffs(), &[0.0, 0.0]);
    }

    #[test]
    fn known_series_at_zero() {
        let x = Taylor::variable(0.0, 4);
        let e = x.exp();
        for (k, want) in [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0].iter().enumerate() {
            assert_relative_eq!(e.coeff(k), *want, epsilon = 1e-15);
        }
        let s = x.sin();
        assert_relative_eq!(s.coeff(3), -1.0 / 6.0, epsilon = 1e-15);
        let c = x.cos();
        assert_relative_eq!(c.coeff(4), 1.0 / 24.0, epsilon = 1e-15);
        let a = x.atan();
        assert_relative_eq!(a.coeff(3), -1.0 / 3.0, epsilon = 1e-15);
        let l = (Taylor::from_f64(1.0) + x).ln().unwrap();
        assert_relative_eq!(l.coeff(4), -0.25, epsilon = 1e-15);
        let sh = x.sinh();
        assert_relative_eq!(sh.coeff(3), 1.0 / 6.0, epsilon = 1e-15);
        let ta = x.tan().unwrap();
        assert_relative_eq!(ta.coeff(3), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn atan2_traces_the_unit_circle() {
        // (cos h, sin h) has angle h everywhere off the cut.
        for &h0 in &[0.3, 1.7, -2.5, 3.0] {
            let h = Taylor::variable(h0, 3);
            let ang = h.sin().atan2(h.cos()).unwrap();
            assert_relative_eq!(ang.coeff(0), h0, epsilon = 1e-14);
            assert_relative_eq!(ang.coeff(1), 1.0, epsilon = 1e-14);
            assert_relative_eq!(ang.coeff(2), 0.0, epsilon = 1e-14);
            assert_relative_eq!(ang.coeff(3), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn atan2_branch_cut() {
        let y = t(&[0.0, 1.0]);
        let x = t(&[-1.0, 0.0]);
        assert_eq!(y.atan2(x), Err(JetError::Atan2BranchCut));
        // a still point on the cut is fine
        let r = t(&[0.0, 0.0]).atan2(x).unwrap();
        assert_relative_eq!(r.coeff(0), std::f64::consts::PI);
    }

    #[test]
    fn integer_powers() {
        let x = t(&[2.0, 1.0, 0.0]);
        let p = x.powi(3).unwrap();
        // (2+h)^3 = 8 + 12h + 6h^2
        assert_eq!(p.coeffs(), &[8.0, 12.0, 6.0]);
        let n = x.powi(-1).unwrap();
        assert_relative_eq!(n.coeff(2), 1.0 / 8.0);
        assert_eq!(x.powi(0).unwrap().coeff(0), 1.0);
    }

    #[test]
    fn constant_lift() {
        let c = Taylor::constant(3.5, 3);
        assert_eq!(c.coeffs(), &[3.5, 0.0, 0.0, 0.0]);
        assert!(Taylor::<f64>::new(&[0.0; 6]).is_err());
    }
}
