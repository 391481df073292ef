//! Forward-mode automatic differentiation.
//!
//! [`Dual`] carries a value and a single directional derivative. Nesting
//! `Dual<Dual<f64>>` gives exact mixed second derivatives, which is all the
//! geometry layer needs: the metric is differentiated twice, everything else
//! at most once on top of quantities that already contain first derivatives.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Numeric carrier used by expression evaluation and the tensor pipeline.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;
    /// Real (innermost value) part.
    fn re(&self) -> f64;
    /// True when every derivative part vanishes.
    fn is_const(&self) -> bool;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn powf(self, k: f64) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
    /// `self ^ e`, using the real-power rule when the exponent is constant so
    /// that negative bases with integer exponents stay finite.
    fn pow(self, e: Self) -> Self {
        if e.is_const() {
            self.powf(e.re())
        } else {
            (e * self.ln()).exp()
        }
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn is_const(&self) -> bool {
        true
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powf(self, k: f64) -> Self {
        if k == k.trunc() && k.abs() < i32::MAX as f64 {
            self.powi(k as i32)
        } else {
            f64::powf(self, k)
        }
    }
}

/// Value plus one directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(v: T, d: T) -> Self {
        Self { v, d }
    }

    /// A variable seeded with unit derivative.
    pub fn var(v: T) -> Self {
        Self { v, d: T::one() }
    }

    fn chain(self, f: T, df: T) -> Self {
        Self { v: f, d: df * self.d }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d + o.d)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d - o.d)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Self::new(q, (self.d - q * o.d) / o.v)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::new(T::cst(v), T::zero())
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn is_const(&self) -> bool {
        self.v.is_const() && self.d.re() == 0.0 && self.d.is_const()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn tan(self) -> Self {
        let t = self.v.tan();
        self.chain(t, T::one() + t * t)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), T::one() / self.v)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, T::one() - t * t)
    }
    fn powf(self, k: f64) -> Self {
        if k == 0.0 {
            return Self::one();
        }
        self.chain(self.v.powf(k), self.v.powf(k - 1.0).scale(k))
    }
}

/// Seeds `x` as a dual vector with unit derivative along coordinate `dir`.
pub fn seed<T: Scalar>(x: &[T], dir: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| Dual::new(v, if k == dir { T::one() } else { T::zero() }))
        .collect()
}

/// Lifts constants into the dual carrier.
pub fn lift<T: Scalar>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&v| Dual::new(v, T::zero())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::var(3.0);
        let y = x * x / (x + Dual::cst(1.0));
        // d/dx x^2/(x+1) = (x^2 + 2x)/(x+1)^2
        assert!((y.d - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn nested_second_derivative() {
        // f = sin(x) * exp(x); f'' = 2 cos(x) exp(x)
        let x0 = 0.7;
        let x = Dual::new(Dual::var(x0), Dual::cst(1.0));
        let f = x.sin() * x.exp();
        assert!((f.d.d - 2.0 * x0.cos() * x0.exp()).abs() < 1e-14);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let x = Dual::var(-2.0);
        let y = x.pow(Dual::cst(3.0));
        assert_eq!(y.v, -8.0);
        assert_eq!(y.d, 12.0);
    }

    #[test]
    fn variable_exponent() {
        // d/dx 2^x = ln 2 * 2^x
        let x = Dual::var(1.5);
        let y = Dual::cst(2.0).pow(x);
        assert!((y.d - 2f64.ln() * 2f64.powf(1.5)).abs() < 1e-14);
    }
}
