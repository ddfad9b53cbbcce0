//! Scalar abstraction used by the tree evaluator.
//!
//! The evaluator is generic over [`Scalar`] so the same walk produces plain
//! values (`f64`), first derivatives (`Dual<f64>`) and, where a directional
//! derivative of a gradient is needed, nested duals (`Dual<Dual<f64>>`).

use core::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Real (value) part, used for domain checks and branch decisions.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn abs(self) -> Self;
    fn sign(self) -> Self;
    fn pow(self, e: Self) -> Self;
}

/// Three-way sign with `sign(0) = 0`.
#[inline]
pub(crate) fn sign3(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn int_exponent(e: f64) -> Option<i32> {
    if e == libm::trunc(e) && e.abs() <= 64.0 {
        Some(e as i32)
    } else {
        None
    }
}

fn powi(mut b: f64, n: i32) -> f64 {
    let neg = n < 0;
    let mut k = n.unsigned_abs();
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    if neg {
        1.0 / acc
    } else {
        acc
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        libm::tan(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    #[inline]
    fn exp(self) -> Self {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        libm::log(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn atan(self) -> Self {
        libm::atan(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sign(self) -> Self {
        sign3(self)
    }
    #[inline]
    fn pow(self, e: Self) -> Self {
        match int_exponent(e) {
            Some(n) => powi(self, n),
            None => libm::pow(self, e),
        }
    }
}

/// Forward-mode dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    #[inline]
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }
    #[inline]
    pub fn constant(re: S) -> Self {
        Dual { re, eps: S::cst(0.0) }
    }
    #[inline]
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::cst(1.0) }
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::constant(S::cst(v))
    }
    #[inline]
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.re.cos() * self.eps)
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.re.sin() * self.eps))
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual::new(t, (S::cst(1.0) + t * t) * self.eps)
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        Dual::new(t, (S::cst(1.0) - t * t) * self.eps)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, e * self.eps)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (S::cst(2.0) * r))
    }
    fn atan(self) -> Self {
        Dual::new(self.re.atan(), self.eps / (S::cst(1.0) + self.re * self.re))
    }
    fn abs(self) -> Self {
        // right-sided slope at the kink
        let s = if self.re.re() < 0.0 { -1.0 } else { 1.0 };
        Dual::new(self.re.abs(), S::cst(s) * self.eps)
    }
    fn sign(self) -> Self {
        Dual::new(self.re.sign(), S::cst(0.0))
    }
    fn pow(self, e: Self) -> Self {
        let v = self.re.pow(e.re);
        // d(a^b) = b a^(b-1) da + a^b ln(a) db
        let mut d = e.re * self.re.pow(e.re - S::cst(1.0)) * self.eps;
        if self.re.re() > 0.0 {
            d = d + v * self.re.ln() * e.eps;
        }
        Dual::new(v, d)
    }
}
