//! Compensated (double-double) arithmetic for the ill-conditioned
//! alternating sums of the multi-symbol calculus: an unevaluated pair
//! hi + lo carrying roughly twice the working precision.

use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Dd<T: Scalar> {
    pub hi: T,
    pub lo: T,
}

#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

/// Exact product split via fused multiply-add.
#[inline]
fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl<T: Scalar> Dd<T> {
    pub fn zero() -> Self {
        Self {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    pub fn from_scalar(x: T) -> Self {
        Self {
            hi: x,
            lo: T::zero(),
        }
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    pub fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn mul_scalar(self, x: T) -> Self {
        self.mul(Self::from_scalar(x))
    }

    /// Integer power by repeated squaring; `x^0 = 1` including x = 0.
    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::from_scalar(T::one());
        }
        let mut base = self;
        let mut n = n as u32;
        let mut acc = Self::from_scalar(T::one());
        loop {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            base = base.mul(base);
        }
        acc
    }

    /// One Newton step on top of the scalar square root.
    pub fn sqrt(self) -> Self {
        if self.hi <= T::zero() {
            return Self::zero();
        }
        let y = self.hi.sqrt();
        let y_dd = Self::from_scalar(y);
        // y + (x - y^2) / (2 y)
        let r = self.sub(y_dd.mul(y_dd));
        y_dd.add(Self::from_scalar(r.value() / (y + y)))
    }
}

/// Compensated sum of a sequence of double-double terms.
pub(crate) struct DdSum<T: Scalar> {
    acc: Dd<T>,
}

impl<T: Scalar> DdSum<T> {
    pub fn new() -> Self {
        Self { acc: Dd::zero() }
    }

    pub fn add(&mut self, term: Dd<T>) {
        self.acc = self.acc.add(term);
    }

    pub fn sub(&mut self, term: Dd<T>) {
        self.acc = self.acc.sub(term);
    }

    pub fn total(&self) -> Dd<T> {
        self.acc
    }
}

/// Nearest integer when `x` is within `tol` of one.
pub(crate) fn near_integer<T: Scalar>(x: T, tol: f64) -> Option<i32> {
    let rounded = x.round();
    if (x - rounded).abs() < lit(tol) {
        rounded.to_i32()
    } else {
        None
    }
}
