//! Double-double arithmetic (~106-bit significand) built from pairs of f64.
//!
//! The error-free transformations follow Dekker and Knuth; products use the
//! hardware FMA. This is the extended-precision mode used wherever binary64
//! cannot resolve a quantity (deep base approximants, decay iterations whose
//! norms fall below the f64 noise floor).

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b| or a == 0
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Copy, Clone, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Machine epsilon of the format, 2^-104.
    pub const EPS: f64 = 4.93038065763132e-32;

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_i64(x: i64) -> Self {
        // i64 may exceed 2^53; split exactly.
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Dd::new(hi, lo)
    }

    /// Exact quotient of two f64 values, to double-double accuracy.
    pub fn from_ratio(num: f64, den: f64) -> Self {
        Dd::from_f64(num) / Dd::from_f64(den)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    pub fn floor(self) -> Dd {
        let fhi = self.hi.floor();
        if fhi == self.hi {
            let flo = self.lo.floor();
            Dd::new(fhi, flo)
        } else {
            Dd { hi: fhi, lo: 0.0 }
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.is_zero() {
            return Dd::ZERO;
        }
        // One Newton step on a double seed is enough for 106 bits.
        let y = self.hi.sqrt();
        let yd = Dd::from_f64(y);
        (yd + self / yd) * Dd::from_f64(0.5)
    }

    pub fn powi(self, mut n: u32) -> Dd {
        let mut base = self;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Natural log via f64 with one Newton correction: ln(x) ~ l + x*e^-l - 1.
    pub fn ln(self) -> Dd {
        let l = self.hi.ln();
        let el = Dd::from_f64(l.exp()); // f64 exp seed; correction below
        let r = self / el - Dd::ONE;
        Dd::from_f64(l) + r
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

/// Complex number with double-double components.
#[derive(Copy, Clone, Debug, Default)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: DdComplex = DdComplex { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn new(re: Dd, im: Dd) -> Self {
        DdComplex { re, im }
    }

    #[inline]
    pub fn from_f64(re: f64, im: f64) -> Self {
        DdComplex { re: Dd::from_f64(re), im: Dd::from_f64(im) }
    }

    #[inline]
    pub fn conj(self) -> Self {
        DdComplex { re: self.re, im: -self.im }
    }

    #[inline]
    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> Dd {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(self, s: Dd) -> Self {
        DdComplex { re: self.re * s, im: self.im * s }
    }

    pub fn inv(self) -> Self {
        let d = self.norm_sqr();
        DdComplex { re: self.re / d, im: -(self.im / d) }
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn powi(self, mut n: u32) -> DdComplex {
        let mut base = self;
        let mut acc = DdComplex::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

impl Neg for DdComplex {
    type Output = DdComplex;
    fn neg(self) -> DdComplex {
        DdComplex { re: -self.re, im: -self.im }
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, rhs: DdComplex) -> DdComplex {
        DdComplex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    fn sub(self, rhs: DdComplex) -> DdComplex {
        DdComplex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, rhs: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Div for DdComplex {
    type Output = DdComplex;
    fn div(self, rhs: DdComplex) -> DdComplex {
        self * rhs.inv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_small_terms() {
        let one = Dd::ONE;
        let tiny = Dd::from_f64(1e-25);
        let s = one + tiny - one;
        assert!((s.to_f64() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn ratio_of_integers_is_exact() {
        // 1/3 in double-double: residual 3*(1/3) - 1 below 2^-100
        let third = Dd::from_ratio(1.0, 3.0);
        let r = third * Dd::from_f64(3.0) - Dd::ONE;
        assert!(r.to_f64().abs() < 1e-30);
    }

    #[test]
    fn floor_handles_exact_integers() {
        let x = Dd::new(3.0, -1e-20);
        assert_eq!(x.floor().to_f64(), 2.0);
        let y = Dd::new(3.0, 1e-20);
        assert_eq!(y.floor().to_f64(), 3.0);
        let z = Dd::from_f64(3.0);
        assert_eq!(z.floor().to_f64(), 3.0);
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Dd::from_f64(2.0);
        let r = x.sqrt();
        let back = r * r - x;
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn complex_division_roundtrip() {
        let a = DdComplex::from_f64(1.3, -0.7);
        let b = DdComplex::from_f64(-0.2, 2.1);
        let q = a / b;
        let r = q * b - a;
        assert!(r.abs().to_f64() < 1e-29);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = Dd::from_ratio(10.0, 7.0);
        let mut acc = Dd::ONE;
        for _ in 0..13 {
            acc = acc * x;
        }
        let d = (x.powi(13) - acc).to_f64().abs();
        assert!(d < 1e-28);
    }
}
