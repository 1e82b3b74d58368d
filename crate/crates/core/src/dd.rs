//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`,
//! giving roughly 32 significant decimal digits. The error-free transformations
//! follow the classic Dekker / Bailey constructions and rely on a fused
//! multiply-add for the product error term.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: 6.931_471_805_599_453e-1,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Unit roundoff of the double-double format.
pub const DD_EPS: f64 = 4.93038065763132e-32;

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let e = b - (s - a);
    Dd { hi: s, lo: e }
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: e }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let e = a.mul_add(b, -p);
    Dd { hi: p, lo: e }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        two_sum(a, b)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        let p = two_prod(self.hi, self.hi);
        let lo = p.lo + 2.0 * self.hi * self.lo + self.lo * self.lo;
        quick_two_sum(p.hi, lo)
    }

    #[inline]
    fn mul_pwr2(self, b: f64) -> Self {
        Dd {
            hi: self.hi * b,
            lo: self.lo * b,
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::new(f64::NAN, f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let corr = (self - Dd::from_f64(ax).sqr()).hi * (x * 0.5);
        two_sum(ax, corr)
    }

    pub fn powi(self, mut n: i32) -> Self {
        if n == 0 {
            return Dd::ONE;
        }
        let invert = n < 0;
        if invert {
            n = -n;
        }
        let mut base = self;
        let mut acc = Dd::ONE;
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr();
            }
        }
        if invert {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY, 0.0);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        // exp(a) = 2^m * exp(r)^512 with |r| <= ln2/1024
        let m = (self.hi / LN2.hi + 0.5).floor();
        let r = (self - LN2 * Dd::from_f64(m)).mul_pwr2(1.0 / 512.0);

        // Taylor series of exp(r) - 1
        let mut s = r;
        let mut term = r;
        let thresh = DD_EPS * 1e-3;
        for k in 2..40 {
            term = term * r / Dd::from_f64(k as f64);
            s += term;
            if term.hi.abs() <= thresh * s.hi.abs() {
                break;
            }
        }
        // (1+s)^2 - 1 = 2s + s^2, nine times
        for _ in 0..9 {
            s = s.mul_pwr2(2.0) + s.sqr();
        }
        s += Dd::ONE;
        let scale = 2f64.powi(m as i32);
        s.mul_pwr2(scale)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::new(f64::NAN, f64::NAN);
        }
        if self.hi == 1.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // One Newton step on exp(x) = a doubles the ~16 digits of the f64 log.
        let x = Dd::from_f64(self.hi.ln());
        x + self * (-x).exp() - Dd::ONE
    }

    pub fn powf(self, e: f64) -> Self {
        if e == e.trunc() && e.abs() < i32::MAX as f64 {
            return self.powi(e as i32);
        }
        (self.ln() * Dd::from_f64(e)).exp()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        let lo = p.lo + (self.hi * b.lo + self.lo * b.hi);
        quick_two_sum(p.hi, lo)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + Dd::from_f64(q3)
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    #[inline]
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Dd, b: Dd) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    #[test]
    fn arithmetic_beats_f64() {
        let third = Dd::ONE / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0);
        assert!((back - Dd::ONE).abs().hi < 1e-31);
        // 1 + 1e-20 survives in dd but not in f64
        let x = Dd::ONE + Dd::from_f64(1e-20);
        assert_eq!((x - Dd::ONE).to_f64(), 1e-20);
    }

    #[test]
    fn sqrt_squares_back() {
        for &v in &[2.0, 3.0, 1e-10, 12345.678, 1e30] {
            let a = Dd::from_f64(v);
            let s = a.sqrt();
            assert!(rel(s.sqr(), a) < 1e-30, "sqrt({v})");
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &v in &[0.5, 1.0, 2.0, 10.0, 1e-5, 123.456, 1e20] {
            let a = Dd::from_f64(v);
            assert!(rel(a.ln().exp(), a) < 1e-29, "exp(ln({v}))");
        }
        // e^1 against a reference value
        let e = Dd::ONE.exp();
        let e_ref = Dd::new(2.718281828459045, 1.4456468917292502e-16);
        assert!(rel(e, e_ref) < 1e-30);
    }

    #[test]
    fn powf_matches_powi_and_roots() {
        let x = Dd::from_f64(7.0);
        assert!(rel(x.powf(3.0), Dd::from_f64(343.0)) < 1e-31);
        assert!(rel(x.powf(-2.0), Dd::ONE / Dd::from_f64(49.0)) < 1e-31);
        assert!(rel(x.powf(0.5), x.sqrt()) < 1e-29);
        let y = Dd::from_f64(5.0).powf(1.5);
        assert!(rel(y, Dd::from_f64(5.0) * Dd::from_f64(5.0).sqrt()) < 1e-29);
    }

    #[test]
    fn ordering_uses_low_word() {
        let a = Dd::new(1.0, 1e-20);
        let b = Dd::new(1.0, -1e-20);
        assert!(a > b);
    }
}
