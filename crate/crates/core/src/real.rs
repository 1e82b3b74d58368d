//! Numeric backends shared by the evaluators.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dd::Dd;

/// Field operations plus the handful of transcendental helpers the evaluators need.
pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn from_dd(x: Dd) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    /// `None` when the backend cannot represent the result exactly.
    fn sqrt(&self) -> Option<Self>;
    fn powf(&self, e: f64) -> Option<Self>;

    /// Default relative gap below which two nodes are merged into a confluent one.
    fn merge_eta() -> f64;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    fn is_exact() -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Float64,
    DoubleDouble,
    ExactRational,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Float64 => "float64",
            Backend::DoubleDouble => "double-double",
            Backend::ExactRational => "exact-rational",
        }
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "float64" | "f64" => Ok(Backend::Float64),
            "double-double" | "dd" | "double_double" => Ok(Backend::DoubleDouble),
            "exact-rational" | "exact" | "rational" | "exact_rational" => {
                Ok(Backend::ExactRational)
            }
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Real for f64 {
    const BACKEND: Backend = Backend::Float64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn from_dd(x: Dd) -> Self {
        x.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn sqrt(&self) -> Option<Self> {
        Some(f64::sqrt(*self))
    }
    fn powf(&self, e: f64) -> Option<Self> {
        Some(f64::powf(*self, e))
    }
    fn merge_eta() -> f64 {
        1e-6
    }
}

impl Real for Dd {
    const BACKEND: Backend = Backend::DoubleDouble;

    fn zero() -> Self {
        Dd::ZERO
    }
    fn one() -> Self {
        Dd::ONE
    }
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    fn from_i64(x: i64) -> Self {
        // exact for |x| < 2^106
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Dd::from_sum(hi, lo)
    }
    fn from_dd(x: Dd) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        Dd::to_f64(*self)
    }
    fn is_zero(&self) -> bool {
        Dd::is_zero(*self)
    }
    fn abs(&self) -> Self {
        Dd::abs(*self)
    }
    fn powi(&self, n: i32) -> Self {
        Dd::powi(*self, n)
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Dd::sqrt(*self))
    }
    fn powf(&self, e: f64) -> Option<Self> {
        Some(Dd::powf(*self, e))
    }
    fn merge_eta() -> f64 {
        1e-12
    }
}

impl Real for BigRational {
    const BACKEND: Backend = Backend::ExactRational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn from_dd(x: Dd) -> Self {
        Self::from_f64(x.hi) + Self::from_f64(x.lo)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn powi(&self, n: i32) -> Self {
        num_traits::Pow::pow(self, n)
    }
    fn sqrt(&self) -> Option<Self> {
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &n * &n == *self.numer() && &d * &d == *self.denom() {
            Some(BigRational::new(n, d))
        } else {
            None
        }
    }
    fn powf(&self, e: f64) -> Option<Self> {
        if e == e.trunc() && e.abs() < 1e6 {
            Some(Real::powi(self, e as i32))
        } else if e * 2.0 == (e * 2.0).trunc() {
            Real::sqrt(self).map(|s| Real::powi(&s, (2.0 * e) as i32))
        } else {
            None
        }
    }
    fn merge_eta() -> f64 {
        0.0
    }
    fn is_exact() -> bool {
        true
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Debug)]
pub struct CompensatedSum<R: Real> {
    sum: R,
    comp: R,
}

impl<R: Real> Default for CompensatedSum<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: R::zero(),
            comp: R::zero(),
        }
    }

    pub fn add(&mut self, x: R) {
        if R::is_exact() {
            self.sum = self.sum.clone() + x;
            return;
        }
        let t = self.sum.clone() + x.clone();
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp.clone() + ((self.sum.clone() - t.clone()) + x);
        } else {
            self.comp = self.comp.clone() + ((x - t.clone()) + self.sum.clone());
        }
        self.sum = t;
    }

    pub fn value(&self) -> R {
        self.sum.clone() + self.comp.clone()
    }
}

/// Relative gap `|a-b| / max(|a|,|b|)`, zero when both vanish.
pub fn rel_gap<R: Real>(a: &R, b: &R) -> f64 {
    let diff = (a.clone() - b.clone()).abs();
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    if scale.is_zero() {
        return 0.0;
    }
    (diff / scale).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_names_roundtrip() {
        for b in [Backend::Float64, Backend::DoubleDouble, Backend::ExactRational] {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("quad".parse::<Backend>().is_err());
    }

    #[test]
    fn rational_roots_only_when_exact() {
        let q = BigRational::new(BigInt::from(9), BigInt::from(4));
        assert_eq!(Real::sqrt(&q), Some(BigRational::new(3.into(), 2.into())));
        assert!(Real::sqrt(&BigRational::from_i64(2)).is_none());
        assert_eq!(
            Real::powf(&q, 1.5),
            Some(BigRational::new(27.into(), 8.into()))
        );
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::<f64>::new();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn dd_from_i64_is_exact() {
        let big = (1i64 << 60) + 1;
        let x = <Dd as Real>::from_i64(big);
        assert_eq!(x.hi as i128 + x.lo as i128, big as i128);
    }
}
