//! Eigenvalue sequences and smooth test functions with exact derivatives.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

/// Highest derivative order any family will produce.
pub const MAX_DERIVATIVE_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("index 0 requested but the spectrum has no singular mode")]
    IndexZeroWithoutSingularMode,
    #[error("family is singular at x = {0}")]
    SingularPoint(f64),
    #[error("derivative order {requested} exceeds the maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("family cannot be evaluated exactly in this backend")]
    UnsupportedBackend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumModel {
    Power,
    SignedPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub model: SpectrumModel,
    pub d: f64,
    pub c: f64,
    pub epsilon: f64,
    /// Eigenvalue at index 0 when a singular mode is configured (before the shift).
    pub singular: Option<f64>,
}

impl Spectrum {
    pub fn power(d: f64) -> Self {
        Spectrum {
            model: SpectrumModel::Power,
            d,
            c: 1.0,
            epsilon: 0.0,
            singular: None,
        }
    }

    pub fn signed_power(d: f64) -> Self {
        Spectrum {
            model: SpectrumModel::SignedPower,
            ..Spectrum::power(d)
        }
    }

    pub fn with_scale(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn shifted(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Adds the singular mode at index 0 with eigenvalue `value`.
    pub fn with_singular_mode(mut self, value: f64) -> Self {
        self.singular = Some(value);
        self
    }

    fn unshifted<R: Real>(&self, k: u32) -> Result<R, SpectraError> {
        if k == 0 {
            return self
                .singular
                .map(R::from_f64)
                .ok_or(SpectraError::IndexZeroWithoutSingularMode);
        }
        let (sign, base) = match self.model {
            SpectrumModel::Power => (1.0, k),
            SpectrumModel::SignedPower => (if k % 2 == 0 { 1.0 } else { -1.0 }, k.div_ceil(2)),
        };
        let mag = if self.d == 1.0 {
            R::from_i64(base as i64)
        } else {
            let e = 1.0 / self.d;
            R::from_i64(base as i64)
                .powf(e)
                .unwrap_or_else(|| R::from_f64((base as f64).powf(e)))
        };
        let scaled = if self.c == 1.0 {
            mag
        } else {
            mag * R::from_f64(self.c)
        };
        Ok(if sign < 0.0 { -scaled } else { scaled })
    }

    /// `lambda_k` in the given backend; the shift is added exactly in that backend.
    pub fn eigenvalue_in<R: Real>(&self, k: u32) -> Result<R, SpectraError> {
        let base = self.unshifted::<R>(k)?;
        Ok(if self.epsilon == 0.0 {
            base
        } else {
            base + R::from_f64(self.epsilon)
        })
    }

    pub fn eigenvalue(&self, k: u32) -> Result<f64, SpectraError> {
        self.eigenvalue_in::<f64>(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SmoothFamily {
    /// `x^-p`.
    InversePower { p: u32 },
    /// `(1 + x^2)^(-p/2)`.
    RegularizedPower { p: f64 },
    /// `sum_i coeffs[i] x^i`.
    Polynomial { coeffs: Vec<f64> },
    /// `base(x - epsilon)`.
    Shifted { base: Box<SmoothFamily>, epsilon: f64 },
}

impl SmoothFamily {
    pub fn shifted(self, epsilon: f64) -> Self {
        SmoothFamily::Shifted {
            base: Box::new(self),
            epsilon,
        }
    }

    pub fn derivative_order_max(&self) -> usize {
        MAX_DERIVATIVE_ORDER
    }

    /// Decay exponent `p` where meaningful, i.e. `f'` is of precise order `-p-1`.
    pub fn decay(&self) -> Option<f64> {
        match self {
            SmoothFamily::InversePower { p } => Some(*p as f64),
            SmoothFamily::RegularizedPower { p } => Some(*p),
            SmoothFamily::Polynomial { .. } => None,
            SmoothFamily::Shifted { base, .. } => base.decay(),
        }
    }

    /// Distance from a real point to the nearest singularity in the complex plane.
    pub fn singularity_distance(&self, x: f64) -> f64 {
        match self {
            SmoothFamily::InversePower { .. } => x.abs(),
            SmoothFamily::RegularizedPower { .. } => (1.0 + x * x).sqrt(),
            SmoothFamily::Polynomial { .. } => f64::INFINITY,
            SmoothFamily::Shifted { base, epsilon } => base.singularity_distance(x - epsilon),
        }
    }

    /// `f(x), f'(x), ..., f^(kmax)(x)`.
    pub fn derivatives<R: Real>(&self, x: &R, kmax: usize) -> Result<Vec<R>, SpectraError> {
        if kmax > MAX_DERIVATIVE_ORDER {
            return Err(SpectraError::OrderTooHigh {
                requested: kmax,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        match self {
            SmoothFamily::InversePower { p } => {
                if x.is_zero() {
                    return Err(SpectraError::SingularPoint(0.0));
                }
                let inv = x.recip();
                let mut out = Vec::with_capacity(kmax + 1);
                let mut cur = inv.powi(*p as i32);
                out.push(cur.clone());
                for k in 0..kmax {
                    // f^(k+1) = -(p+k) f^(k) / x
                    cur = -(cur * R::from_i64((*p as usize + k) as i64)) * inv.clone();
                    out.push(cur.clone());
                }
                Ok(out)
            }
            SmoothFamily::RegularizedPower { p } => {
                let q = R::one() + x.clone() * x.clone();
                let qinv = q.recip();
                let f0 = if *p == p.trunc() && (*p as i64) % 2 == 0 {
                    qinv.powi((*p / 2.0) as i32)
                } else {
                    q.powf(-*p / 2.0).ok_or(SpectraError::UnsupportedBackend)?
                };
                let pr = R::from_f64(*p);
                let mut out = Vec::with_capacity(kmax + 1);
                out.push(f0.clone());
                if kmax >= 1 {
                    out.push(-(pr.clone() * x.clone() * f0) * qinv.clone());
                }
                for k in 1..kmax {
                    let a = (R::from_i64(2 * k as i64) + pr.clone()) * x.clone() * out[k].clone();
                    let b = R::from_i64(k as i64)
                        * (R::from_i64(k as i64 - 1) + pr.clone())
                        * out[k - 1].clone();
                    out.push(-(a + b) * qinv.clone());
                }
                Ok(out)
            }
            SmoothFamily::Polynomial { coeffs } => {
                let mut c: Vec<R> = coeffs.iter().map(|&a| R::from_f64(a)).collect();
                let mut out = Vec::with_capacity(kmax + 1);
                for _ in 0..=kmax {
                    let mut acc = R::zero();
                    for a in c.iter().rev() {
                        acc = acc * x.clone() + a.clone();
                    }
                    out.push(acc);
                    c = c
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, a)| a.clone() * R::from_i64(i as i64))
                        .collect();
                }
                Ok(out)
            }
            SmoothFamily::Shifted { base, epsilon } => {
                base.derivatives(&(x.clone() - R::from_f64(*epsilon)), kmax)
            }
        }
    }

    pub fn eval_derivative<R: Real>(&self, k: usize, x: &R) -> Result<R, SpectraError> {
        Ok(self.derivatives(x, k)?.pop().expect("non-empty"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub order: usize,
    pub c1: f64,
    pub c2: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub flagged: bool,
}

/// Empirical constants of `|f^(k)(x)| * |x|^(p+k)` over `samples`.
/// Rows whose max/min spread exceeds `spread_bound` (or degenerate) are flagged.
pub fn precise_order_probe(
    f: &SmoothFamily,
    p: f64,
    k_max: usize,
    samples: &[f64],
    spread_bound: f64,
) -> Result<ProbeReport, SpectraError> {
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut lo = vec![f64::INFINITY; k_max + 1];
    let mut hi = vec![0.0f64; k_max + 1];
    for &x in samples {
        let ds = f.derivatives(&x, k_max)?;
        for (k, v) in ds.iter().enumerate() {
            let r = v.abs() * x.abs().powf(p + k as f64);
            lo[k] = lo[k].min(r);
            hi[k] = hi[k].max(r);
        }
    }
    let mut any = false;
    for k in 0..=k_max {
        let flagged =
            !(lo[k] > 0.0) || !hi[k].is_finite() || hi[k] / lo[k] > spread_bound;
        any |= flagged;
        rows.push(ProbeRow {
            order: k,
            c1: lo[k],
            c2: hi[k],
            flagged,
        });
    }
    Ok(ProbeReport { rows, flagged: any })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(Spectrum::power(1.0).eigenvalue(7).unwrap(), 7.0);
        assert_eq!(Spectrum::power(2.0).eigenvalue(9).unwrap(), 3.0);
        let s = Spectrum::signed_power(1.0);
        let v: Vec<f64> = (1..=4).map(|k| s.eigenvalue(k).unwrap()).collect();
        assert_eq!(v, vec![-1.0, 1.0, -2.0, 2.0]);
        assert_eq!(
            Spectrum::power(1.0).eigenvalue(0),
            Err(SpectraError::IndexZeroWithoutSingularMode)
        );
        let sing = Spectrum::power(1.0).with_singular_mode(0.0);
        assert_eq!(sing.eigenvalue(0).unwrap(), 0.0);
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        assert_eq!(f.eval_derivative(1, &0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn shift_is_exact_in_dd() {
        let s = Spectrum::power(2.0);
        let t = s.clone().shifted(0.3);
        for k in 1..50 {
            let a: Dd = s.eigenvalue_in(k).unwrap();
            let b: Dd = t.eigenvalue_in(k).unwrap();
            assert_eq!(b, a + Dd::from_f64(0.3));
        }
    }

    #[test]
    fn derivative_examples() {
        let ip = SmoothFamily::InversePower { p: 2 };
        assert_eq!(ip.eval_derivative(2, &1.0f64).unwrap(), 6.0);
        assert_eq!(
            ip.eval_derivative(0, &0.0f64),
            Err(SpectraError::SingularPoint(0.0))
        );
        let cube = SmoothFamily::Polynomial {
            coeffs: vec![0.0, 0.0, 0.0, 1.0],
        };
        assert_eq!(cube.eval_derivative(1, &2.0f64).unwrap(), 12.0);
        assert!(matches!(
            cube.eval_derivative(MAX_DERIVATIVE_ORDER + 1, &2.0f64),
            Err(SpectraError::OrderTooHigh { .. })
        ));
    }

    #[test]
    fn regularized_closed_forms() {
        let f = SmoothFamily::RegularizedPower { p: 2.0 };
        for &x in &[-3.0f64, -0.5, 0.0, 0.7, 4.0] {
            let d = f.derivatives(&x, 2).unwrap();
            let q = 1.0 + x * x;
            assert!((d[0] - 1.0 / q).abs() < 1e-15);
            assert!((d[1] + 2.0 * x / (q * q)).abs() < 1e-15);
            assert!((d[2] - (6.0 * x * x - 2.0) / (q * q * q)).abs() < 1e-14);
        }
    }

    #[test]
    fn probe_examples() {
        let xs: Vec<f64> = (0..50).map(|i| 10.0 * 100f64.powf(i as f64 / 49.0)).collect();
        let ip = precise_order_probe(&SmoothFamily::InversePower { p: 2 }, 2.0, 0, &xs, 10.0).unwrap();
        assert!((ip.rows[0].c1 - 1.0).abs() < 1e-12 && (ip.rows[0].c2 - 1.0).abs() < 1e-12);
        let rp = precise_order_probe(&SmoothFamily::RegularizedPower { p: 2.0 }, 2.0, 1, &xs, 10.0)
            .unwrap();
        assert!(rp.rows[1].c1 >= 1.9 && rp.rows[1].c2 <= 2.0);
        let poly = SmoothFamily::Polynomial {
            coeffs: vec![1.0, 1.0],
        };
        assert!(precise_order_probe(&poly, 2.0, 1, &xs, 10.0).unwrap().flagged);
    }
}
