//! Cutoff sweeps and log-log slope estimates.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::amplitude::{evaluate, AmplitudeError, AmplitudeRequest};
use crate::divdiff::DivDiffEngine;
use crate::powercount::{omega, omega_tilde, OmegaReport, OmegaTildeReport, PowerCountError};
use crate::real::Real;
use crate::ribbon::{profile, GraphError};

/// Default cap on summed terms at one cutoff.
pub const DEFAULT_TERM_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error(transparent)]
    PowerCount(#[from] PowerCountError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cutoff N = {n} needs {terms} terms, above the budget")]
    BudgetExceeded { n: u32, terms: u128 },
    #[error("cutoff list must be strictly increasing")]
    NotIncreasing,
    #[error("value at N = {n} is not positive")]
    NonPositiveValue { n: f64 },
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("family has no decay exponent p")]
    NoDecayExponent,
    #[error("evaluation at N = {n} failed: {message}")]
    PointFailed { n: u32, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub n: u32,
    pub value: f64,
    pub abs_amplitude: f64,
    pub wall_time_s: f64,
    pub term_count: u64,
    pub memo_hits: u64,
    pub memo_misses: u64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSeries {
    pub descriptor: String,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    /// `(N, |A|)` for points that evaluated successfully.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.error.is_none())
            .map(|p| (p.n as f64, p.abs_amplitude))
            .collect()
    }
}

/// Evaluate the request at every cutoff in `n_list`. The engine memo is shared,
/// so later cutoffs reuse earlier factors. Evaluation failures are recorded
/// per point.
pub fn sweep<R: Real>(
    engine: &DivDiffEngine<R>,
    template: &AmplitudeRequest<'_>,
    n_list: &[u32],
    budget: u64,
) -> Result<SweepSeries, ScalingError> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalingError::NotIncreasing);
    }
    let u = template.faces.running_indices().len() as u32;
    for &n in n_list {
        let width = (n as u128 + 1).saturating_sub(template.range_start as u128);
        let terms = width.pow(u);
        if terms > budget as u128 {
            return Err(ScalingError::BudgetExceeded { n, terms });
        }
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let start = Instant::now();
        let mut req = template.clone();
        req.cutoff = n;
        let point = match evaluate(engine, &req) {
            Ok(r) => {
                let v = r.value.to_f64();
                SweepPoint {
                    n,
                    value: v,
                    abs_amplitude: v.abs(),
                    wall_time_s: start.elapsed().as_secs_f64(),
                    term_count: r.term_count,
                    memo_hits: r.memo_hits,
                    memo_misses: r.memo_misses,
                    error: None,
                }
            }
            Err(e) => SweepPoint {
                n,
                value: f64::NAN,
                abs_amplitude: f64::NAN,
                wall_time_s: start.elapsed().as_secs_f64(),
                term_count: 0,
                memo_hits: 0,
                memo_misses: 0,
                error: Some(e.to_string()),
            },
        };
        points.push(point);
    }
    Ok(SweepSeries {
        descriptor: format!(
            "{} ext={:?} i_R={}",
            template.graph.name, template.external, template.range_start
        ),
        points,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SlopeFit {
    pub global_slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub local_slopes: Vec<f64>,
    pub extrapolated_slope: f64,
    pub window: usize,
}

/// Least squares on `(ln N, ln A)` over the last `window` points (all if `None`),
/// plus consecutive local slopes. The extrapolated slope applies an Aitken step
/// to the last three local slopes when they converge geometrically, and is
/// clamped to their range.
pub fn fit_slope(points: &[(f64, f64)], window: Option<usize>) -> Result<SlopeFit, ScalingError> {
    let w = window.unwrap_or(points.len()).min(points.len());
    if w < 3 {
        return Err(ScalingError::TooFewPoints(w));
    }
    let pts = &points[points.len() - w..];
    for &(n, a) in pts {
        if !(a > 0.0) || !(n > 0.0) {
            return Err(ScalingError::NonPositiveValue { n });
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let m = w as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = if w > 2 {
        (rss / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let local: Vec<f64> = (1..w)
        .map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]))
        .collect();
    let extrapolated = extrapolate(&local);
    Ok(SlopeFit {
        global_slope: slope,
        intercept,
        stderr,
        local_slopes: local,
        extrapolated_slope: extrapolated,
        window: w,
    })
}

fn extrapolate(local: &[f64]) -> f64 {
    let k = local.len();
    if k < 3 {
        return local[k - 1];
    }
    let (s1, s2, s3) = (local[k - 3], local[k - 2], local[k - 1]);
    let (d1, d2) = (s2 - s1, s3 - s2);
    let mut est = s3;
    if d1 != 0.0 {
        let q = d2 / d1;
        if q > 0.0 && q < 1.0 {
            est = s3 + d2 * q / (1.0 - q);
        }
    }
    let lo = s1.min(s2).min(s3);
    let hi = s1.max(s2).max(s3);
    est.clamp(lo, hi)
}

/// Growth exponent of `sum_{j_1..j_U <= N} prod j_i^{n_i/d}` when each factor
/// is summed on its own: a term with `1 + n/d <= 0` stays bounded.
pub fn coarse_power_sum_exponent(exponents: &[f64], d: f64) -> f64 {
    exponents.iter().map(|n| (1.0 + n / d).max(0.0)).sum()
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMode {
    TwoSided,
    UpperBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub predicted: f64,
    pub mode: VerdictMode,
    pub slope: f64,
    pub global_slope: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub sign_constant: bool,
    pub omega: OmegaReport,
    pub omega_tilde: Option<OmegaTildeReport>,
    pub fit: SlopeFit,
    pub series: SweepSeries,
}

/// Sweep, fit, and compare with the predicted order. With singular legs the
/// comparison is one-sided against the zero-mode bound.
pub fn verify<R: Real>(
    engine: &DivDiffEngine<R>,
    template: &AmplitudeRequest<'_>,
    n_list: &[u32],
    tolerance: f64,
    singular: &[usize],
) -> Result<VerdictReport, ScalingError> {
    let p = engine.family().decay().ok_or(ScalingError::NoDecayExponent)?;
    let d = engine.spectrum().d;
    let prof = profile(template.graph, template.faces)?;
    let om = omega(&prof, p, d);
    let ot = if singular.is_empty() {
        None
    } else {
        Some(omega_tilde(template.graph, template.faces, p, d, singular)?)
    };
    let series = sweep(engine, template, n_list, DEFAULT_TERM_BUDGET)?;
    if let Some(bad) = series.points.iter().find(|p| p.error.is_some()) {
        return Err(ScalingError::PointFailed {
            n: bad.n,
            message: bad.error.clone().unwrap_or_default(),
        });
    }
    let fit = fit_slope(&series.pairs(), None)?;
    let sign_constant = series
        .points
        .windows(2)
        .all(|w| w[0].value.signum() == w[1].value.signum());
    let slope = fit.extrapolated_slope;
    let (predicted, mode, pass) = match &ot {
        None => (om.omega, VerdictMode::TwoSided, (slope - om.omega).abs() <= tolerance),
        Some(t) => (
            t.omega_tilde,
            VerdictMode::UpperBound,
            slope <= t.omega_tilde + tolerance,
        ),
    };
    Ok(VerdictReport {
        predicted,
        mode,
        slope,
        global_slope: fit.global_slope,
        tolerance,
        pass,
        sign_constant,
        omega: om,
        omega_tilde: ot,
        fit,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (8..=13).map(|k| 2f64.powi(k)).collect()
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = grid().into_iter().map(|n| (n, 7.0 * n.powf(2.5))).collect();
        let f = fit_slope(&pts, None).unwrap();
        assert!((f.global_slope - 2.5).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
        assert!((f.extrapolated_slope - 2.5).abs() < 1e-12);
    }

    #[test]
    fn corrected_power_law() {
        let pts: Vec<(f64, f64)> = grid()
            .into_iter()
            .map(|n| (n, n * n * (1.0 + 10.0 / n)))
            .collect();
        let f = fit_slope(&pts, None).unwrap();
        assert!(f.local_slopes.windows(2).all(|w| w[1] > w[0]));
        assert!((f.extrapolated_slope - 2.0).abs() < 0.02);
    }

    #[test]
    fn constant_and_errors() {
        let pts: Vec<(f64, f64)> = grid().into_iter().map(|n| (n, 3.0)).collect();
        assert_eq!(fit_slope(&pts, None).unwrap().global_slope, 0.0);
        assert_eq!(
            fit_slope(&pts[..2], None).unwrap_err(),
            ScalingError::TooFewPoints(2)
        );
        let bad = vec![(1.0, 1.0), (2.0, 0.0), (4.0, 1.0)];
        assert!(matches!(
            fit_slope(&bad, None),
            Err(ScalingError::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn coarse_exponent_drops_convergent_sums() {
        // exponents 2p and -p with p = 2, d = 1
        assert_eq!(coarse_power_sum_exponent(&[4.0, -2.0], 1.0), 5.0);
    }
}
