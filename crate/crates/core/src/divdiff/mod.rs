//! Divided differences of `f'` and their weighted variant.
//!
//! The evaluator is a confluent Newton table: nodes are sorted, nodes closer
//! than a relative gap `eta` are merged at their mean, and fully repeated
//! blocks are filled from derivatives of `f'`.

mod oracles;

pub use oracles::{
    divdiff_integral, divdiff_oracle_distinct, divdiff_spline_integral, gauss_legendre,
    gn_identity_check, hp_oracle,
};

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use dashmap::DashMap;
use rustc_hash::FxBuildHasher;
use smallvec::SmallVec;
use thiserror::Error;

use crate::real::Real;
use crate::spectra::{SmoothFamily, SpectraError, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivDiffError {
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("a node of multiplicity {multiplicity} needs derivative order {needed} (max {max})")]
    DerivativeBudgetExceeded {
        multiplicity: usize,
        needed: usize,
        max: usize,
    },
    #[error("duplicate point {0}")]
    DuplicatePoint(f64),
    #[error("zero point where a nonzero one is required")]
    ZeroPoint,
    #[error("no points given")]
    EmptyPoints,
    #[error("quadrature would need {0} function evaluations")]
    QuadratureBudgetExceeded(u64),
}

/// Sort and merge nodes whose relative gap is below `eta`; returns (node, multiplicity).
pub fn merge_nodes<R: Real>(points: &[R], eta: f64) -> Vec<(R, usize)> {
    let mut pts: Vec<R> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut groups: Vec<(Vec<R>, usize)> = Vec::new();
    for x in pts {
        if let Some((members, count)) = groups.last_mut() {
            let prev = members.last().expect("non-empty group");
            if close(prev, &x, eta) {
                members.push(x);
                *count += 1;
                continue;
            }
        }
        groups.push((vec![x], 1));
    }
    groups
        .into_iter()
        .map(|(members, count)| {
            if count == 1 || members.iter().all(|m| *m == members[0]) {
                return (members[0].clone(), count);
            }
            let mut s = R::zero();
            for m in members {
                s = s + m;
            }
            (s / R::from_i64(count as i64), count)
        })
        .collect()
}

fn close<R: Real>(a: &R, b: &R, eta: f64) -> bool {
    if a == b {
        return true;
    }
    if eta == 0.0 {
        return false;
    }
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    (a.clone() - b.clone()).abs() < scale * R::from_f64(eta)
}

/// Newton table over `groups` (equal nodes contiguous), for `f'`.
fn confluent_table<R: Real>(family: &SmoothFamily, groups: &[(R, usize)]) -> Result<R, DivDiffError> {
    let m: usize = groups.iter().map(|g| g.1).sum::<usize>() - 1;
    let max = family.derivative_order_max();
    let mut z: Vec<R> = Vec::with_capacity(m + 1);
    let mut grp: Vec<usize> = Vec::with_capacity(m + 1);
    // taylor[g][k] = f'^(k)(x_g) / k!
    let mut taylor: Vec<Vec<R>> = Vec::with_capacity(groups.len());
    for (gi, (x, mult)) in groups.iter().enumerate() {
        if *mult > max {
            return Err(DivDiffError::DerivativeBudgetExceeded {
                multiplicity: *mult,
                needed: *mult,
                max,
            });
        }
        let ds = family.derivatives(x, *mult)?;
        let mut fact = R::one();
        let mut row = Vec::with_capacity(*mult);
        for k in 0..*mult {
            if k > 0 {
                fact = fact * R::from_i64(k as i64);
            }
            row.push(ds[k + 1].clone() / fact.clone());
        }
        taylor.push(row);
        for _ in 0..*mult {
            z.push(x.clone());
            grp.push(gi);
        }
    }
    let mut c: Vec<R> = grp.iter().map(|&g| taylor[g][0].clone()).collect();
    for k in 1..=m {
        for j in (k..=m).rev() {
            if grp[j] == grp[j - k] {
                c[j] = taylor[grp[j]][k].clone();
            } else {
                c[j] = (c[j].clone() - c[j - 1].clone()) / (z[j].clone() - z[j - k].clone());
            }
        }
    }
    Ok(c[m].clone())
}

/// `f'[x_0, ..., x_n]` with the given merge threshold.
pub fn divided_difference_with<R: Real>(
    family: &SmoothFamily,
    points: &[R],
    eta: f64,
) -> Result<R, DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    confluent_table(family, &merge_nodes(points, eta))
}

/// Same table but without sorting: equal nodes are gathered at their first
/// occurrence and groups keep the given order.
pub fn divided_difference_in_order<R: Real>(
    family: &SmoothFamily,
    points: &[R],
) -> Result<R, DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    let mut groups: Vec<(R, usize)> = Vec::new();
    for x in points {
        match groups.iter_mut().find(|g| g.0 == *x) {
            Some(g) => g.1 += 1,
            None => groups.push((x.clone(), 1)),
        }
    }
    confluent_table(family, &groups)
}

/// `(-1)^n x_1 ... x_n f'[x_1, ..., x_n]`.
pub fn weighted_with<R: Real>(
    family: &SmoothFamily,
    points: &[R],
    eta: f64,
) -> Result<R, DivDiffError> {
    let dd = divided_difference_with(family, points, eta)?;
    let mut prod = R::one();
    for x in points {
        prod = prod * x.clone();
    }
    let v = prod * dd;
    Ok(if points.len() % 2 == 1 { -v } else { v })
}

type MemoKey = (u8, SmallVec<[u32; 8]>);

const KIND_PLAIN: u8 = 0;
const KIND_WEIGHTED: u8 = 1;

/// Evaluator bound to one family, spectrum and backend, with a concurrent memo
/// keyed by sorted eigenvalue-index tuples.
pub struct DivDiffEngine<R: Real> {
    family: SmoothFamily,
    spectrum: Spectrum,
    eta: f64,
    memo: DashMap<MemoKey, R, FxBuildHasher>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<R: Real> DivDiffEngine<R> {
    pub fn new(family: SmoothFamily, spectrum: Spectrum) -> Self {
        DivDiffEngine {
            family,
            spectrum,
            eta: R::merge_eta(),
            memo: DashMap::with_hasher(FxBuildHasher),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn family(&self) -> &SmoothFamily {
        &self.family
    }
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eigenvalue(&self, k: u32) -> Result<R, DivDiffError> {
        Ok(self.spectrum.eigenvalue_in(k)?)
    }

    pub fn divided_difference(&self, points: &[R]) -> Result<R, DivDiffError> {
        divided_difference_with(&self.family, points, self.eta)
    }

    pub fn weighted_divdiff(&self, points: &[R]) -> Result<R, DivDiffError> {
        weighted_with(&self.family, points, self.eta)
    }

    fn lookup(&self, kind: u8, indices: &[u32]) -> Result<R, DivDiffError> {
        let mut key: SmallVec<[u32; 8]> = SmallVec::from_slice(indices);
        key.sort_unstable();
        let key = (kind, key);
        if let Some(v) = self.memo.get(&key) {
            self.hits.fetch_add(1, AtomicOrdering::Relaxed);
            return Ok(v.clone());
        }
        self.misses.fetch_add(1, AtomicOrdering::Relaxed);
        let pts = key
            .1
            .iter()
            .map(|&k| self.eigenvalue(k))
            .collect::<Result<Vec<R>, _>>()?;
        let v = match kind {
            KIND_PLAIN => self.divided_difference(&pts)?,
            _ => self.weighted_divdiff(&pts)?,
        };
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// `f'[lambda_{k_0}, ..., lambda_{k_n}]`, memoized.
    pub fn dd_at_indices(&self, indices: &[u32]) -> Result<R, DivDiffError> {
        self.lookup(KIND_PLAIN, indices)
    }

    /// `f'{lambda_{k_1}, ..., lambda_{k_n}}`, memoized.
    pub fn weighted_at_indices(&self, indices: &[u32]) -> Result<R, DivDiffError> {
        self.lookup(KIND_WEIGHTED, indices)
    }

    /// (hits, misses) since construction or the last reset.
    pub fn memo_stats(&self) -> (u64, u64) {
        (
            self.hits.load(AtomicOrdering::Relaxed),
            self.misses.load(AtomicOrdering::Relaxed),
        )
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn reset_stats(&self) {
        self.hits.store(0, AtomicOrdering::Relaxed);
        self.misses.store(0, AtomicOrdering::Relaxed);
    }

    pub fn clear_memo(&self) {
        self.memo.clear();
        self.reset_stats();
    }
}
