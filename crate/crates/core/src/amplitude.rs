//! Amplitude sums over running face indices.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

use crate::divdiff::{DivDiffEngine, DivDiffError};
use crate::real::{rel_gap, CompensatedSum, Real};
use crate::ribbon::{artificially_break, FaceStructure, GraphError, IndexAssignment, RibbonGraph, Slot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmplitudeError {
    #[error(transparent)]
    DivDiff(#[from] DivDiffError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("propagator f'[lambda_{0}, lambda_{1}] vanishes")]
    VanishingPropagator(u32, u32),
    #[error("external leg {0} has eigenvalue zero")]
    ZeroExternalEigenvalue(usize),
    #[error("eigenvalue of index {0} is zero")]
    ZeroEigenvalue(u32),
    #[error("graph has {expected} legs but {got} external indices were given")]
    ExternalCountMismatch { expected: usize, got: usize },
    #[error("running range {start}..={cutoff} is empty or invalid")]
    BadRange { start: u32, cutoff: u32 },
    #[error("sum splitting needs U <= 3 and i_R <= 6 (got U = {u}, i_R = {i_r})")]
    CombinatorialBudgetExceeded { u: usize, i_r: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    #[default]
    Sequential,
    Parallel,
}

pub type Progress<'a> = &'a (dyn Fn(u64) + Sync);

#[derive(Clone)]
pub struct AmplitudeRequest<'a> {
    pub graph: &'a RibbonGraph,
    pub faces: &'a FaceStructure,
    pub assignment: &'a IndexAssignment,
    /// Spectrum index of each leg, `external[k-1]` for leg `k`.
    pub external: Vec<u32>,
    pub cutoff: u32,
    /// First value of every running index (`i_R`); 1 for the plain amplitude.
    pub range_start: u32,
    pub summation: Summation,
    pub progress: Option<Progress<'a>>,
}

impl<'a> AmplitudeRequest<'a> {
    pub fn new(
        graph: &'a RibbonGraph,
        faces: &'a FaceStructure,
        assignment: &'a IndexAssignment,
        external: Vec<u32>,
        cutoff: u32,
    ) -> Self {
        AmplitudeRequest {
            graph,
            faces,
            assignment,
            external,
            cutoff,
            range_start: 1,
            summation: Summation::Sequential,
            progress: None,
        }
    }

    pub fn restricted(mut self, i_r: u32) -> Self {
        self.range_start = i_r;
        self
    }

    pub fn with_summation(mut self, s: Summation) -> Self {
        self.summation = s;
        self
    }

    pub fn with_progress(mut self, p: Progress<'a>) -> Self {
        self.progress = Some(p);
        self
    }

    pub fn with_faces(&self, faces: &'a FaceStructure) -> Self {
        AmplitudeRequest {
            faces,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeResult<R> {
    pub value: R,
    pub term_count: u64,
    pub memo_hits: u64,
    pub memo_misses: u64,
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug)]
enum Ref {
    Const(u32),
    Var(usize),
}

/// Factors with index numbers resolved to constants or running-variable slots.
struct Compiled {
    vertices: Vec<Vec<Ref>>,
    edges: Vec<[Ref; 2]>,
    /// Number of running variables.
    vars: usize,
}

fn compile(req: &AmplitudeRequest<'_>) -> Result<Compiled, AmplitudeError> {
    let n = req.faces.n;
    if req.external.len() != n {
        return Err(AmplitudeError::ExternalCountMismatch {
            expected: n,
            got: req.external.len(),
        });
    }
    let running = req.faces.running_indices();
    if !running.is_empty() && (req.range_start < 1 || req.range_start > req.cutoff) {
        return Err(AmplitudeError::BadRange {
            start: req.range_start,
            cutoff: req.cutoff,
        });
    }
    let resolve = |i: u32| -> Ref {
        match req.faces.slot(i) {
            Slot::External { leg } => Ref::Const(req.external[leg - 1]),
            Slot::Fixed { value, .. } => Ref::Const(value),
            Slot::Running { .. } => {
                Ref::Var(running.iter().position(|&r| r == i).expect("running index"))
            }
        }
    };
    Ok(Compiled {
        vertices: req
            .assignment
            .alpha
            .iter()
            .map(|a| a.iter().map(|&i| resolve(i)).collect())
            .collect(),
        edges: req
            .assignment
            .beta
            .iter()
            .map(|&(a, b)| [resolve(a), resolve(b)])
            .collect(),
        vars: running.len(),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    Standard,
    Weighted,
}

fn term<R: Real>(
    engine: &DivDiffEngine<R>,
    c: &Compiled,
    vals: &[u32],
    form: Form,
) -> Result<R, AmplitudeError> {
    let get = |r: &Ref| match *r {
        Ref::Const(k) => k,
        Ref::Var(v) => vals[v],
    };
    let look = |idx: &[u32]| match form {
        Form::Standard => engine.dd_at_indices(idx),
        Form::Weighted => engine.weighted_at_indices(idx),
    };
    let mut num = R::one();
    let mut buf: SmallVec<[u32; 8]> = SmallVec::new();
    for v in &c.vertices {
        buf.clear();
        buf.extend(v.iter().map(get));
        num = num * look(&buf)?;
    }
    let mut den = R::one();
    for e in &c.edges {
        let (a, b) = (get(&e[0]), get(&e[1]));
        let x = look(&[a, b])?;
        if x.is_zero() {
            return Err(AmplitudeError::VanishingPropagator(a.min(b), a.max(b)));
        }
        den = den * x;
    }
    Ok(num / den)
}

fn sum_terms<R: Real>(
    engine: &DivDiffEngine<R>,
    req: &AmplitudeRequest<'_>,
    form: Form,
) -> Result<AmplitudeResult<R>, AmplitudeError> {
    let start = Instant::now();
    let (h0, m0) = engine.memo_stats();
    let c = compile(req)?;
    let lo = req.range_start;
    let hi = req.cutoff;
    let width = (hi - lo + 1) as u64;

    if c.vars == 0 {
        let v = term(engine, &c, &[], form)?;
        if let Some(p) = req.progress {
            p(1);
        }
        let (h1, m1) = engine.memo_stats();
        return Ok(AmplitudeResult {
            value: v,
            term_count: 1,
            memo_hits: h1 - h0,
            memo_misses: m1 - m0,
            wall_time: start.elapsed(),
        });
    }

    let per_block = width.pow(c.vars as u32 - 1);
    let done = AtomicU64::new(0);
    let block = |outer: u32| -> Result<R, AmplitudeError> {
        let mut vals = vec![lo; c.vars];
        vals[0] = outer;
        let mut acc = CompensatedSum::new();
        loop {
            acc.add(term(engine, &c, &vals, form)?);
            // odometer over the inner variables, last one fastest
            let mut k = c.vars;
            loop {
                if k == 1 {
                    let total = done.fetch_add(per_block, Ordering::Relaxed) + per_block;
                    if let Some(p) = req.progress {
                        p(total);
                    }
                    return Ok(acc.value());
                }
                k -= 1;
                if vals[k] < hi {
                    vals[k] += 1;
                    break;
                }
                vals[k] = lo;
            }
        }
    };
    let blocks: Vec<R> = match req.summation {
        Summation::Sequential => (lo..=hi).map(block).collect::<Result<_, _>>()?,
        Summation::Parallel => (lo..=hi)
            .into_par_iter()
            .map(block)
            .collect::<Result<_, _>>()?,
    };
    let mut total = CompensatedSum::new();
    for b in blocks {
        total.add(b);
    }
    let (h1, m1) = engine.memo_stats();
    Ok(AmplitudeResult {
        value: total.value(),
        term_count: width.pow(c.vars as u32),
        memo_hits: h1 - h0,
        memo_misses: m1 - m0,
        wall_time: start.elapsed(),
    })
}

/// Sum of `prod_v f'[alpha] / prod_e f'[beta]` over the running indices.
pub fn evaluate<R: Real>(
    engine: &DivDiffEngine<R>,
    req: &AmplitudeRequest<'_>,
) -> Result<AmplitudeResult<R>, AmplitudeError> {
    sum_terms(engine, req, Form::Standard)
}

/// The same amplitude written with weighted divided differences:
/// `(-1)^{#odd vertices} prod_legs lambda^-1 * sum prod_v f'{alpha} / prod_e f'{beta}`.
pub fn evaluate_weighted<R: Real>(
    engine: &DivDiffEngine<R>,
    req: &AmplitudeRequest<'_>,
) -> Result<AmplitudeResult<R>, AmplitudeError> {
    let mut prefactor = R::one();
    for (pos, &k) in req.external.iter().enumerate() {
        let lam = engine.eigenvalue(k)?;
        if lam.is_zero() {
            return Err(AmplitudeError::ZeroExternalEigenvalue(pos + 1));
        }
        prefactor = prefactor / lam;
    }
    for s in &req.faces.slots {
        if let Slot::Fixed { value, .. } = *s {
            if engine.eigenvalue(value)?.is_zero() {
                return Err(AmplitudeError::ZeroEigenvalue(value));
            }
        }
    }
    if !req.faces.running_indices().is_empty() {
        for k in req.range_start.max(1)..=req.cutoff {
            if engine.eigenvalue(k)?.is_zero() {
                return Err(AmplitudeError::ZeroEigenvalue(k));
            }
        }
    }
    let odd = (0..req.graph.num_vertices())
        .filter(|&v| req.graph.degree(v) % 2 == 1)
        .count();
    if odd % 2 == 1 {
        prefactor = -prefactor;
    }
    let mut r = sum_terms(engine, req, Form::Weighted)?;
    r.value = prefactor * r.value;
    Ok(r)
}

/// Running indices restricted to `i_r..=N`.
pub fn evaluate_restricted<R: Real>(
    engine: &DivDiffEngine<R>,
    req: &AmplitudeRequest<'_>,
    i_r: u32,
) -> Result<AmplitudeResult<R>, AmplitudeError> {
    if i_r < 1 || i_r > req.cutoff {
        return Err(AmplitudeError::BadRange {
            start: i_r,
            cutoff: req.cutoff,
        });
    }
    evaluate(engine, &req.clone().restricted(i_r))
}

#[derive(Clone, Debug)]
pub struct SplitCheck<R> {
    pub lhs: R,
    pub rhs: R,
    pub gap: f64,
    /// Number of (b, gamma) pairs summed on the right-hand side.
    pub pieces: usize,
}

/// Plain amplitude against the sum over artificially broken graphs of
/// restricted amplitudes, all faces of `b` fixed below `i_r`.
pub fn sum_split_check<R: Real>(
    engine: &DivDiffEngine<R>,
    req: &AmplitudeRequest<'_>,
    i_r: u32,
) -> Result<SplitCheck<R>, AmplitudeError> {
    let running = req.faces.running_indices();
    let u = running.len();
    if u > 3 || i_r > 6 {
        return Err(AmplitudeError::CombinatorialBudgetExceeded { u, i_r });
    }
    if i_r < 1 || i_r > req.cutoff {
        return Err(AmplitudeError::BadRange {
            start: i_r,
            cutoff: req.cutoff,
        });
    }
    let base = req.clone().restricted(1);
    let lhs = evaluate(engine, &base)?.value;
    let mut rhs = CompensatedSum::new();
    let mut pieces = 0;
    for mask in 0u32..(1 << u) {
        let b: Vec<u32> = (0..u)
            .filter(|&j| mask & (1 << j) != 0)
            .map(|j| running[j])
            .collect();
        let choices = (i_r - 1) as usize;
        let count = choices.pow(b.len() as u32);
        for code in 0..count {
            let mut gamma = Vec::with_capacity(b.len());
            let mut c = code;
            for _ in 0..b.len() {
                gamma.push((c % choices) as u32 + 1);
                c /= choices;
            }
            let broken = artificially_break(req.faces, &b, &gamma)?;
            let sub = base.with_faces(&broken);
            rhs.add(evaluate_restricted(engine, &sub, i_r)?.value);
            pieces += 1;
        }
    }
    let rhs = rhs.value();
    let gap = rel_gap(&lhs, &rhs);
    Ok(SplitCheck {
        lhs,
        rhs,
        gap,
        pieces,
    })
}
