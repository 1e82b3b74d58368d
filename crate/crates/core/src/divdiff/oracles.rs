//! Independent evaluations used to cross-check the Newton table.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{DivDiffEngine, DivDiffError};
use crate::dd::Dd;
use crate::real::{rel_gap, Real};
use crate::spectra::SmoothFamily;

/// Sum over `j` of `f'(x_j) / prod_{k != j} (x_j - x_k)`. Distinct points only.
pub fn divdiff_oracle_distinct<R: Real>(
    engine: &DivDiffEngine<R>,
    points: &[R],
) -> Result<R, DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(DivDiffError::DuplicatePoint(points[i].to_f64()));
            }
        }
    }
    let mut sum = R::zero();
    for (j, xj) in points.iter().enumerate() {
        let mut den = R::one();
        for (k, xk) in points.iter().enumerate() {
            if k != j {
                den = den * (xj.clone() - xk.clone());
            }
        }
        sum = sum + engine.family().eval_derivative(1, xj)? / den;
    }
    Ok(sum)
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed in double-double.
pub fn gauss_legendre(q: usize) -> Vec<(Dd, Dd)> {
    let mut out = Vec::with_capacity(q);
    let one = Dd::ONE;
    for i in 0..q {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut x = Dd::from_f64(guess);
        for iter in 0..100 {
            let (p, pm1) = legendre(q, x);
            let dp = Dd::from_f64(q as f64) * (x * p - pm1) / (x * x - one);
            let dx = p / dp;
            x -= dx;
            if iter > 2 && dx.abs().hi < 1e-33 {
                break;
            }
        }
        let (p, pm1) = legendre(q, x);
        let dp = Dd::from_f64(q as f64) * (x * p - pm1) / (x * x - one);
        let w = Dd::from_f64(2.0) / ((one - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre(q: usize, x: Dd) -> (Dd, Dd) {
    let mut p0 = Dd::ONE;
    let mut p1 = x;
    if q == 0 {
        return (p0, Dd::ZERO);
    }
    for k in 1..q {
        let kf = k as f64;
        let p2 = (Dd::from_f64(2.0 * kf + 1.0) * x * p1 - Dd::from_f64(kf) * p0)
            / Dd::from_f64(kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Simplex integral of `f^(n+1)` over `x_0 + sum s_k (x_k - x_0)`, tensor
/// Gauss-Legendre of order `q` per dimension after the collapsed-coordinate map
/// `s_k = r_k u_k`, `r_{k+1} = r_k (1 - u_k)`. Exponential convergence in `q`
/// for analytic `f`; cost is `q^n` evaluations.
pub fn divdiff_integral<R: Real>(
    engine: &DivDiffEngine<R>,
    points: &[R],
    q: usize,
) -> Result<R, DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    let n = points.len() - 1;
    let family = engine.family();
    if n == 0 {
        return Ok(family.eval_derivative(1, &points[0])?);
    }
    let evals = (q as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if evals > 20_000_000 {
        return Err(DivDiffError::QuadratureBudgetExceeded(evals));
    }
    let half = R::from_f64(0.5);
    let nodes: Vec<(R, R)> = gauss_legendre(q)
        .into_iter()
        .map(|(x, w)| {
            (
                (R::one() + R::from_dd(x)) * half.clone(),
                R::from_dd(w) * half.clone(),
            )
        })
        .collect();
    let diffs: Vec<R> = points[1..]
        .iter()
        .map(|x| x.clone() - points[0].clone())
        .collect();
    let ctx = Ctx {
        family,
        nodes: &nodes,
        diffs: &diffs,
        order: n + 1,
    };
    ctx.recurse(0, R::one(), points[0].clone(), R::one())
}

struct Ctx<'a, R: Real> {
    family: &'a SmoothFamily,
    nodes: &'a [(R, R)],
    diffs: &'a [R],
    order: usize,
}

impl<R: Real> Ctx<'_, R> {
    fn recurse(&self, level: usize, r: R, x: R, w: R) -> Result<R, DivDiffError> {
        if level == self.diffs.len() {
            return Ok(w * self.family.eval_derivative(self.order, &x)?);
        }
        let mut acc = R::zero();
        for (u, wu) in self.nodes {
            let s = r.clone() * u.clone();
            let xn = x.clone() + s * self.diffs[level].clone();
            let rn = r.clone() * (R::one() - u.clone());
            let wn = w.clone() * wu.clone() * r.clone();
            acc = acc + self.recurse(level + 1, rn, xn, wn)?;
        }
        Ok(acc)
    }
}

/// `f'[t_0..t_n] = (1/n!) * integral of f^(n+1)(s) M(s) ds` with `M` the
/// normalised B-spline on the knots. Each knot span is split into panels of
/// width a quarter of the distance to the nearest complex singularity of `f`,
/// each integrated with `q`-point Gauss-Legendre.
pub fn divdiff_spline_integral<R: Real>(
    engine: &DivDiffEngine<R>,
    points: &[R],
    q: usize,
) -> Result<R, DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    let family = engine.family();
    let n = points.len() - 1;
    let mut t = points.to_vec();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut nfact = R::one();
    for k in 2..=n {
        nfact = nfact * R::from_i64(k as i64);
    }
    if t[0] == t[n] {
        return Ok(family.eval_derivative(n + 1, &t[0])? / nfact);
    }
    let half = R::from_f64(0.5);
    let nodes: Vec<(R, R)> = gauss_legendre(q)
        .into_iter()
        .map(|(x, w)| {
            (
                (R::one() + R::from_dd(x)) * half.clone(),
                R::from_dd(w) * half.clone(),
            )
        })
        .collect();
    let mut total = R::zero();
    let mut panels = 0u64;
    for j in 0..n {
        if t[j] == t[j + 1] {
            continue;
        }
        let end = t[j + 1].clone();
        let mut a = t[j].clone();
        while a < end {
            let af = a.to_f64();
            let rho = family
                .singularity_distance(af)
                .min(family.singularity_distance(end.to_f64()));
            if !(rho > 0.0) {
                return Err(crate::spectra::SpectraError::SingularPoint(af).into());
            }
            let step = R::from_f64(0.25 * rho);
            let b = if a.clone() + step.clone() >= end {
                end.clone()
            } else {
                a.clone() + step
            };
            let h = b.clone() - a.clone();
            panels += 1;
            if panels > 100_000 {
                return Err(DivDiffError::QuadratureBudgetExceeded(panels * q as u64));
            }
            let mut panel = R::zero();
            for (u, w) in &nodes {
                let s = a.clone() + h.clone() * u.clone();
                let m = bspline(&t, &s);
                panel = panel + w.clone() * m * family.eval_derivative(n + 1, &s)?;
            }
            total = total + panel * h;
            a = b;
        }
    }
    Ok(total / nfact)
}

/// Normalised B-spline of order `t.len() - 1` on knots `t`, evaluated at `s`.
fn bspline<R: Real>(t: &[R], s: &R) -> R {
    let n = t.len() - 1;
    let mut m: Vec<R> = (0..n)
        .map(|i| {
            if t[i] < t[i + 1] && t[i] <= *s && *s < t[i + 1] {
                (t[i + 1].clone() - t[i].clone()).recip()
            } else {
                R::zero()
            }
        })
        .collect();
    for k in 2..=n {
        let kk = R::from_i64(k as i64) / R::from_i64(k as i64 - 1);
        for i in 0..=(n - k) {
            let span = t[i + k].clone() - t[i].clone();
            m[i] = if span.is_zero() {
                R::zero()
            } else {
                kk.clone()
                    * ((s.clone() - t[i].clone()) * m[i].clone()
                        + (t[i + k].clone() - s.clone()) * m[i + 1].clone())
                    / span
            };
        }
    }
    m[0].clone()
}

/// Complete homogeneous symmetric polynomial `h_p` of the reciprocals.
pub fn hp_oracle(p: u32, points: &[BigRational]) -> Result<BigRational, DivDiffError> {
    let mut h = vec![<BigRational as Zero>::zero(); p as usize + 1];
    h[0] = <BigRational as One>::one();
    for x in points {
        if Zero::is_zero(x) {
            return Err(DivDiffError::ZeroPoint);
        }
        let y = x.recip();
        for k in 1..=p as usize {
            let add = &y * &h[k - 1];
            h[k] += add;
        }
    }
    Ok(h[p as usize].clone())
}

/// Both sides of `f'{x_1..x_n} = g_n[1/x_1..1/x_n]` with `g_n(y) = -y^(n-2) f'(1/y)`,
/// and their relative gap.
pub fn gn_identity_check<R: Real>(
    engine: &DivDiffEngine<R>,
    points: &[R],
) -> Result<(R, R, f64), DivDiffError> {
    if points.is_empty() {
        return Err(DivDiffError::EmptyPoints);
    }
    if points.iter().any(|x| x.is_zero()) {
        return Err(DivDiffError::ZeroPoint);
    }
    let n = points.len();
    let lhs = engine.weighted_divdiff(points)?;
    let ys: Vec<R> = points.iter().map(|x| x.recip()).collect();
    for i in 0..n {
        for j in 0..i {
            if ys[i] == ys[j] {
                return Err(DivDiffError::DuplicatePoint(points[i].to_f64()));
            }
        }
    }
    let mut c = Vec::with_capacity(n);
    for (x, y) in points.iter().zip(&ys) {
        let fp = engine.family().eval_derivative(1, x)?;
        c.push(-(y.powi(n as i32 - 2) * fp));
    }
    for k in 1..n {
        for j in (k..n).rev() {
            c[j] = (c[j].clone() - c[j - 1].clone()) / (ys[j].clone() - ys[j - k].clone());
        }
    }
    let rhs = c[n - 1].clone();
    let gap = rel_gap(&lhs, &rhs);
    Ok((lhs, rhs, gap))
}
