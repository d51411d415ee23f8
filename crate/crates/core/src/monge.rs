//! Legendre duality for convex potentials sampled on uniform grids.
//!
//! Grid geometry is rational (box corners and spacing), values are `f64`.
//! The transform maximizes `⟨x,y⟩ − K(x)` over the nodes, then refines the
//! winner by Newton's method on the tensor-product Lagrange interpolant of
//! `K` over a `(d+1)ⁿ` stencil around it (`d = 4` by default). Second
//! differences are centered; the boundary ring is excluded from every norm.

use crate::rational::{q_to_f64, QMatrix, Q};
use num_traits::Signed;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MongeError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("input is not convex: discrete Hessian eigenvalue {0:.3e} at node {1:?}")]
    NotConvex(f64, Vec<usize>),
    #[error("dual box leaves the discrete gradient range on axis {0}: [{1}, {2}] vs [{3}, {4}]")]
    DualBoxOutsideGradientRange(usize, f64, f64, f64, f64),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("no matched points inside the dual grid")]
    GradientMatching,
}

/// A box `∏[lo_c, hi_c]` with uniform spacing `h` dividing every side.
#[derive(Clone, Debug, PartialEq)]
pub struct GridBox {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
    pub h: Q,
}

impl GridBox {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>, h: Q) -> Result<Self, MongeError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(MongeError::Grid("corner dimensions differ".into()));
        }
        if !h.is_positive() {
            return Err(MongeError::Grid("spacing must be positive".into()));
        }
        for (a, b) in lo.iter().zip(&hi) {
            let steps = (b - a) / &h;
            if !steps.is_integer() || steps < Q::from_integer(2.into()) {
                return Err(MongeError::Grid(format!("spacing does not divide [{a}, {b}] into at least 2 steps")));
            }
        }
        Ok(GridBox { lo, hi, h })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| ((b - a) / &self.h).to_integer().try_into().map(|s: usize| s + 1).expect("grid size"))
            .collect()
    }

    /// Exact coordinate of a node.
    pub fn node_q(&self, idx: &[usize]) -> Vec<Q> {
        idx.iter().zip(&self.lo).map(|(&i, a)| a + &self.h * Q::from_integer(i.into())).collect()
    }

    /// Node index of an exact point, if it is a node.
    pub fn index_of(&self, x: &[Q]) -> Option<Vec<usize>> {
        let counts = self.counts();
        let mut out = Vec::with_capacity(x.len());
        for c in 0..x.len() {
            let s = (&x[c] - &self.lo[c]) / &self.h;
            if !s.is_integer() || s.is_negative() {
                return None;
            }
            let i: usize = s.to_integer().try_into().ok()?;
            if i >= counts[c] {
                return None;
            }
            out.push(i);
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexGridFunction {
    grid: GridBox,
    counts: Vec<usize>,
    values: Vec<f64>,
    /// Smallest eigenvalue of the discrete Hessian over interior nodes.
    convexity_margin: f64,
}

/// Negative eigenvalues down to this are treated as discretization noise.
pub const CONVEXITY_TOLERANCE: f64 = 1e-9;

fn for_each_index(counts: &[usize], mut f: impl FnMut(&[usize])) {
    let n = counts.len();
    if counts.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut c = n;
        loop {
            if c == 0 {
                return;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < counts[c] {
                break;
            }
            idx[c] = 0;
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix, by bisection on the
/// Sylvester inertia of `M − t·I` (LDLᵀ without pivoting).
fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let bound: f64 = m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let neg_count = |t: f64| -> usize {
        let mut a: Vec<Vec<f64>> = m.to_vec();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= t;
        }
        let mut count = 0;
        for k in 0..n {
            let mut p = a[k][k];
            if p == 0.0 {
                p = -1e-300;
            }
            if p < 0.0 {
                count += 1;
            }
            for i in k + 1..n {
                let f = a[i][k] / p;
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        count
    };
    let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if neg_count(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + bound) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        d *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    d
}

fn solve(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(r, x)| r.iter().copied().chain([*x]).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(p, k);
        for i in 0..n {
            if i != k {
                let f = a[i][k] / a[k][k];
                for j in k..=n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

impl ConvexGridFunction {
    /// Samples `f` at the nodes of `grid` and certifies convexity.
    pub fn sample(grid: GridBox, f: impl Fn(&[f64]) -> f64) -> Result<Self, MongeError> {
        let counts = grid.counts();
        let mut values = Vec::new();
        for_each_index(&counts, |idx| {
            let x: Vec<f64> = grid.node_q(idx).iter().map(q_to_f64).collect();
            values.push(f(&x));
        });
        Self::from_values(grid, values)
    }

    /// Values in row-major order (last axis fastest).
    pub fn from_values(grid: GridBox, values: Vec<f64>) -> Result<Self, MongeError> {
        let counts = grid.counts();
        if values.len() != counts.iter().product::<usize>() {
            return Err(MongeError::Grid(format!("expected {} values, got {}", counts.iter().product::<usize>(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MongeError::Grid("non-finite value".into()));
        }
        let mut k = ConvexGridFunction { grid, counts, values, convexity_margin: f64::INFINITY };
        let mut worst = (f64::INFINITY, Vec::new());
        for idx in k.interior_nodes() {
            let e = min_eigenvalue(&k.hessian(&idx));
            if e < worst.0 {
                worst = (e, idx);
            }
        }
        if worst.0 < -CONVEXITY_TOLERANCE {
            return Err(MongeError::NotConvex(worst.0, worst.1));
        }
        k.convexity_margin = worst.0;
        Ok(k)
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn convexity_margin(&self) -> f64 {
        self.convexity_margin
    }

    pub fn h(&self) -> f64 {
        q_to_f64(&self.grid.h)
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        self.grid.node_q(idx).iter().map(q_to_f64).collect()
    }

    pub fn interior_nodes(&self) -> Vec<Vec<usize>> {
        let inner: Vec<usize> = self.counts.iter().map(|c| c.saturating_sub(2)).collect();
        let mut out = Vec::new();
        for_each_index(&inner, |idx| out.push(idx.iter().map(|i| i + 1).collect()));
        out
    }

    fn at(&self, idx: &[usize], moves: &[(usize, isize)]) -> f64 {
        let mut j = idx.to_vec();
        for &(c, d) in moves {
            j[c] = (j[c] as isize + d) as usize;
        }
        self.value(&j)
    }

    /// Centered second differences at an interior node.
    pub fn hessian(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let h2 = self.h() * self.h();
        let mut m = vec![vec![0.0; n]; n];
        for a in 0..n {
            m[a][a] = (self.at(idx, &[(a, 1)]) - 2.0 * self.value(idx) + self.at(idx, &[(a, -1)])) / h2;
            for b in a + 1..n {
                let v = (self.at(idx, &[(a, 1), (b, 1)]) - self.at(idx, &[(a, 1), (b, -1)]) - self.at(idx, &[(a, -1), (b, 1)])
                    + self.at(idx, &[(a, -1), (b, -1)]))
                    / (4.0 * h2);
                m[a][b] = v;
                m[b][a] = v;
            }
        }
        m
    }

    /// Centered first differences, one-sided on the boundary.
    pub fn gradient(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.h();
        (0..self.dim())
            .map(|c| {
                if idx[c] == 0 {
                    (self.at(idx, &[(c, 1)]) - self.value(idx)) / h
                } else if idx[c] + 1 == self.counts[c] {
                    (self.value(idx) - self.at(idx, &[(c, -1)])) / h
                } else {
                    (self.at(idx, &[(c, 1)]) - self.at(idx, &[(c, -1)])) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Per-axis range of the discrete gradient over all nodes.
    pub fn gradient_range(&self) -> Vec<(f64, f64)> {
        let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim()];
        for_each_index(&self.counts, |idx| {
            for (c, g) in self.gradient(idx).into_iter().enumerate() {
                r[c].0 = r[c].0.min(g);
                r[c].1 = r[c].1.max(g);
            }
        });
        r
    }

    /// Tensor-product cubic interpolation of the discrete Hessian field
    /// over interior nodes (linear on axes with fewer than four); `None`
    /// outside their hull.
    pub fn hessian_at(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let n = self.dim();
        let h = self.h();
        let mut starts = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for c in 0..n {
            let s = (x[c] - q_to_f64(&self.grid.lo[c])) / h;
            let last = self.counts[c] - 2;
            if !(s >= 1.0 && s <= last as f64) {
                return None;
            }
            let width = (last.min(4)).max(2);
            let st = (s.floor() as usize).saturating_sub(1).max(1).min(last + 1 - width);
            let nodes: Vec<f64> = (0..width).map(|i| (st + i) as f64).collect();
            starts.push(st);
            weights.push(lagrange(&nodes, s).0);
        }
        let mut out = vec![vec![0.0; n]; n];
        let widths: Vec<usize> = weights.iter().map(|w| w.len()).collect();
        for_each_index(&widths, |loc| {
            let w: f64 = (0..n).map(|c| weights[c][loc[c]]).product();
            if w == 0.0 {
                return;
            }
            let idx: Vec<usize> = loc.iter().zip(&starts).map(|(a, b)| a + b).collect();
            let hm = self.hessian(&idx);
            for a in 0..n {
                for b in 0..n {
                    out[a][b] += w * hm[a][b];
                }
            }
        });
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.grid.lo.iter().map(crate::rational::q_to_json).collect::<Vec<_>>(),
            "hi": self.grid.hi.iter().map(crate::rational::q_to_json).collect::<Vec<_>>(),
            "h": crate::rational::q_to_json(&self.grid.h),
            "counts": self.counts,
            "values": self.values,
            "convexity_margin": self.convexity_margin,
        })
    }
}

/// 1-D Lagrange basis on nodes `t_0 < … < t_d`: values, first and second
/// derivatives at `x`.
fn lagrange(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = nodes.len();
    let mut v = vec![0.0; s];
    let mut d1 = vec![0.0; s];
    let mut d2 = vec![0.0; s];
    for i in 0..s {
        let denom: f64 = (0..s).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product();
        let others: Vec<f64> = (0..s).filter(|&j| j != i).map(|j| x - nodes[j]).collect();
        let m = others.len();
        let prod_except = |skip: &[usize]| -> f64 { (0..m).filter(|k| !skip.contains(k)).map(|k| others[k]).product() };
        v[i] = prod_except(&[]) / denom;
        d1[i] = (0..m).map(|a| prod_except(&[a])).sum::<f64>() / denom;
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    acc += prod_except(&[a, b]);
                }
            }
        }
        d2[i] = acc / denom;
    }
    (v, d1, d2)
}

/// Interpolation degree used by [`legendre`].
pub const LEGENDRE_DEGREE: usize = 4;

/// Maximizes `⟨x,y⟩ − P(x)` near node `best`, `P` the interpolant of `k`
/// on a stencil around it. Returns `None` if Newton leaves the stencil.
fn refine(k: &ConvexGridFunction, best: &[usize], y: &[f64], degree: usize) -> Option<f64> {
    let n = k.dim();
    let s = degree + 1;
    let h = k.h();
    let mut start = Vec::with_capacity(n);
    for c in 0..n {
        if k.counts[c] < s {
            return None;
        }
        let g = k.gradient(best)[c];
        // Lean toward the side where the maximizer lies.
        let lean = if y[c] > g { s / 2 } else { (s - 1) / 2 };
        let st = (best[c] as isize + lean as isize - (s as isize - 1)).max(0).min((k.counts[c] - s) as isize) as usize;
        start.push(st);
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..s).map(|i| q_to_f64(&k.grid.lo[c]) + h * (start[c] + i) as f64).collect())
        .collect();
    let eval = |x: &[f64]| -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let bases: Vec<_> = (0..n).map(|c| lagrange(&axes[c], x[c])).collect();
        let mut p = 0.0;
        let mut g = vec![0.0; n];
        let mut hm = vec![vec![0.0; n]; n];
        for_each_index(&vec![s; n], |loc| {
            let idx: Vec<usize> = loc.iter().zip(&start).map(|(a, b)| a + b).collect();
            let val = k.value(&idx);
            let f: Vec<f64> = (0..n).map(|c| bases[c].0[loc[c]]).collect();
            let d: Vec<f64> = (0..n).map(|c| bases[c].1[loc[c]]).collect();
            let dd: Vec<f64> = (0..n).map(|c| bases[c].2[loc[c]]).collect();
            let prod_except = |skip: &[usize]| -> f64 { (0..n).filter(|c| !skip.contains(c)).map(|c| f[c]).product() };
            p += val * prod_except(&[]);
            for a in 0..n {
                g[a] += val * d[a] * prod_except(&[a]);
                hm[a][a] += val * dd[a] * prod_except(&[a]);
                for b in 0..n {
                    if b != a {
                        hm[a][b] += val * d[a] * d[b] * prod_except(&[a, b]);
                    }
                }
            }
        });
        (p, g, hm)
    };
    let mut x = k.node(best);
    for _ in 0..50 {
        let (_, g, hm) = eval(&x);
        let rhs: Vec<f64> = (0..n).map(|c| y[c] - g[c]).collect();
        let step = solve(&hm, &rhs)?;
        for c in 0..n {
            x[c] += step[c];
            if x[c] < axes[c][0] - 1e-12 || x[c] > axes[c][s - 1] + 1e-12 {
                return None;
            }
        }
        if step.iter().map(|d| d.abs()).fold(0.0, f64::max) < 1e-15 * (1.0 + h) {
            break;
        }
    }
    let (p, _, _) = eval(&x);
    Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - p)
}

/// `K̂(y) = max_x (⟨x,y⟩ − K(x))` sampled on `dual`.
pub fn legendre(k: &ConvexGridFunction, dual: &GridBox) -> Result<ConvexGridFunction, MongeError> {
    legendre_with_degree(k, dual, LEGENDRE_DEGREE)
}

pub fn legendre_with_degree(k: &ConvexGridFunction, dual: &GridBox, degree: usize) -> Result<ConvexGridFunction, MongeError> {
    if dual.dim() != k.dim() {
        return Err(MongeError::DomainMismatch("dual box dimension".into()));
    }
    for (c, (glo, ghi)) in k.gradient_range().into_iter().enumerate() {
        let (a, b) = (q_to_f64(&dual.lo[c]), q_to_f64(&dual.hi[c]));
        if a < glo || b > ghi {
            return Err(MongeError::DualBoxOutsideGradientRange(c, a, b, glo, ghi));
        }
    }
    let mut all = Vec::new();
    for_each_index(&k.counts, |idx| all.push((idx.to_vec(), k.node(idx), k.value(idx))));
    let mut out = Vec::new();
    for_each_index(&dual.counts(), |yi| {
        let y: Vec<f64> = dual.node_q(yi).iter().map(q_to_f64).collect();
        let (mut best, mut bv) = (0usize, f64::NEG_INFINITY);
        for (p, (_, x, v)) in all.iter().enumerate() {
            let s = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - v;
            if s > bv {
                bv = s;
                best = p;
            }
        }
        let refined = refine(k, &all[best].0, &y, degree).filter(|r| *r >= bv - 1e-12);
        out.push(refined.unwrap_or(bv));
    });
    ConvexGridFunction::from_values(dual.clone(), out)
}

/// `‖K̂̂ − K‖∞` over the interior nodes of `back`, which must be nodes of
/// `K`'s grid.
pub fn involution_error(k: &ConvexGridFunction, dual: &GridBox, back: &GridBox) -> Result<f64, MongeError> {
    let kh = legendre(k, dual)?;
    let khh = legendre(&kh, back)?;
    let mut err: f64 = 0.0;
    for idx in khh.interior_nodes() {
        let x = back.node_q(&idx);
        let j = k.grid.index_of(&x).ok_or_else(|| MongeError::DomainMismatch(format!("node {x:?} is not on the original grid")))?;
        err = err.max((khh.value(&idx) - k.value(&j)).abs());
    }
    Ok(err)
}

/// `max |det Hess K − median(det Hess K)|` over interior nodes.
pub fn ma_residual(k: &ConvexGridFunction) -> f64 {
    let mut dets: Vec<f64> = k.interior_nodes().iter().map(|i| det(&k.hessian(i))).collect();
    if dets.is_empty() {
        return 0.0;
    }
    dets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dets.len();
    let med = if m % 2 == 1 { dets[m / 2] } else { 0.5 * (dets[m / 2 - 1] + dets[m / 2]) };
    dets.iter().map(|d| (d - med).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    /// `max |det Hess K(x) · det Hess K̂(y) − 1|`.
    pub det_error: f64,
    /// `max_ij |(Hess K̂(y) · Hess K(x) − I)_ij|`.
    pub metric_error: f64,
    pub matched: usize,
}

impl DualityReport {
    pub fn to_json(&self) -> Value {
        json!({ "det_error": self.det_error, "metric_error": self.metric_error, "matched": self.matched })
    }
}

/// Compares Hessians at `(x, y = ∇K(x))` for interior nodes `x` whose
/// discrete gradient lands inside the interior hull of `kh`'s grid.
pub fn hessian_duality_check(k: &ConvexGridFunction, kh: &ConvexGridFunction) -> Result<DualityReport, MongeError> {
    duality_impl(k, kh, None)
}

/// As [`hessian_duality_check`], restricted to interior nodes `x` in the
/// box `[lo, hi]`; every such node must match. A fixed region keeps the
/// measured set comparable across grid refinements.
pub fn hessian_duality_check_within(
    k: &ConvexGridFunction,
    kh: &ConvexGridFunction,
    lo: &[f64],
    hi: &[f64],
) -> Result<DualityReport, MongeError> {
    duality_impl(k, kh, Some((lo, hi)))
}

fn duality_impl(k: &ConvexGridFunction, kh: &ConvexGridFunction, region: Option<(&[f64], &[f64])>) -> Result<DualityReport, MongeError> {
    if k.dim() != kh.dim() {
        return Err(MongeError::DomainMismatch("dimensions differ".into()));
    }
    let n = k.dim();
    let mut rep = DualityReport { det_error: 0.0, metric_error: 0.0, matched: 0 };
    for idx in k.interior_nodes() {
        if let Some((lo, hi)) = region {
            let x = k.node(&idx);
            if (0..n).any(|c| x[c] < lo[c] || x[c] > hi[c]) {
                continue;
            }
        }
        let y = k.gradient(&idx);
        let Some(hy) = kh.hessian_at(&y) else {
            if region.is_some() {
                return Err(MongeError::GradientMatching);
            }
            continue;
        };
        let hx = k.hessian(&idx);
        rep.det_error = rep.det_error.max((det(&hx) * det(&hy) - 1.0).abs());
        for a in 0..n {
            for b in 0..n {
                let p: f64 = (0..n).map(|c| hy[a][c] * hx[c][b]).sum();
                let e = if a == b { p - 1.0 } else { p };
                rep.metric_error = rep.metric_error.max(e.abs());
            }
        }
        rep.matched += 1;
    }
    if rep.matched == 0 {
        return Err(MongeError::GradientMatching);
    }
    Ok(rep)
}

/// Chart transitions of an integral affine structure lie in
/// `SL(n,Z) ⋉ Rⁿ`: integral linear part of determinant 1.
pub fn is_integral_affine_transition(linear: &QMatrix, translation: &[Q]) -> bool {
    linear.is_square() && linear.rows() == translation.len() && linear.is_integral() && linear.det() == Q::from_integer(1.into())
}

/// Convergence order `log₂(e_coarse / e_fine)` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn gbox(lo: &[Q], hi: &[Q], h: Q) -> GridBox {
        GridBox::new(lo.to_vec(), hi.to_vec(), h).unwrap()
    }

    #[test]
    fn self_dual_quadratic() {
        let k = ConvexGridFunction::sample(gbox(&[qi(-1)], &[qi(1)], q(1, 16)), |x| 0.5 * x[0] * x[0]).unwrap();
        let kh = legendre(&k, &gbox(&[q(-1, 2)], &[q(1, 2)], q(1, 16))).unwrap();
        for idx in kh.interior_nodes() {
            let y = kh.node(&idx)[0];
            assert!((kh.value(&idx) - 0.5 * y * y).abs() < 1e-12);
        }
        assert!(ma_residual(&k) < 1e-10);
    }

    #[test]
    fn diagonal_quadratic() {
        let k = ConvexGridFunction::sample(gbox(&[qi(-1), qi(-1)], &[qi(1), qi(1)], q(1, 8)), |x| x[0] * x[0] + 0.25 * x[1] * x[1]).unwrap();
        let kh = legendre(&k, &gbox(&[qi(-1), q(-1, 4)], &[qi(1), q(1, 4)], q(1, 8))).unwrap();
        for idx in kh.interior_nodes() {
            let y = kh.node(&idx);
            assert!((kh.value(&idx) - (0.25 * y[0] * y[0] + y[1] * y[1])).abs() < 1e-12);
        }
        let r = hessian_duality_check(&k, &kh).unwrap();
        assert!(r.det_error < 1e-9 && r.metric_error < 1e-9);
    }

    #[test]
    fn rejections() {
        let bad = ConvexGridFunction::sample(gbox(&[qi(-1)], &[qi(1)], q(1, 8)), |x| -x[0] * x[0]);
        assert!(matches!(bad, Err(MongeError::NotConvex(..))));
        let k = ConvexGridFunction::sample(gbox(&[qi(-1)], &[qi(1)], q(1, 8)), |x| 0.5 * x[0] * x[0]).unwrap();
        assert!(matches!(legendre(&k, &gbox(&[qi(-2)], &[qi(0)], q(1, 8))), Err(MongeError::DualBoxOutsideGradientRange(..))));
        assert!(GridBox::new(vec![qi(0)], vec![qi(1)], q(2, 5)).is_err());
    }

    #[test]
    fn quartic_residual_is_large() {
        let k = ConvexGridFunction::sample(gbox(&[q(1, 2)], &[qi(1)], q(1, 32)), |x| x[0].powi(4)).unwrap();
        assert!(ma_residual(&k) > 1.0);
    }

    #[test]
    fn eigen_and_det() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((min_eigenvalue(&m) - 1.0).abs() < 1e-12);
        assert!((det(&m) - 3.0).abs() < 1e-12);
        let (v, d1, d2) = lagrange(&[0.0, 1.0, 2.0], 0.5);
        // x² interpolates exactly.
        let f = [0.0, 1.0, 4.0];
        let dot = |w: &[f64]| w.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        assert!((dot(&v) - 0.25).abs() < 1e-14 && (dot(&d1) - 1.0).abs() < 1e-14 && (dot(&d2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn affine_transitions() {
        assert!(is_integral_affine_transition(&QMatrix::from_i64(&[vec![1, 1], vec![0, 1]]), &[q(1, 2), qi(0)]));
        assert!(!is_integral_affine_transition(&QMatrix::from_i64(&[vec![2, 0], vec![0, 1]]), &[qi(0), qi(0)]));
    }
}
