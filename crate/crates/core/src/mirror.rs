//! The non-archimedean side: Laurent series over the Novikov field,
//! convergence on rational polytopes, line bundles attached to affine
//! Lagrangians, their theta bases and products, and the comparison with
//! Fukaya–Oh `m₂`.
//!
//! The theta basis of the bundle with slope `D`, shift `β` and holonomy `ν`
//! is indexed by `Zⁿ/DZⁿ`. For the coset with canonical point `x*`
//! (see [`crate::fukaya_oh::canonical_lift_pd`]) and pivot `m* = Dx* + β`,
//!
//! `θ = Σ_{l ∈ Zⁿ} ν^{−l} q^{½(x*+l)ᵀD(x*+l) − ½x*ᵀDx*} z^{m* + Dl}`,
//!
//! so every section has coefficient 1 at its pivot.

use crate::fukaya_oh::{canonical_lift_pd, ceil_sqrt, fo_category, half_form, AffineLagrangian, FoError};
use crate::novikov::NovikovElem;
use crate::rational::{bigint_to_json, floor_q, frac_q, fmt_q, integer_box, q_to_json, QMatrix, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MirrorError {
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is empty")]
    Empty,
    #[error("slope is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("truncation too coarse; rerun with cutoff at least {required}")]
    TruncationTooCoarse { required: Q },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Fo(#[from] FoError),
}

/// A truncated Laurent series `Σ a_k z^k`, `k ∈ Zⁿ`, with Novikov
/// coefficients. `tail_bound = Some(c)` declares `v(a_k) ≥ c·|k|₁ − O(1)`
/// for the terms not stored; `None` declares the series finite.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeriesNd {
    terms: BTreeMap<Vec<BigInt>, NovikovElem>,
    tail_bound: Option<Q>,
}

impl LaurentSeriesNd {
    pub fn new(terms: impl IntoIterator<Item = (Vec<BigInt>, NovikovElem)>, tail_bound: Option<Q>) -> Self {
        let mut map: BTreeMap<Vec<BigInt>, NovikovElem> = BTreeMap::new();
        for (k, a) in terms {
            let e = match map.remove(&k) {
                Some(b) => b.add(&a),
                None => a,
            };
            if !e.is_zero() {
                map.insert(k, e);
            }
        }
        LaurentSeriesNd { terms: map, tail_bound }
    }

    pub fn constant(n: usize, a: NovikovElem) -> Self {
        Self::new([(vec![BigInt::zero(); n], a)], None)
    }

    pub fn terms(&self) -> &BTreeMap<Vec<BigInt>, NovikovElem> {
        &self.terms
    }

    pub fn tail_bound(&self) -> Option<&Q> {
        self.tail_bound.as_ref()
    }

    pub fn coeff(&self, k: &[BigInt]) -> NovikovElem {
        self.terms.get(k).cloned().unwrap_or_else(NovikovElem::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Product with every coefficient truncated at `cutoff`. Exact below
    /// `cutoff` when both factors have nonnegative valuations and store
    /// every term below it.
    pub fn mul_truncated(&self, other: &Self, cutoff: &Q) -> Self {
        let mut acc: BTreeMap<Vec<BigInt>, Vec<(Q, Q)>> = BTreeMap::new();
        for (k1, a1) in &self.terms {
            for (k2, a2) in &other.terms {
                let k: Vec<BigInt> = k1.iter().zip(k2).map(|(x, y)| x + y).collect();
                let slot = acc.entry(k).or_default();
                for (e1, c1) in a1.terms() {
                    for (e2, c2) in a2.terms() {
                        let e = e1 + e2;
                        if e < *cutoff {
                            slot.push((e, c1 * c2));
                        }
                    }
                }
            }
        }
        let tail = match (&self.tail_bound, &other.tail_bound) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Self::new(acc.into_iter().map(|(k, ts)| (k, NovikovElem::new(ts, Some(cutoff.clone())))), tail)
    }

    /// `{"tail_bound": q|null, "terms": [[[k…], series]]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(k, a)| json!([k.iter().map(bigint_to_json).collect::<Vec<_>>(), a.to_json()]))
            .collect();
        json!({ "tail_bound": self.tail_bound.as_ref().map(q_to_json), "terms": terms })
    }
}

/// `{y : a_i·y ≤ c_i}`, checked bounded and nonempty; vertices cached.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPolytope {
    constraints: Vec<(Vec<Q>, Q)>,
    vertices: Vec<Vec<Q>>,
}

fn subsets(m: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for last in r - 1..m {
        for mut s in subsets(last, r - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

impl RationalPolytope {
    pub fn new(constraints: Vec<(Vec<Q>, Q)>) -> Result<Self, MirrorError> {
        let n = constraints.first().map(|c| c.0.len()).ok_or(MirrorError::Unbounded)?;
        if n == 0 || constraints.iter().any(|c| c.0.len() != n) {
            return Err(MirrorError::DimensionMismatch);
        }
        let normals = QMatrix::from_rows(constraints.iter().map(|c| c.0.clone()).collect());
        if normals.rank() < n {
            return Err(MirrorError::Unbounded);
        }
        // A pointed recession cone {d : a_i·d ≤ 0} is nonzero iff it has an
        // extreme ray, cut out by n − 1 independent active constraints.
        for sub in subsets(constraints.len(), n - 1) {
            let dirs = if sub.is_empty() {
                vec![vec![Q::one()]]
            } else {
                let rows = QMatrix::from_rows(sub.iter().map(|&i| constraints[i].0.clone()).collect());
                if rows.rank() != n - 1 {
                    continue;
                }
                rows.kernel()
            };
            for d in dirs {
                for sign in [Q::one(), -Q::one()] {
                    let dd: Vec<Q> = d.iter().map(|x| x * &sign).collect();
                    if constraints.iter().all(|(a, _)| !dot(a, &dd).is_positive()) {
                        return Err(MirrorError::Unbounded);
                    }
                }
            }
        }
        let mut vertices: Vec<Vec<Q>> = Vec::new();
        for sub in subsets(constraints.len(), n) {
            let a = QMatrix::from_rows(sub.iter().map(|&i| constraints[i].0.clone()).collect());
            if a.det().is_zero() {
                continue;
            }
            let c: Vec<Q> = sub.iter().map(|&i| constraints[i].1.clone()).collect();
            let v = a.solve(&c).expect("nonsingular");
            if constraints.iter().all(|(a, c)| dot(a, &v) <= *c) && !vertices.contains(&v) {
                vertices.push(v);
            }
        }
        if vertices.is_empty() {
            return Err(MirrorError::Empty);
        }
        vertices.sort();
        Ok(RationalPolytope { constraints, vertices })
    }

    /// `∏ [lo_c, hi_c]`.
    pub fn from_box(lo: &[Q], hi: &[Q]) -> Result<Self, MirrorError> {
        let n = lo.len();
        let mut cs = Vec::new();
        for c in 0..n {
            let mut e = vec![Q::zero(); n];
            e[c] = Q::one();
            cs.push((e.clone(), hi[c].clone()));
            cs.push((e.iter().map(|x| -x).collect(), -lo[c].clone()));
        }
        Self::new(cs)
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    pub fn contains(&self, y: &[Q]) -> bool {
        self.constraints.iter().all(|(a, c)| dot(a, y) <= *c)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Convergence of `Σ a_k z^k` on the Laurent domain over `P`: the stored
/// part is a finite sum, and `v(a_k) + ⟨k,y⟩ ≥ (c − ‖y‖∞)|k|₁ − O(1)` for
/// the tail, so it suffices that `c` exceeds `‖v‖∞` at every vertex `v`.
pub fn converges_on(s: &LaurentSeriesNd, p: &RationalPolytope) -> bool {
    let Some(c) = s.tail_bound() else { return true };
    let reach = p.vertices().iter().flat_map(|v| v.iter().map(|x| x.abs())).max().unwrap_or_else(Q::zero);
    *c > reach
}

/// The line bundle `F(L, ρ)`: slope, shift and holonomy of the section,
/// normalized to have zero affine part at the origin chart.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBundleObj {
    pub slope: QMatrix,
    pub shift: Vec<Q>,
    pub holonomy: Vec<Q>,
}

impl LineBundleObj {
    pub fn of(l: &AffineLagrangian) -> Self {
        LineBundleObj { slope: l.slope().clone(), shift: l.shift().to_vec(), holonomy: l.holonomy().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn tensor(&self, o: &Self) -> Self {
        LineBundleObj {
            slope: self.slope.add(&o.slope),
            shift: self.shift.iter().zip(&o.shift).map(|(a, b)| a + b).collect(),
            holonomy: self.holonomy.iter().zip(&o.holonomy).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn dual(&self) -> Self {
        LineBundleObj {
            slope: self.slope.scale(&-Q::one()),
            shift: self.shift.iter().map(|a| -a).collect(),
            holonomy: self.holonomy.iter().map(|a| Q::one() / a).collect(),
        }
    }

    /// `Hom(F(L_i), F(L_j)) = F(L_j) ⊗ F(L_i)^∨`.
    pub fn hom(from: &Self, to: &Self) -> Self {
        to.tensor(&from.dual())
    }

    /// Trivial bundle: zero slope, integral shift, trivial holonomy.
    pub fn is_unit(&self) -> bool {
        self.slope.is_zero() && self.shift.iter().all(|b| b.is_integer()) && self.holonomy.iter().all(|u| u.is_one())
    }
}

pub fn functor_on_objects(l: &AffineLagrangian) -> Result<LineBundleObj, MirrorError> {
    if !l.slope().is_positive_definite() {
        return Err(MirrorError::NotPositiveDefinite);
    }
    Ok(LineBundleObj::of(l))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSection {
    pub pivot: Vec<BigInt>,
    /// Canonical point `x*` of the coset.
    pub point: Vec<Q>,
    /// `x*` reduced into `[0,1)ⁿ`.
    pub position: Vec<Q>,
    pub series: LaurentSeriesNd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBasis {
    pub bundle: LineBundleObj,
    pub cutoff: Q,
    /// Sorted by position.
    pub sections: Vec<ThetaSection>,
}

impl ThetaBasis {
    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn index_of_position(&self, pos: &[Q]) -> Option<usize> {
        self.sections.iter().position(|s| s.position == pos)
    }

    pub fn to_json(&self) -> Value {
        let secs: Vec<Value> = self
            .sections
            .iter()
            .map(|s| {
                json!({
                    "pivot": s.pivot.iter().map(bigint_to_json).collect::<Vec<_>>(),
                    "position": s.position.iter().map(q_to_json).collect::<Vec<_>>(),
                    "series": s.series.to_json(),
                })
            })
            .collect();
        json!({ "cutoff": q_to_json(&self.cutoff), "size": self.len(), "sections": secs })
    }
}

fn pow_q(u: &Q, e: &BigInt) -> Q {
    num_traits::Pow::pow(u, e.to_i32().expect("exponent fits in i32"))
}

/// The theta basis of `E`, each section truncated to the terms of weight
/// below `cutoff`. The declared tail bound is `cutoff` itself; the true
/// growth is quadratic, so any linear bound holds.
pub fn theta_basis(e: &LineBundleObj, cutoff: &Q) -> Result<ThetaBasis, MirrorError> {
    let d = &e.slope;
    if !d.is_positive_definite() {
        return Err(MirrorError::NotPositiveDefinite);
    }
    let n = e.dim();
    let dinv = d.inverse().expect("positive definite");
    let det = d.det().to_integer().abs();
    // |det|·Zⁿ ⊂ DZⁿ, so the box [0, |det|)ⁿ meets every coset.
    let mut positions: Vec<Vec<Q>> = Vec::new();
    for m in integer_box(&vec![BigInt::zero(); n], &vec![&det - 1; n]) {
        let rhs: Vec<Q> = m.iter().zip(&e.shift).map(|(k, b)| Q::from_integer(k.clone()) - b).collect();
        let pos: Vec<Q> = dinv.mul_vec(&rhs).iter().map(frac_q).collect();
        if !positions.contains(&pos) {
            positions.push(pos);
        }
    }
    positions.sort();
    let two = Q::from_integer(2.into());
    let mut sections = Vec::with_capacity(positions.len());
    for pos in positions {
        let x = canonical_lift_pd(d, &pos);
        let c0 = half_form(d, &x);
        let pivot: Vec<BigInt> = d.mul_vec(&x).iter().zip(&e.shift).map(|(a, b)| (a + b).to_integer()).collect();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for c in 0..n {
            let r = Q::from_integer(ceil_sqrt(&(&two * (cutoff + &c0) * &dinv[(c, c)])));
            lo.push(floor_q(&(-&r - &x[c])));
            hi.push(floor_q(&(&r - &x[c])) + 1);
        }
        let mut terms = Vec::new();
        for l in integer_box(&lo, &hi) {
            let xl: Vec<Q> = x.iter().zip(&l).map(|(a, b)| a + Q::from_integer(b.clone())).collect();
            let w = half_form(d, &xl) - &c0;
            if w >= *cutoff {
                continue;
            }
            let ql: Vec<Q> = l.iter().map(|b| Q::from_integer(b.clone())).collect();
            let k: Vec<BigInt> = d.mul_vec(&ql).iter().zip(&pivot).map(|(a, p)| a.to_integer() + p).collect();
            let mut h = Q::one();
            for c in 0..n {
                h *= pow_q(&e.holonomy[c], &-&l[c]);
            }
            terms.push((k, NovikovElem::monomial(h, w)));
        }
        sections.push(ThetaSection { pivot, point: x, position: pos, series: LaurentSeriesNd::new(terms, Some(cutoff.clone())) });
    }
    Ok(ThetaBasis { bundle: e.clone(), cutoff: cutoff.clone(), sections })
}

/// Structure constants `θ^{(1)}_{j1}·θ^{(2)}_{j2} = Σ_{j3} C θ^{(12)}_{j3}`,
/// each known modulo `q^cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTable {
    pub cutoff: Q,
    pub sizes: (usize, usize, usize),
    /// Positions of the three bases, for matching against other tables.
    pub positions: [Vec<Vec<Q>>; 3],
    pub entries: BTreeMap<(usize, usize, usize), NovikovElem>,
}

impl ThetaTable {
    pub fn get(&self, key: &(usize, usize, usize)) -> NovikovElem {
        self.entries.get(key).cloned().unwrap_or_else(|| NovikovElem::new(Vec::new(), Some(self.cutoff.clone())))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.entries.iter().map(|((a, b, c), v)| json!([a, b, c, v.to_json()])).collect();
        json!({ "cutoff": q_to_json(&self.cutoff), "sizes": [self.sizes.0, self.sizes.1, self.sizes.2], "entries": rows })
    }
}

pub fn theta_multiply(e1: &LineBundleObj, e2: &LineBundleObj, cutoff: &Q) -> Result<ThetaTable, MirrorError> {
    if e1.dim() != e2.dim() {
        return Err(MirrorError::DimensionMismatch);
    }
    if !cutoff.is_positive() {
        return Err(MirrorError::Precondition("cutoff must be positive".into()));
    }
    if e2.is_unit() {
        let b1 = theta_basis(e1, cutoff)?;
        let pos: Vec<Vec<Q>> = b1.sections.iter().map(|s| s.position.clone()).collect();
        let n = e1.dim();
        let entries = (0..b1.len()).map(|j| ((j, 0, j), NovikovElem::new(vec![(Q::zero(), Q::one())], Some(cutoff.clone())))).collect();
        return Ok(ThetaTable {
            cutoff: cutoff.clone(),
            sizes: (b1.len(), 1, b1.len()),
            positions: [pos.clone(), vec![vec![Q::zero(); n]], pos],
            entries,
        });
    }
    let b1 = theta_basis(e1, cutoff)?;
    let b2 = theta_basis(e2, cutoff)?;
    let e3 = e1.tensor(e2);
    let b3 = theta_basis(&e3, cutoff)?;
    let dinv3 = e3.slope.inverse().expect("positive definite");
    let coset = |m: &[BigInt]| -> Vec<Q> {
        let rhs: Vec<Q> = m.iter().zip(&e3.shift).map(|(k, b)| Q::from_integer(k.clone()) - b).collect();
        dinv3.mul_vec(&rhs).iter().map(frac_q).collect()
    };
    let mut entries = BTreeMap::new();
    for (j1, s1) in b1.sections.iter().enumerate() {
        for (j2, s2) in b2.sections.iter().enumerate() {
            let prod = s1.series.mul_truncated(&s2.series, cutoff);
            let consts: Vec<NovikovElem> =
                b3.sections.iter().map(|s3| prod.coeff(&s3.pivot).truncate(cutoff)).collect();
            // The product must be Σ C_j θ_j modulo q^cutoff at every monomial.
            for (m, a) in prod.terms() {
                let j3 = b3.index_of_position(&coset(m)).expect("coset of the tensor bundle");
                let expect = consts[j3].mul(&b3.sections[j3].series.coeff(m)).truncate(cutoff);
                if expect != a.truncate(cutoff) {
                    let worst = a.sub(&expect);
                    let lead = match worst.val() {
                        crate::novikov::Valuation::Finite(v) => v,
                        _ => Q::zero(),
                    };
                    return Err(MirrorError::TruncationTooCoarse { required: cutoff + cutoff - lead });
                }
            }
            for (j3, c) in consts.into_iter().enumerate() {
                if !c.is_zero() {
                    entries.insert((j1, j2, j3), c);
                }
            }
        }
    }
    let pos = |b: &ThetaBasis| b.sections.iter().map(|s| s.position.clone()).collect::<Vec<_>>();
    Ok(ThetaTable {
        cutoff: cutoff.clone(),
        sizes: (b1.len(), b2.len(), b3.len()),
        positions: [pos(&b1), pos(&b2), pos(&b3)],
        entries,
    })
}

/// `(k, −λ + ⟨k,y⟩ + f₁(y) − f₂(y))` for each stored term `c·q^λ` of
/// `a_k`, in storage order; `f₁, f₂` are the potentials of `L₀, L₁`.
pub fn spectrum_terms(alpha: &LaurentSeriesNd, l0: &AffineLagrangian, l1: &AffineLagrangian, y: &[Q]) -> Vec<(Vec<BigInt>, Q)> {
    let base = l0.potential(y) - l1.potential(y);
    let mut out = Vec::new();
    for (k, a) in alpha.terms() {
        let ky: Q = k.iter().zip(y).map(|(a, b)| Q::from_integer(a.clone()) * b).sum();
        for (lambda, _) in a.terms() {
            out.push((k.clone(), -lambda + &ky + &base));
        }
    }
    out
}

/// Spectral values sorted descending.
pub fn spectrum(alpha: &LaurentSeriesNd, l0: &AffineLagrangian, l1: &AffineLagrangian, y: &[Q]) -> Vec<Q> {
    let mut v: Vec<Q> = spectrum_terms(alpha, l0, l1, y).into_iter().map(|(_, s)| s).collect();
    v.sort_by(|a, b| b.cmp(a));
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompareStatus {
    Equal,
    Differ,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareEntry {
    pub key: (usize, usize, usize),
    pub fo: NovikovElem,
    pub theta: NovikovElem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub status: CompareStatus,
    pub entries: Vec<CompareEntry>,
    pub first_discrepancy: Option<CompareEntry>,
}

impl CompareReport {
    pub fn equal(&self) -> bool {
        self.status == CompareStatus::Equal
    }

    pub fn to_json(&self) -> Value {
        let ent = |e: &CompareEntry| {
            json!({
                "x0": format!("p{}", e.key.0),
                "x1": format!("p{}", e.key.1),
                "x2": format!("p{}", e.key.2),
                "fo": e.fo.to_json(),
                "theta": e.theta.to_json(),
            })
        };
        json!({
            "status": match self.status { CompareStatus::Equal => "EQUAL", CompareStatus::Differ => "DIFFER" },
            "tables": self.entries.iter().map(ent).collect::<Vec<_>>(),
            "first_discrepancy": self.first_discrepancy.as_ref().map(ent),
        })
    }
}

/// Both sides of the comparison: rescaled Fukaya–Oh `m₂` and theta
/// structure constants, keyed by generator indices (sorted by position on
/// both sides), each entry truncated at its own precision.
#[derive(Clone, Debug, PartialEq)]
pub struct MirrorTables {
    pub fo: BTreeMap<(usize, usize, usize), NovikovElem>,
    pub theta: BTreeMap<(usize, usize, usize), NovikovElem>,
}

/// Computes both tables for a convex-ordered triple. The Fukaya–Oh side
/// is rescaled to `[x]_new = q^{−c(x)}[x]`, `c(x) = ½x̃ᵀDx̃` at the canonical
/// lift, which multiplies the coefficient of `x₂` in `m₂(x₀,x₁)` by
/// `q^{c(x₂) − c(x₀) − c(x₁)}` and moves its precision to `Λ + c(x₂) − c(x₀) − c(x₁)`.
pub fn mirror_tables(l: [&AffineLagrangian; 3], cutoff: &Q) -> Result<MirrorTables, MirrorError> {
    if l.iter().any(|x| x.dim() != l[0].dim()) {
        return Err(MirrorError::DimensionMismatch);
    }
    for (a, b) in [(0, 1), (1, 2)] {
        if !l[b].slope().sub(l[a].slope()).is_positive_definite() {
            return Err(MirrorError::Precondition(format!("increment {a}->{b} is not positive definite")));
        }
    }
    if !cutoff.is_positive() {
        return Err(MirrorError::Precondition("cutoff must be positive".into()));
    }
    let objs = [l[0].clone(), l[1].clone(), l[2].clone()];
    let cat = fo_category(&objs, cutoff)?;
    let d = |i: usize, j: usize| objs[j].slope().sub(objs[i].slope());
    let vals = |i: usize, j: usize| -> Vec<Q> { cat.points[&(i, j)].iter().map(|p| p.value(&d(i, j))).collect() };
    let (c01, c12, c02) = (vals(0, 1), vals(1, 2), vals(0, 2));
    let m2 = cat.m2();
    let basis = m2.source().clone();
    let mut fo = BTreeMap::new();
    let mut max_shift = Q::zero();
    for a in 0..c01.len() {
        for b in 0..c12.len() {
            let ia = basis.lookup(&format!("L0>L1:p{a}")).map_err(FoError::from)?;
            let ib = basis.lookup(&format!("L1>L2:p{b}")).map_err(FoError::from)?;
            for c in 0..c02.len() {
                let s = &c02[c] - &c01[a] - &c12[b];
                let ic = basis.lookup(&format!("L0>L2:p{c}")).map_err(FoError::from)?;
                let raw = m2.get(&[ia, ib]).and_then(|v| v.get(&ic)).cloned();
                let prec = cutoff + &s;
                let entry = match raw {
                    Some(v) => v.shift(&s),
                    None => NovikovElem::new(Vec::new(), Some(prec.clone())),
                };
                debug_assert_eq!(entry.cutoff(), Some(&prec));
                if s > max_shift {
                    max_shift = s.clone();
                }
                fo.insert((a, b, c), entry);
            }
        }
    }
    let e = [LineBundleObj::of(l[0]), LineBundleObj::of(l[1]), LineBundleObj::of(l[2])];
    let e01 = LineBundleObj::hom(&e[0], &e[1]);
    let e12 = LineBundleObj::hom(&e[1], &e[2]);
    let table = theta_multiply(&e01, &e12, &(cutoff + &max_shift))?;
    let positions = |i: usize, j: usize| -> Vec<Vec<Q>> { cat.points[&(i, j)].iter().map(|p| p.position.clone()).collect() };
    if table.positions != [positions(0, 1), positions(1, 2), positions(0, 2)] {
        return Err(MirrorError::Precondition("theta index sets do not match the intersection points".into()));
    }
    let theta = fo
        .iter()
        .map(|(k, v)| (*k, table.get(k).truncate(v.cutoff().expect("truncated"))))
        .collect();
    Ok(MirrorTables { fo, theta })
}

/// Entrywise equality, first discrepancy in key order.
pub fn compare_tables(t: &MirrorTables) -> CompareReport {
    let mut entries = Vec::new();
    let mut first = None;
    for (k, fo) in &t.fo {
        let theta = t.theta.get(k).cloned().unwrap_or_else(NovikovElem::zero);
        let e = CompareEntry { key: *k, fo: fo.clone(), theta };
        if first.is_none() && e.fo != e.theta {
            first = Some(e.clone());
        }
        entries.push(e);
    }
    CompareReport {
        status: if first.is_none() { CompareStatus::Equal } else { CompareStatus::Differ },
        entries,
        first_discrepancy: first,
    }
}

pub fn mirror_compare(l0: &AffineLagrangian, l1: &AffineLagrangian, l2: &AffineLagrangian, cutoff: &Q) -> Result<CompareReport, MirrorError> {
    Ok(compare_tables(&mirror_tables([l0, l1, l2], cutoff)?))
}

/// Short human form `Σ c·q^e`, for diagnostics.
pub fn describe(e: &NovikovElem) -> String {
    let parts: Vec<String> = e.terms().iter().map(|(x, c)| format!("{}q^{}", fmt_q(c), fmt_q(x))).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn ks(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn line(a: i64, b: Q) -> AffineLagrangian {
        AffineLagrangian::line(a, b, Q::one()).unwrap()
    }

    #[test]
    fn convergence_examples() {
        let p = RationalPolytope::from_box(&[qi(-2)], &[qi(-1)]).unwrap();
        let c = LaurentSeriesNd::constant(1, NovikovElem::one());
        assert!(converges_on(&c, &p));
        let s = LaurentSeriesNd::new([(ks(&[1]), NovikovElem::one())], Some(q(1, 4)));
        assert!(!converges_on(&s, &p));
        let s = LaurentSeriesNd::new([(ks(&[1]), NovikovElem::one())], Some(qi(3)));
        assert!(converges_on(&s, &p));
        let geo = LaurentSeriesNd::new((-5i64..=5).map(|k| (ks(&[k]), NovikovElem::q_pow(qi(k * k)))), Some(qi(10)));
        assert!(converges_on(&geo, &RationalPolytope::from_box(&[qi(-3)], &[qi(2)]).unwrap()));
    }

    #[test]
    fn polytope_checks() {
        let half = RationalPolytope::new(vec![(vec![qi(1)], qi(0))]);
        assert_eq!(half, Err(MirrorError::Unbounded));
        let empty = RationalPolytope::new(vec![(vec![qi(1)], qi(0)), (vec![qi(-1)], qi(-1))]);
        assert_eq!(empty, Err(MirrorError::Empty));
        let strip = RationalPolytope::new(vec![(vec![qi(1), qi(0)], qi(1)), (vec![qi(-1), qi(0)], qi(0))]);
        assert_eq!(strip, Err(MirrorError::Unbounded));
        let tri = RationalPolytope::new(vec![
            (vec![qi(-1), qi(0)], qi(0)),
            (vec![qi(0), qi(-1)], qi(0)),
            (vec![qi(1), qi(1)], qi(1)),
        ])
        .unwrap();
        assert_eq!(tri.vertices().len(), 3);
        assert!(tri.contains(&[q(1, 3), q(1, 3)]));
    }

    #[test]
    fn basis_sizes() {
        for (a, n) in [(1, 1), (3, 3)] {
            let e = functor_on_objects(&line(a, qi(0))).unwrap();
            assert_eq!(theta_basis(&e, &qi(5)).unwrap().len(), n);
        }
        let l = AffineLagrangian::untwisted(QMatrix::from_i64(&[vec![2, 1], vec![1, 2]]), vec![qi(0), qi(0)]).unwrap();
        assert_eq!(theta_basis(&functor_on_objects(&l).unwrap(), &qi(3)).unwrap().len(), 3);
        assert_eq!(functor_on_objects(&line(0, qi(0))), Err(MirrorError::NotPositiveDefinite));
    }

    #[test]
    fn theta_zero_and_truncation_monotone() {
        let e = functor_on_objects(&line(1, qi(0))).unwrap();
        let small = theta_basis(&e, &qi(5)).unwrap();
        let big = theta_basis(&e, &qi(12)).unwrap();
        let t = &small.sections[0].series;
        // θ₀ = Σ q^{m²/2} z^m.
        assert_eq!(t.coeff(&ks(&[0])), NovikovElem::one());
        assert_eq!(t.coeff(&ks(&[3])), NovikovElem::q_pow(q(9, 2)));
        assert_eq!(t.len(), 7);
        for (k, a) in t.terms() {
            assert_eq!(big.sections[0].series.coeff(k), *a);
        }
    }

    #[test]
    fn unit_table_is_identity() {
        let e = functor_on_objects(&line(2, q(1, 3))).unwrap();
        let unit = LineBundleObj::of(&line(0, qi(1)));
        let t = theta_multiply(&e, &unit, &qi(5)).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert!(t.entries.iter().all(|((a, _, c), v)| a == c && v.terms() == [(qi(0), qi(1))]));
    }

    #[test]
    fn spectrum_examples() {
        let l0 = line(0, qi(0));
        let l1 = line(1, qi(0));
        assert!(spectrum(&LaurentSeriesNd::new([], None), &l0, &l1, &[qi(0)]).is_empty());
        let s = LaurentSeriesNd::new([(ks(&[2]), NovikovElem::q_pow(q(3, 2)))], None);
        // −3/2 + 2·(1/2) + 0 − 1/8.
        assert_eq!(spectrum(&s, &l0, &l1, &[q(1, 2)]), vec![q(-5, 8)]);
        let e = functor_on_objects(&l1).unwrap();
        let th = &theta_basis(&e, &qi(5)).unwrap().sections[0].series;
        let sp = spectrum(th, &l0, &l0, &[qi(0)]);
        assert_eq!(sp[0], qi(0));
        assert_eq!(sp.len(), th.len());
    }

    #[test]
    fn compare_small() {
        let r = mirror_compare(&line(0, qi(0)), &line(1, qi(0)), &line(2, qi(0)), &qi(8)).unwrap();
        assert!(r.equal(), "{:?}", r.first_discrepancy);
        let bad = mirror_compare(&line(0, qi(0)), &line(2, qi(0)), &line(1, qi(0)), &qi(8));
        assert!(matches!(bad, Err(MirrorError::Precondition(_))));
    }
}
