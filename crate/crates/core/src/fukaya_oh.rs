//! Affine Lagrangian sections of `T*Y / (T_Y^Z)^∨` over `Y = Rⁿ/Zⁿ` and
//! their pre-category: intersection points graded by Morse index, and `m₂`
//! by summing lattice triangles in the universal cover.
//!
//! Conventions. The section of `f = ½yᵀAy + bᵀy` meets the section of
//! `f' = ½yᵀA'y + b'ᵀy` (taken in this order) where `Dy + β ∈ Zⁿ`, with
//! `D = A' − A` and `β = b' − b`. Each intersection point carries the
//! canonical lift `x̃` minimizing `½x̃ᵀDx̃` among its lifts; `½x̃ᵀDx̃` is the
//! value of the difference of potentials on the branch through `x̃`. The
//! degree is the number of negative eigenvalues of `D`, so consecutive
//! positive-definite increments give degree 0 throughout.

use crate::ainfty::{AInftyError, AInftyStructure, GradedBasis, MultilinearOp, PreCategory};
use crate::novikov::NovikovElem;
use crate::rational::{floor_q, frac_q, integer_box, q_from_json, q_to_json, QMatrix, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoError {
    #[error("invalid Lagrangian: {0}")]
    Invalid(String),
    #[error("objects {0} and {1} are not transversal")]
    NotTransversal(usize, usize),
    #[error("weight form is not positive definite for this triple")]
    Unbounded,
    #[error("not certifiable: {0}")]
    NotCertifiable(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Algebra(#[from] AInftyError),
}

/// The graph of `d(½yᵀAy + bᵀy)` with a rank-one local system whose
/// holonomy around the `c`-th fiber direction is `holonomy[c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLagrangian {
    slope: QMatrix,
    shift: Vec<Q>,
    holonomy: Vec<Q>,
}

impl AffineLagrangian {
    pub fn new(slope: QMatrix, shift: Vec<Q>, holonomy: Vec<Q>) -> Result<Self, FoError> {
        let n = slope.rows();
        if !slope.is_square() || n == 0 {
            return Err(FoError::Invalid("slope must be a nonempty square matrix".into()));
        }
        if !slope.is_symmetric() {
            return Err(FoError::Invalid("slope must be symmetric".into()));
        }
        if !slope.is_integral() {
            return Err(FoError::Invalid("slope must be integral".into()));
        }
        if shift.len() != n || holonomy.len() != n {
            return Err(FoError::Invalid(format!("shift and holonomy need length {n}")));
        }
        if holonomy.iter().any(|u| u.is_zero()) {
            return Err(FoError::Invalid("holonomy must be nonzero".into()));
        }
        Ok(AffineLagrangian { slope, shift, holonomy })
    }

    /// One-dimensional section `y ↦ a·y + b` with holonomy `u`.
    pub fn line(a: i64, b: Q, u: Q) -> Result<Self, FoError> {
        Self::new(QMatrix::from_i64(&[vec![a]]), vec![b], vec![u])
    }

    /// Trivial local system.
    pub fn untwisted(slope: QMatrix, shift: Vec<Q>) -> Result<Self, FoError> {
        let n = shift.len();
        Self::new(slope, shift, vec![Q::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.slope.rows()
    }

    pub fn slope(&self) -> &QMatrix {
        &self.slope
    }

    pub fn shift(&self) -> &[Q] {
        &self.shift
    }

    pub fn holonomy(&self) -> &[Q] {
        &self.holonomy
    }

    /// `f(y) = ½yᵀAy + bᵀy`.
    pub fn potential(&self, y: &[Q]) -> Q {
        let ay = self.slope.mul_vec(y);
        let quad: Q = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let lin: Q = y.iter().zip(&self.shift).map(|(a, b)| a * b).sum();
        quad / Q::from_integer(2.into()) + lin
    }

    pub fn to_json(&self) -> Value {
        let mat: Vec<Value> = (0..self.dim()).map(|i| Value::Array(self.slope.row(i).iter().map(q_to_json).collect())).collect();
        json!({
            "slope": mat,
            "shift": self.shift.iter().map(q_to_json).collect::<Vec<_>>(),
            "holonomy": self.holonomy.iter().map(q_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, FoError> {
        let qs = |v: &Value| -> Result<Vec<Q>, FoError> {
            v.as_array()
                .ok_or_else(|| FoError::Schema("expected an array".into()))?
                .iter()
                .map(|x| q_from_json(x).ok_or_else(|| FoError::Schema(format!("bad rational {x}"))))
                .collect()
        };
        let rows = v["slope"].as_array().ok_or_else(|| FoError::Schema("missing slope".into()))?;
        let slope = QMatrix::from_rows(rows.iter().map(qs).collect::<Result<_, _>>()?);
        let shift = qs(&v["shift"])?;
        let holonomy = if v.get("holonomy").is_some() { qs(&v["holonomy"])? } else { vec![Q::one(); shift.len()] };
        Self::new(slope, shift, holonomy)
    }
}

/// A point of `L_i ∩ L_j` for `i < j` in sequence order.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionPoint {
    /// Representative in `[0,1)ⁿ`.
    pub position: Vec<Q>,
    /// Lift minimizing `½x̃ᵀDx̃`; ties broken lexicographically.
    pub lift: Vec<Q>,
    pub degree: i64,
}

impl IntersectionPoint {
    /// `½x̃ᵀDx̃` at the canonical lift.
    pub fn value(&self, d: &QMatrix) -> Q {
        half_form(d, &self.lift)
    }
}

pub fn half_form(d: &QMatrix, x: &[Q]) -> Q {
    let dx = d.mul_vec(x);
    x.iter().zip(&dx).map(|(a, b)| a * b).sum::<Q>() / Q::from_integer(2.into())
}

/// Smallest integer `r ≥ 0` with `r² ≥ x`.
pub fn ceil_sqrt(x: &Q) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    let f = floor_q(x);
    let mut r = f.sqrt();
    while Q::from_integer(&r * &r) < *x {
        r += 1;
    }
    r
}

/// The lift of `y + Zⁿ` minimizing `½xᵀDx` (`D` positive definite), ties
/// broken by lexicographically smallest lift.
pub fn canonical_lift_pd(d: &QMatrix, y: &[Q]) -> Vec<Q> {
    let base: Vec<Q> = y.iter().map(frac_q).collect();
    let bound = half_form(d, &base);
    let dinv = d.inverse().expect("positive definite");
    // ½xᵀDx ≤ bound forces x_c² ≤ 2·bound·(D⁻¹)_cc.
    let lo_hi: Vec<(BigInt, BigInt)> = (0..base.len())
        .map(|c| {
            let r = ceil_sqrt(&(Q::from_integer(2.into()) * &bound * &dinv[(c, c)]));
            let r = Q::from_integer(r);
            (floor_q(&(-&r - &base[c])), floor_q(&(&r - &base[c])) + 1)
        })
        .collect();
    let (lo, hi): (Vec<_>, Vec<_>) = lo_hi.into_iter().unzip();
    let mut best: Option<(Q, Vec<Q>)> = None;
    for l in integer_box(&lo, &hi) {
        let x: Vec<Q> = base.iter().zip(&l).map(|(b, k)| b + Q::from_integer(k.clone())).collect();
        let v = half_form(d, &x);
        let better = match &best {
            None => true,
            Some((bv, bx)) => v < *bv || (v == *bv && x < *bx),
        };
        if better {
            best = Some((v, x));
        }
    }
    best.expect("box contains the base point").1
}

/// Like [`canonical_lift_pd`] but for indefinite `D` the lift is just the
/// `[0,1)ⁿ` representative (no minimum exists).
pub fn canonical_lift(d: &QMatrix, y: &[Q]) -> Vec<Q> {
    if d.is_positive_definite() {
        canonical_lift_pd(d, y)
    } else {
        y.iter().map(frac_q).collect()
    }
}

fn difference(li: &AffineLagrangian, lj: &AffineLagrangian) -> (QMatrix, Vec<Q>) {
    let d = lj.slope.sub(&li.slope);
    let beta = lj.shift.iter().zip(&li.shift).map(|(a, b)| a - b).collect();
    (d, beta)
}

pub fn transversal(seq: &[AffineLagrangian]) -> bool {
    (0..seq.len()).all(|i| (i + 1..seq.len()).all(|j| !seq[j].slope.sub(&seq[i].slope).det().is_zero()))
}

/// The `|det(A_j − A_i)|` points of `L_i ∩ L_j`, sorted by position.
pub fn intersections(li: &AffineLagrangian, lj: &AffineLagrangian) -> Result<Vec<IntersectionPoint>, FoError> {
    if li.dim() != lj.dim() {
        return Err(FoError::Invalid("dimension mismatch".into()));
    }
    let (d, beta) = difference(li, lj);
    let dinv = d.inverse().ok_or(FoError::NotTransversal(0, 1))?;
    let n = d.rows();
    let degree = d.inertia().1 as i64;
    // m = Dy + β ranges over the image of the unit cube.
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for c in 0..n {
        let neg: Q = d.row(c).iter().filter(|x| x.is_negative()).sum();
        let pos: Q = d.row(c).iter().filter(|x| x.is_positive()).sum();
        lo.push(floor_q(&(&beta[c] + neg)));
        hi.push(floor_q(&(&beta[c] + pos)) + 1);
    }
    let mut out = Vec::new();
    for m in integer_box(&lo, &hi) {
        let rhs: Vec<Q> = m.iter().zip(&beta).map(|(k, b)| Q::from_integer(k.clone()) - b).collect();
        let y = dinv.mul_vec(&rhs);
        if y.iter().all(|t| !t.is_negative() && *t < Q::one()) {
            let lift = canonical_lift(&d, &y);
            out.push(IntersectionPoint { position: y, lift, degree });
        }
    }
    out.sort_by(|a, b| a.position.cmp(&b.position));
    Ok(out)
}

fn point_label(j: usize) -> String {
    format!("p{j}")
}

fn pow_q(u: &Q, e: &BigInt) -> Q {
    let e = e.to_i32().expect("holonomy exponent fits in i32");
    num_traits::Pow::pow(u, e)
}

/// `m₂(x₀, x₁)` for the triple `(L₀, L₁, L₂)` as a map from the index of
/// `x₂` in `intersections(L₀, L₂)` to its coefficient, all terms with
/// weight below `cutoff`.
///
/// With `x̃₀` fixed at its canonical lift and `x̃₁` ranging over its lifts
/// `x̃₁ + k`, the triangle closes at `x̃₂ = D₀₂⁻¹(D₀₁x̃₀ + D₁₂(x̃₁+k))` and has
/// area `w = ½(x̃₂−x̃₀)ᵀD₀₁(x̃₂−x̃₀) + ½(x̃₂−x̃₁)ᵀD₁₂(x̃₂−x̃₁)`, which equals
/// `½vᵀMv` for `v = x̃₁ + k − x̃₀` and `M⁻¹ = D₀₁⁻¹ + D₁₂⁻¹`. Writing
/// `x̃₂ = lift(x₂) + t`, the boundary picks up `u₀^{−t}·u₁^{k}·u₂^{t−k}`.
pub fn m2_entry(
    l: [&AffineLagrangian; 3],
    x0: &IntersectionPoint,
    x1: &IntersectionPoint,
    cutoff: &Q,
) -> Result<BTreeMap<usize, NovikovElem>, FoError> {
    let pts02 = intersections(l[0], l[2]).map_err(|_| FoError::NotTransversal(0, 2))?;
    let mut out = BTreeMap::new();
    if pts02.iter().all(|p| p.degree != x0.degree + x1.degree) {
        return Ok(out);
    }
    let (d01, _) = difference(l[0], l[1]);
    let (d12, _) = difference(l[1], l[2]);
    let (d02, _) = difference(l[0], l[2]);
    let i01 = d01.inverse().ok_or(FoError::NotTransversal(0, 1))?;
    let i12 = d12.inverse().ok_or(FoError::NotTransversal(1, 2))?;
    let i02 = d02.inverse().ok_or(FoError::NotTransversal(0, 2))?;
    let minv = i01.add(&i12);
    if !minv.is_positive_definite() {
        return Err(FoError::Unbounded);
    }
    let n = d01.rows();
    let two = Q::from_integer(2.into());
    let delta: Vec<Q> = x1.lift.iter().zip(&x0.lift).map(|(a, b)| a - b).collect();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for c in 0..n {
        let r = Q::from_integer(ceil_sqrt(&(&two * cutoff * &minv[(c, c)])));
        lo.push(floor_q(&(-&r - &delta[c])));
        hi.push(floor_q(&(&r - &delta[c])) + 1);
    }
    let index: BTreeMap<&Vec<Q>, usize> = pts02.iter().enumerate().map(|(j, p)| (&p.position, j)).collect();
    let mut terms: BTreeMap<usize, Vec<(Q, Q)>> = BTreeMap::new();
    for k in integer_box(&lo, &hi) {
        let x1k: Vec<Q> = x1.lift.iter().zip(&k).map(|(a, b)| a + Q::from_integer(b.clone())).collect();
        let a = d01.mul_vec(&x0.lift);
        let b = d12.mul_vec(&x1k);
        let sum: Vec<Q> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let x2 = i02.mul_vec(&sum);
        let e0: Vec<Q> = x2.iter().zip(&x0.lift).map(|(p, q)| p - q).collect();
        let e1: Vec<Q> = x2.iter().zip(&x1k).map(|(p, q)| p - q).collect();
        let w = half_form(&d01, &e0) + half_form(&d12, &e1);
        if w >= *cutoff {
            continue;
        }
        let pos: Vec<Q> = x2.iter().map(frac_q).collect();
        let j = *index.get(&pos).expect("closing point is an intersection point");
        if pts02[j].degree != x0.degree + x1.degree {
            continue;
        }
        let t: Vec<BigInt> = x2.iter().zip(&pts02[j].lift).map(|(p, q)| (p - q).to_integer()).collect();
        let mut h = Q::one();
        for c in 0..n {
            h *= pow_q(&l[0].holonomy[c], &-&t[c]);
            h *= pow_q(&l[1].holonomy[c], &k[c]);
            h *= pow_q(&l[2].holonomy[c], &(&t[c] - &k[c]));
        }
        terms.entry(j).or_default().push((w, h));
    }
    for (j, ts) in terms {
        let e = NovikovElem::new(ts, Some(cutoff.clone()));
        if !e.is_zero() {
            out.insert(j, e);
        }
    }
    Ok(out)
}

/// All intersection data and `m₂` tables for a transversal sequence, as
/// an A∞-pre-category (objects `L0, L1, …`, generators `p{j}`).
#[derive(Clone, Debug)]
pub struct FoCategory {
    pub objects: Vec<AffineLagrangian>,
    pub points: BTreeMap<(usize, usize), Vec<IntersectionPoint>>,
    pub category: PreCategory<NovikovElem>,
    pub cutoff: Q,
}

pub fn fo_category(objects: &[AffineLagrangian], cutoff: &Q) -> Result<FoCategory, FoError> {
    let k = objects.len();
    if objects.iter().any(|o| o.dim() != objects[0].dim()) {
        return Err(FoError::Invalid("dimension mismatch".into()));
    }
    for i in 0..k {
        for j in i + 1..k {
            if objects[j].slope.sub(&objects[i].slope).det().is_zero() {
                return Err(FoError::NotTransversal(i, j));
            }
        }
    }
    let mut pc = PreCategory::new((0..k).map(|i| format!("L{i}")).collect());
    let mut points = BTreeMap::new();
    for i in 0..k {
        for j in i + 1..k {
            let pts = intersections(&objects[i], &objects[j])?;
            // Every point of a pair has the same index, so m₁ has nothing to hit.
            assert!(pts.windows(2).all(|w| w[0].degree == w[1].degree), "m1 must vanish");
            let basis = GradedBasis::new(pts.iter().enumerate().map(|(x, p)| (point_label(x), p.degree)))?;
            pc.set_hom(i, j, basis)?;
            points.insert((i, j), pts);
        }
    }
    for mask in 1u64..(1u64 << k) {
        if mask.count_ones() >= 2 {
            pc.add_transversal((0..k).filter(|b| mask >> b & 1 == 1).collect());
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let trip = [&objects[i], &objects[j], &objects[l]];
                for (a, x0) in points[&(i, j)].iter().enumerate() {
                    for (b, x1) in points[&(j, l)].iter().enumerate() {
                        for (c, v) in m2_entry(trip, x0, x1, cutoff)? {
                            pc.add_composition(&[i, j, l], &[&point_label(a), &point_label(b)], &point_label(c), &v)?;
                        }
                    }
                }
            }
        }
    }
    Ok(FoCategory { objects: objects.to_vec(), points, category: pc, cutoff: cutoff.clone() })
}

impl FoCategory {
    pub fn structure(&self) -> AInftyStructure<NovikovElem> {
        let seq: Vec<usize> = (0..self.objects.len()).collect();
        self.category.assemble(&seq).expect("consistent by construction")
    }

    pub fn m2(&self) -> MultilinearOp<NovikovElem> {
        self.structure().op_or_zero(2)
    }

    /// `½x̃ᵀDx̃` at every basis element of the assembled structure, in
    /// basis order.
    pub fn assembled_values(&self) -> Vec<Q> {
        let mut out = Vec::new();
        let k = self.objects.len();
        for i in 0..k {
            for j in i + 1..k {
                let (d, _) = difference(&self.objects[i], &self.objects[j]);
                out.extend(self.points[&(i, j)].iter().map(|p| p.value(&d)));
            }
        }
        out
    }

    /// `{"points": {"i,j": [...]}, "m2": [[i,j,l, x0, x1, x2, series]]}`.
    pub fn to_json(&self) -> Value {
        let mut pts = serde_json::Map::new();
        for ((i, j), ps) in &self.points {
            let arr: Vec<Value> = ps
                .iter()
                .enumerate()
                .map(|(x, p)| {
                    json!({
                        "label": point_label(x),
                        "position": p.position.iter().map(q_to_json).collect::<Vec<_>>(),
                        "lift": p.lift.iter().map(q_to_json).collect::<Vec<_>>(),
                        "degree": p.degree,
                    })
                })
                .collect();
            pts.insert(format!("{i},{j}"), Value::Array(arr));
        }
        json!({ "cutoff": q_to_json(&self.cutoff), "points": pts, "m2": self.m2().entries_json() })
    }
}

/// Outcome of [`mk_vanishing_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingCertificate {
    pub k: usize,
    pub generator_degree: i64,
    pub target_degree: i64,
    pub pairs_checked: usize,
}

impl VanishingCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "generator_degree": self.generator_degree,
            "target_degree": self.target_degree,
            "pairs_checked": self.pairs_checked,
            "certified": true,
        })
    }
}

/// Certifies `m_k = 0` (`k ≥ 3`) on a convex-ordered sequence: every
/// generator has degree 0 while `m_k` lands in degree `2 − k < 0`.
pub fn mk_vanishing_certificate(seq: &[AffineLagrangian], k: usize) -> Result<VanishingCertificate, FoError> {
    if k < 3 {
        return Err(FoError::NotCertifiable(format!("k = {k} is below 3")));
    }
    for (i, w) in seq.windows(2).enumerate() {
        if !w[1].slope.sub(&w[0].slope).is_positive_definite() {
            return Err(FoError::NotCertifiable(format!("increment {i}->{} is not positive definite", i + 1)));
        }
    }
    let mut pairs = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            for p in intersections(&seq[i], &seq[j])? {
                if p.degree != 0 {
                    return Err(FoError::NotCertifiable(format!("generator of degree {} in ({i},{j})", p.degree)));
                }
            }
            pairs += 1;
        }
    }
    Ok(VanishingCertificate { k, generator_degree: 0, target_degree: 2 - k as i64, pairs_checked: pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn line(a: i64) -> AffineLagrangian {
        AffineLagrangian::line(a, Q::zero(), Q::one()).unwrap()
    }

    #[test]
    fn transversality() {
        assert!(transversal(&[line(0), line(1), line(2)]));
        assert!(!transversal(&[line(1), line(1)]));
        let a = AffineLagrangian::untwisted(QMatrix::from_i64(&[vec![0, 0], vec![0, 0]]), vec![qi(0), qi(0)]).unwrap();
        let b = AffineLagrangian::untwisted(QMatrix::from_i64(&[vec![1, 0], vec![0, -1]]), vec![qi(0), qi(0)]).unwrap();
        assert!(transversal(&[a, b]));
    }

    #[test]
    fn intersection_examples() {
        let p = intersections(&line(0), &line(1)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].position.clone(), p[0].degree), (vec![qi(0)], 0));
        let p = intersections(&line(0), &line(2)).unwrap();
        let pos: Vec<Q> = p.iter().map(|x| x.position[0].clone()).collect();
        assert_eq!(pos, vec![qi(0), q(1, 2)]);
        assert!(p.iter().all(|x| x.degree == 0));
        let p = intersections(&line(1), &line(0)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].degree, 1);
        assert!(matches!(intersections(&line(1), &line(1)), Err(FoError::NotTransversal(..))));
    }

    #[test]
    fn canonical_lift_ties() {
        let d = QMatrix::from_i64(&[vec![2]]);
        assert_eq!(canonical_lift_pd(&d, &[q(1, 2)]), vec![q(-1, 2)]);
        assert_eq!(canonical_lift_pd(&d, &[q(3, 4)]), vec![q(-1, 4)]);
        assert_eq!(ceil_sqrt(&q(9, 1)), BigInt::from(3));
        assert_eq!(ceil_sqrt(&q(91, 10)), BigInt::from(4));
    }

    #[test]
    fn m2_leading_term() {
        let ls = [line(0), line(1), line(2)];
        let x0 = &intersections(&ls[0], &ls[1]).unwrap()[0];
        let x1 = &intersections(&ls[1], &ls[2]).unwrap()[0];
        let out = m2_entry([&ls[0], &ls[1], &ls[2]], x0, x1, &qi(10)).unwrap();
        // w(k) = ½k²·d01·d12/d02 = k²/4; even k close at 0, odd k at 1/2.
        let even: Vec<(Q, Q)> = vec![(qi(0), qi(1)), (qi(1), qi(2)), (qi(4), qi(2)), (qi(9), qi(2))];
        let odd: Vec<(Q, Q)> = vec![(q(1, 4), qi(2)), (q(9, 4), qi(2)), (q(25, 4), qi(2))];
        assert_eq!(out[&0].terms(), &even[..]);
        assert_eq!(out[&1].terms(), &odd[..]);
    }

    #[test]
    fn certificate() {
        let c = mk_vanishing_certificate(&[line(0), line(1), line(2), line(3)], 3).unwrap();
        assert_eq!(c.target_degree, -1);
        let err = mk_vanishing_certificate(&[line(0), line(2), line(1)], 3).unwrap_err();
        assert!(err.to_string().contains("not certifiable"));
    }

    #[test]
    fn json_roundtrip() {
        let l = AffineLagrangian::new(QMatrix::from_i64(&[vec![2, 1], vec![1, 2]]), vec![q(1, 2), qi(0)], vec![qi(3), q(-1, 2)]).unwrap();
        assert_eq!(AffineLagrangian::from_json(&l.to_json()).unwrap(), l);
    }
}
