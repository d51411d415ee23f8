//! The Morse pre-category of the circle `R/Z`: critical points of
//! trigonometric polynomials, the Morse differential and the Y-shaped
//! gradient-tree product `m₂`, unweighted over `Q` or weighted over the
//! Novikov field.
//!
//! Conventions: `U_x` is the descending basin of `x` (points whose downward
//! flow ends at `x`), `S_x` the ascending one; `deg [x] = ind(x)`. The
//! circle is oriented positively and a descending arc traversed in the
//! positive direction counts `+1`.

use crate::ainfty::{AInftyStructure, GradedBasis, MultilinearOp, PreCategory};
use crate::interval::Interval;
use crate::novikov::NovikovElem;
use crate::rational::{q_from_json, q_to_f64, q_to_json, Q};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseError {
    #[error("constant function has no isolated critical points")]
    Constant,
    #[error("not Morse: degenerate critical point near y = {0}")]
    NonMorse(f64),
    #[error("critical points do not alternate between minima and maxima")]
    Unbalanced,
    #[error("not transversal: critical points of {0} and {1} coincide near y = {2}")]
    NotTransversal(String, String, f64),
    #[error("bad trigonometric polynomial: {0}")]
    Schema(String),
}

/// `f(y) = c + Σ_k a_k cos(2πky) + b_k sin(2πky)` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TrigPolynomial {
    pub constant: Q,
    pub cos: BTreeMap<u32, Q>,
    pub sin: BTreeMap<u32, Q>,
}

impl TrigPolynomial {
    pub fn new(constant: Q, cos: impl IntoIterator<Item = (u32, Q)>, sin: impl IntoIterator<Item = (u32, Q)>) -> Self {
        let clean = |it: &mut dyn Iterator<Item = (u32, Q)>| -> BTreeMap<u32, Q> {
            it.filter(|(k, c)| *k > 0 && !c.is_zero()).collect()
        };
        TrigPolynomial { constant, cos: clean(&mut cos.into_iter()), sin: clean(&mut sin.into_iter()) }
    }

    pub fn zero() -> Self {
        TrigPolynomial::default()
    }

    pub fn degree(&self) -> u32 {
        self.cos.keys().chain(self.sin.keys()).copied().max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.cos.is_empty() && self.sin.is_empty()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut cos = self.cos.clone();
        for (k, c) in &other.cos {
            *cos.entry(*k).or_insert_with(Q::zero) -= c;
        }
        let mut sin = self.sin.clone();
        for (k, c) in &other.sin {
            *sin.entry(*k).or_insert_with(Q::zero) -= c;
        }
        TrigPolynomial::new(&self.constant - &other.constant, cos, sin)
    }

    pub fn neg(&self) -> Self {
        TrigPolynomial::zero().sub(self)
    }

    fn terms(&self) -> Vec<(f64, f64, f64)> {
        let mut out: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
        for (k, c) in &self.cos {
            out.entry(*k).or_default().0 = q_to_f64(c);
        }
        for (k, c) in &self.sin {
            out.entry(*k).or_default().1 = q_to_f64(c);
        }
        out.into_iter().map(|(k, (a, b))| (k as f64, a, b)).collect()
    }

    /// Upper bound for `sup |f^{(r)}|` (`r ≥ 1`).
    fn sup_bound(&self, r: u32) -> f64 {
        let s: f64 = self
            .terms()
            .iter()
            .map(|(k, a, b)| (2.0 * PI * k).powi(r as i32) * (a.abs() + b.abs()))
            .sum();
        s * (1.0 + 1e-12)
    }

    /// Enclosure of `f^{(r)}(x)` at a single point.
    fn deriv_at(&self, r: u32, x: f64) -> Interval {
        let mut val = if r == 0 { q_to_f64(&self.constant) } else { 0.0 };
        let mut err = if r == 0 { val.abs() * 4.0 * f64::EPSILON } else { 0.0 };
        for (k, a, b) in self.terms() {
            let w = 2.0 * PI * k;
            let kx = k * x;
            let theta = 2.0 * PI * (kx - kx.floor());
            let (s, c) = theta.sin_cos();
            // d^r/dy^r of a·cos + b·sin, via phase shifts by rπ/2.
            let (cc, ss) = match r % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            let scale = w.powi(r as i32);
            val += scale * (a * cc + b * ss);
            let arg_err = 2.0 * PI * (kx.abs() + 1.0) * f64::EPSILON + 8.0 * f64::EPSILON;
            err += scale * (a.abs() + b.abs()) * (arg_err + 8.0 * f64::EPSILON);
        }
        Interval::around(val, 4.0 * err + f64::MIN_POSITIVE)
    }

    /// Enclosure of `f^{(r)}` over `x`, by a second-order Taylor bound.
    fn deriv_on(&self, r: u32, x: &Interval) -> Interval {
        let m = x.mid();
        let rad = x.rad().max((x.hi - m).abs()).max((m - x.lo).abs());
        let c0 = self.deriv_at(r, m);
        let c1 = self.deriv_at(r + 1, m);
        let lin = c1.mul(&Interval::new(-rad, rad));
        let quad = 0.5 * self.sup_bound(r + 2) * rad * rad;
        c0.add(&lin).widen(quad)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.deriv_at(0, x).mid()
    }

    pub fn derivative_f64(&self, x: f64) -> f64 {
        self.deriv_at(1, x).mid()
    }

    pub fn value_enclosure(&self, x: &Interval) -> Interval {
        self.deriv_on(0, x)
    }

    /// `{"constant": q, "cos": {"k": q, …}, "sin": {"k": q, …}}`
    pub fn to_json(&self) -> Value {
        let map = |m: &BTreeMap<u32, Q>| -> Value {
            Value::Object(m.iter().map(|(k, c)| (k.to_string(), q_to_json(c))).collect::<Map<_, _>>())
        };
        json!({ "constant": q_to_json(&self.constant), "cos": map(&self.cos), "sin": map(&self.sin) })
    }

    pub fn from_json(v: &Value) -> Result<Self, MorseError> {
        let obj = v.as_object().ok_or_else(|| MorseError::Schema("expected an object".into()))?;
        let constant = match obj.get("constant") {
            None => Q::zero(),
            Some(c) => q_from_json(c).ok_or_else(|| MorseError::Schema("bad constant".into()))?,
        };
        let read = |key: &str| -> Result<Vec<(u32, Q)>, MorseError> {
            let Some(m) = obj.get(key) else { return Ok(Vec::new()) };
            let m = m.as_object().ok_or_else(|| MorseError::Schema(format!("{key} must be a map")))?;
            m.iter()
                .map(|(k, c)| {
                    let k: u32 = k.parse().map_err(|_| MorseError::Schema(format!("bad frequency {k:?}")))?;
                    if k == 0 {
                        return Err(MorseError::Schema("frequencies start at 1".into()));
                    }
                    let c = q_from_json(c).ok_or_else(|| MorseError::Schema(format!("bad coefficient for {k}")))?;
                    Ok((k, c))
                })
                .collect()
        };
        Ok(TrigPolynomial::new(constant, read("cos")?, read("sin")?))
    }
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (k, c) in &self.cos {
            write!(f, " + ({c})cos(2π·{k}y)")?;
        }
        for (k, c) in &self.sin {
            write!(f, " + ({c})sin(2π·{k}y)")?;
        }
        Ok(())
    }
}

/// Dyadic rational nearest to `x` with denominator `2^bits`.
pub fn dyadic(x: f64, bits: i32) -> Q {
    let scaled = (x * 2f64.powi(bits)).round();
    Q::new(BigInt::from(scaled as i64), BigInt::from(1) << bits as usize)
}

const POSITION_BITS: i32 = 48;
const VALUE_BITS: i32 = 30;
const ISOLATION_WIDTH: f64 = 9.094947017729282e-13; // 2^-40

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    /// Certified enclosure of the critical point; may straddle 0 or 1.
    pub enclosure: Interval,
    /// Dyadic approximation in `[0, 1)`.
    pub position: Q,
    /// Morse index: 0 at a minimum, 1 at a maximum.
    pub index: u8,
    /// Certified sign of `f″` on the enclosure.
    pub curvature_sign: i8,
    /// Enclosure of the critical value.
    pub value: Interval,
    /// Dyadic approximation of the critical value (denominator `2^30`),
    /// used as the exponent source for Novikov weights.
    pub value_q: Q,
}

/// Critical points sorted by position; minima and maxima alternate.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn minima(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&j| self.points[j].index == 0)
    }

    pub fn maxima(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&j| self.points[j].index == 1)
    }

    pub fn label(j: usize) -> String {
        format!("x{j}")
    }

    /// Basis of the Morse complex: `x0, x1, …` in position order.
    pub fn basis(&self) -> GradedBasis {
        GradedBasis::new(self.points.iter().enumerate().map(|(j, p)| (Self::label(j), p.index as i64))).unwrap()
    }

    fn prev(&self, j: usize) -> usize {
        (j + self.len() - 1) % self.len()
    }

    fn next(&self, j: usize) -> usize {
        (j + 1) % self.len()
    }

    /// The open arc from the predecessor to the successor of `j`: the
    /// descending basin of a minimum, or the ascending basin of a maximum.
    fn basin_contains(&self, j: usize, p: &Interval) -> bool {
        let a = &self.points[self.prev(j)].enclosure;
        let b = &self.points[self.next(j)].enclosure;
        in_open_arc(a, b, p)
    }

    /// The maximum whose ascending basin contains `p`.
    fn ascending_owner(&self, p: &Interval) -> Option<usize> {
        self.maxima().find(|&j| self.basin_contains(j, p))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.points
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    json!({
                        "label": Self::label(j),
                        "position": q_to_json(&p.position),
                        "enclosure": [p.enclosure.lo, p.enclosure.hi],
                        "index": p.index,
                        "value": q_to_json(&p.value_q),
                    })
                })
                .collect(),
        )
    }
}

/// Whether `p` lies on the open arc going positively from `a` to `b`
/// (the whole circle minus `a` when `a` and `b` coincide). The enclosures
/// must be pairwise disjoint modulo 1.
fn in_open_arc(a: &Interval, b: &Interval, p: &Interval) -> bool {
    let norm = |x: f64| x.rem_euclid(1.0);
    let (a, b, p) = (norm(a.mid()), norm(b.mid()), norm(p.mid()));
    if a == b {
        return p != a;
    }
    if a < b {
        a < p && p < b
    } else {
        p > a || p < b
    }
}

/// Isolates every critical point of `f` on the circle.
pub fn critical_points(f: &TrigPolynomial) -> Result<CriticalSet, MorseError> {
    if f.is_constant() {
        return Err(MorseError::Constant);
    }
    let pieces = 64 * f.degree().max(1) as usize;
    let mut stack: Vec<Interval> =
        (0..pieces).rev().map(|j| Interval::new(j as f64 / pieces as f64, (j + 1) as f64 / pieces as f64)).collect();
    let mut found: Vec<(Interval, Interval, i8)> = Vec::new(); // (enclosure, Newton domain, sign f″)
    while let Some(piece) = stack.pop() {
        if !f.deriv_on(1, &piece).contains_zero() {
            continue;
        }
        let dom = piece.widen(piece.width() / 4.0);
        let d2 = f.deriv_on(2, &dom);
        if !d2.contains_zero() {
            let m = dom.mid();
            let n = Interval::point(m).sub(&f.deriv_at(1, m).div(&d2).unwrap());
            if n.intersect(&dom).is_none() {
                continue;
            }
            if n.interior_of(&dom) {
                let enc = refine(f, n);
                let sign = if d2.is_positive() { 1 } else { -1 };
                found.push((enc, dom, sign));
                continue;
            }
        }
        if piece.width() < 1e-9 {
            return Err(MorseError::NonMorse(piece.mid()));
        }
        let m = piece.mid();
        stack.push(Interval::new(m, piece.hi));
        stack.push(Interval::new(piece.lo, m));
    }

    // Roots found from neighbouring pieces (or across y = 0 ≡ 1) coincide
    // when one enclosure lies in the other's uniqueness domain.
    let mut unique: Vec<(Interval, Interval, i8)> = Vec::new();
    'outer: for cand in found {
        for u in &unique {
            for t in [-1.0, 0.0, 1.0] {
                let shifted = cand.0.shift(t);
                if shifted.subset_of(&u.1) || u.0.subset_of(&cand.1.shift(t)) {
                    continue 'outer;
                }
            }
        }
        unique.push(cand);
    }

    let mut points: Vec<CriticalPoint> = unique
        .into_iter()
        .map(|(enc, _, sign)| {
            let value = f.value_enclosure(&enc);
            let pos = dyadic(enc.mid(), POSITION_BITS);
            let pos = &pos - Q::from_integer(crate::rational::floor_q(&pos));
            CriticalPoint {
                enclosure: enc,
                position: pos,
                index: if sign > 0 { 0 } else { 1 },
                curvature_sign: sign,
                value,
                value_q: dyadic(value.mid(), VALUE_BITS),
            }
        })
        .collect();
    points.sort_by(|a, b| a.position.cmp(&b.position));
    for w in 0..points.len() {
        let next = (w + 1) % points.len();
        if points.len() % 2 == 1 || points[w].index == points[next].index {
            return Err(MorseError::Unbalanced);
        }
    }
    Ok(CriticalSet { points })
}

/// Interval Newton iteration down to width `2^-40`.
fn refine(f: &TrigPolynomial, mut x: Interval) -> Interval {
    for _ in 0..200 {
        if x.width() < ISOLATION_WIDTH {
            break;
        }
        let m = x.mid();
        let Some(step) = f.deriv_at(1, m).div(&f.deriv_on(2, &x)) else { break };
        let n = Interval::point(m).sub(&step);
        match n.intersect(&x) {
            Some(y) if y.width() < x.width() => x = y,
            _ => break,
        }
    }
    x
}

/// The Morse complex of `f0 − f1` with coefficients produced by `coef`
/// from a sign and the Novikov exponent `c(target) − c(source)`.
fn differential_with<S: crate::scalar::Scalar>(
    crit: &CriticalSet,
    basis: Arc<GradedBasis>,
    coef: &dyn Fn(bool, &Q) -> S,
) -> MultilinearOp<S> {
    let mut d = MultilinearOp::new(1, basis.clone(), basis, 1);
    for j in crit.minima() {
        let (l, r) = (crit.prev(j), crit.next(j));
        let base = &crit.points[j].value_q;
        d.add_entry(&[j], l, &coef(false, &(&crit.points[l].value_q - base))).unwrap();
        d.add_entry(&[j], r, &coef(true, &(&crit.points[r].value_q - base))).unwrap();
    }
    d
}

fn unweighted(neg: bool, _: &Q) -> Q {
    Q::from_integer(if neg { (-1).into() } else { 1.into() })
}

fn weighted(cutoff: &Q) -> impl Fn(bool, &Q) -> NovikovElem + '_ {
    move |neg, e| NovikovElem::new(vec![(e.clone(), unweighted(neg, e))], Some(cutoff.clone()))
}

/// The Morse differential of `f0 − f1` over `Q`:
/// `∂[min] = [left max] − [right max]`.
pub fn morse_differential(f0: &TrigPolynomial, f1: &TrigPolynomial) -> Result<MultilinearOp<Q>, MorseError> {
    let crit = critical_points(&f0.sub(f1))?;
    let basis = Arc::new(crit.basis());
    Ok(differential_with(&crit, basis, &unweighted))
}

/// The differential with Novikov weights `q^{c(max) − c(min)}`.
pub fn morse_differential_weighted(
    f0: &TrigPolynomial,
    f1: &TrigPolynomial,
    cutoff: &Q,
) -> Result<MultilinearOp<NovikovElem>, MorseError> {
    let crit = critical_points(&f0.sub(f1))?;
    let basis = Arc::new(crit.basis());
    Ok(differential_with(&crit, basis, &weighted(cutoff)))
}

/// One rigid Y-shaped gradient tree, as basis indices of the three
/// complexes, with its sign and Novikov exponent
/// `c₀₂(x₂) − c₀₁(x₀) − c₁₂(x₁)` (the total variation along its edges).
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub x0: usize,
    pub x1: usize,
    pub x2: usize,
    pub sign: i8,
    pub exponent: Q,
}

/// All transversality-certified Y configurations for `(f0, f1, f2)`.
pub fn configurations(
    s01: &CriticalSet,
    s12: &CriticalSet,
    s02: &CriticalSet,
) -> Vec<Configuration> {
    let mut out = Vec::new();
    let exp = |a: usize, b: usize, c: usize| {
        &s02.points[c].value_q - &s01.points[a].value_q - &s12.points[b].value_q
    };
    for x0 in s01.minima() {
        for x1 in s12.minima() {
            for x2 in s02.minima() {
                let p = &s02.points[x2].enclosure;
                if s01.basin_contains(x0, p) && s12.basin_contains(x1, p) {
                    out.push(Configuration { x0, x1, x2, sign: 1, exponent: exp(x0, x1, x2) });
                }
            }
        }
        for x1 in s12.maxima() {
            let p = &s12.points[x1].enclosure;
            if s01.basin_contains(x0, p) {
                if let Some(x2) = s02.ascending_owner(p) {
                    out.push(Configuration { x0, x1, x2, sign: 1, exponent: exp(x0, x1, x2) });
                }
            }
        }
    }
    for x0 in s01.maxima() {
        let p = &s01.points[x0].enclosure;
        for x1 in s12.minima() {
            if s12.basin_contains(x1, p) {
                if let Some(x2) = s02.ascending_owner(p) {
                    out.push(Configuration { x0, x1, x2, sign: 1, exponent: exp(x0, x1, x2) });
                }
            }
        }
    }
    out
}

/// Checks that no two of the critical sets share a critical point.
pub fn check_transversal(sets: &[(String, &CriticalSet)]) -> Result<(), MorseError> {
    for (i, (na, a)) in sets.iter().enumerate() {
        for (nb, b) in &sets[i + 1..] {
            for p in &a.points {
                for q in &b.points {
                    for t in [-1.0, 0.0, 1.0] {
                        if p.enclosure.shift(t).widen(ISOLATION_WIDTH).intersects(&q.enclosure) {
                            return Err(MorseError::NotTransversal(na.clone(), nb.clone(), p.enclosure.mid()));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// The Morse pre-category on a list of functions: homs on every
/// increasing pair, `m₁` on each, `m₂` on each increasing triple. Every
/// increasing sequence is declared transversal once all pairs and triples
/// pass the transversality check.
pub struct MorseCategory<S> {
    pub functions: Vec<TrigPolynomial>,
    pub critical: BTreeMap<(usize, usize), CriticalSet>,
    pub category: PreCategory<S>,
}

fn build_category<S: crate::scalar::Scalar>(fs: &[TrigPolynomial], coef: &dyn Fn(bool, &Q) -> S) -> Result<MorseCategory<S>, MorseError> {
    let n = fs.len();
    let mut critical = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            critical.insert((i, j), critical_points(&fs[i].sub(&fs[j]))?);
        }
    }
    let named: Vec<(String, &CriticalSet)> =
        critical.iter().map(|((i, j), c)| (format!("f{i}−f{j}"), c)).collect();
    check_transversal(&named)?;
    let mut pc = PreCategory::new((0..n).map(|i| format!("f{i}")).collect());
    for ((i, j), c) in &critical {
        pc.set_hom(*i, *j, c.basis()).unwrap();
    }
    for ((i, j), c) in &critical {
        let basis = Arc::new(c.basis());
        let d = differential_with(c, basis.clone(), coef);
        for (t, v) in d.entries() {
            for (o, x) in v {
                pc.add_composition(&[*i, *j], &[basis.label(t[0])], basis.label(*o), x).unwrap();
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (s01, s12, s02) = (&critical[&(i, j)], &critical[&(j, k)], &critical[&(i, k)]);
                for c in configurations(s01, s12, s02) {
                    let x = coef(c.sign < 0, &c.exponent);
                    pc.add_composition(
                        &[i, j, k],
                        &[&CriticalSet::label(c.x0), &CriticalSet::label(c.x1)],
                        &CriticalSet::label(c.x2),
                        &x,
                    )
                    .unwrap();
                }
            }
        }
    }
    for mask in 1u32..(1 << n) {
        let seq: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).collect();
        if seq.len() >= 2 {
            pc.add_transversal(seq);
        }
    }
    Ok(MorseCategory { functions: fs.to_vec(), critical, category: pc })
}

pub fn morse_category(fs: &[TrigPolynomial]) -> Result<MorseCategory<Q>, MorseError> {
    build_category(fs, &unweighted)
}

pub fn morse_category_weighted(fs: &[TrigPolynomial], cutoff: &Q) -> Result<MorseCategory<NovikovElem>, MorseError> {
    build_category(fs, &weighted(cutoff))
}

impl<S: crate::scalar::Scalar> MorseCategory<S> {
    /// `m₂` of the triple `(f0, f1, f2)` on the direct-sum basis of the
    /// three hom spaces (labels `fi>fj:xk`).
    pub fn m2(&self) -> MultilinearOp<S> {
        self.structure().op_or_zero(2)
    }

    pub fn structure(&self) -> AInftyStructure<S> {
        let seq: Vec<usize> = (0..self.functions.len()).collect();
        self.category.assemble(&seq).expect("consistent by construction")
    }
}

/// `m₂` for a triple, unweighted (`cutoff = None`, scalars in `Q`
/// embedded as constants) or weighted.
pub fn m2(
    f0: &TrigPolynomial,
    f1: &TrigPolynomial,
    f2: &TrigPolynomial,
    cutoff: Option<&Q>,
) -> Result<MultilinearOp<NovikovElem>, MorseError> {
    let fs = [f0.clone(), f1.clone(), f2.clone()];
    match cutoff {
        Some(c) => Ok(morse_category_weighted(&fs, c)?.m2()),
        None => Ok(morse_category(&fs)?.m2().map_scalars(|x| NovikovElem::constant(x.clone()))),
    }
}

/// Rescales tables to the basis `[y]_new = q^{−c(y)}[y]`: the coefficient
/// of `out` in `op(in₁,…,in_k)` is multiplied by
/// `q^{c(out) − Σ c(in_i)}`. `values` are indexed by basis position (source
/// and target bases must coincide).
pub fn basis_rescale(op: &MultilinearOp<NovikovElem>, values: &[Q]) -> MultilinearOp<NovikovElem> {
    let mut out = MultilinearOp::new(op.arity(), op.source().clone(), op.target().clone(), op.shift());
    for (t, v) in op.entries() {
        let base: Q = t.iter().map(|&i| values[i].clone()).sum();
        for (o, c) in v {
            let e = &values[*o] - &base;
            let scaled = c.shift(&e);
            out.add_entry(t, *o, &scaled).unwrap();
        }
    }
    out
}

impl<S> MorseCategory<S> {
    /// Critical values `f_i − f_j` at every basis element of the assembled
    /// structure, in basis order.
    pub fn assembled_values(&self) -> Vec<Q> {
        let mut out = Vec::new();
        let n = self.functions.len();
        for i in 0..n {
            for j in i + 1..n {
                if let Some(c) = self.critical.get(&(i, j)) {
                    out.extend(c.points.iter().map(|p| p.value_q.clone()));
                }
            }
        }
        out
    }
}

/// `true` if every weight exponent in the table is strictly positive.
pub fn weights_positive(op: &MultilinearOp<NovikovElem>) -> bool {
    op.entries().all(|(_, v)| v.values().all(|c| c.terms().iter().all(|(e, _)| e.is_positive())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn cosk(k: u32, c: Q) -> TrigPolynomial {
        TrigPolynomial::new(Q::zero(), [(k, c)], [])
    }

    #[test]
    fn cosine_critical_points() {
        let c = critical_points(&cosk(1, qi(1))).unwrap();
        assert_eq!(c.len(), 2);
        let near = |p: &CriticalPoint, x: f64| [-1.0, 0.0, 1.0].iter().any(|t| p.enclosure.shift(*t).contains(x));
        assert!(near(&c.points[0], 0.0));
        assert_eq!(c.points[0].index, 1);
        assert!(near(&c.points[1], 0.5));
        assert_eq!(c.points[1].index, 0);
        assert!((q_to_f64(&c.points[1].position) - 0.5).abs() < 1e-11);
        let c2 = critical_points(&cosk(2, qi(1))).unwrap();
        assert_eq!(c2.minima().count(), 2);
        assert_eq!(c2.maxima().count(), 2);
    }

    #[test]
    fn mixed_harmonics() {
        let f = TrigPolynomial::new(Q::zero(), [(1, qi(1))], [(2, q(1, 3))]);
        let c = critical_points(&f).unwrap();
        assert_eq!(c.minima().count(), 1);
        assert_eq!(c.maxima().count(), 1);
        for p in &c.points {
            assert!(p.enclosure.width() < ISOLATION_WIDTH);
            let m = p.enclosure.mid();
            assert!(f.derivative_f64(m).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_input() {
        assert_eq!(critical_points(&TrigPolynomial::zero()), Err(MorseError::Constant));
        // f′ = −2π sin(2πy)(1 + cos(2πy))·… has a double root at y = 1/2.
        let f = TrigPolynomial::new(Q::zero(), [(1, qi(2)), (2, q(1, 2))], []);
        assert!(matches!(critical_points(&f), Err(MorseError::NonMorse(_))));
    }

    #[test]
    fn differentials() {
        let zero = TrigPolynomial::zero();
        let d = morse_differential(&cosk(1, qi(1)), &zero).unwrap();
        assert!(d.is_zero());
        let d2 = morse_differential(&cosk(2, qi(1)), &zero).unwrap();
        assert_eq!(d2.len(), 4);
    }

    #[test]
    fn rescale_roundtrip() {
        let zero = TrigPolynomial::zero();
        let f = cosk(2, qi(1));
        let d = morse_differential(&f, &zero).unwrap().map_scalars(|x| NovikovElem::constant(x.clone()));
        let vals: Vec<Q> = critical_points(&f).unwrap().points.iter().map(|p| p.value_q.clone()).collect();
        let neg: Vec<Q> = vals.iter().map(|v| -v).collect();
        assert_eq!(basis_rescale(&basis_rescale(&d, &vals), &neg), d);
        let w = morse_differential_weighted(&f, &zero, &qi(50)).unwrap();
        let r = basis_rescale(&d, &vals);
        for (t, v) in w.entries() {
            for (o, c) in v {
                assert!(r.coeff(t, *o).eq_upto(c, &qi(50)));
            }
        }
        assert_eq!(r.len(), w.len());
    }
}
