//! Graded spaces, sparse multilinear operations and the A∞ equations.
//!
//! Two independent sign implementations live here:
//!
//! * [`relation_defect`] and [`morphism_defect`] expand the explicit
//!   unsuspended formulas
//!   `Σ (−1)^{j·Σ_{s<l} deg a_s + l(j−1) + j(i−1)} m_i(…, m_j(…), …)` and the
//!   `γ_i` / `ε_s` morphism signs;
//! * [`bar_check`] suspends every `m_n` to `b_n = s∘m_n∘(s⁻¹)^{⊗n}` and
//!   squares the induced coderivation on tensor words, where the only signs
//!   are Koszul signs in the shifted grading.
//!
//! Agreement of the two on pass/fail and failing arity is what pins the
//! conventions used throughout the crate.

use crate::scalar::Scalar;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AInftyError {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("duplicate basis label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),
    #[error("entry {inputs:?} -> {output} violates the degree rule (shift {shift})")]
    DegreeRule { inputs: Vec<String>, output: String, shift: i64 },
    #[error("wrong number of inputs: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("schema error: {0}")]
    Schema(String),
}

/// A finite homogeneous basis: unique labels with integer degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasis {
    labels: Vec<String>,
    degrees: Vec<i64>,
    index: HashMap<String, usize>,
}

impl GradedBasis {
    pub fn new<L: Into<String>>(items: impl IntoIterator<Item = (L, i64)>) -> Result<Self, AInftyError> {
        let mut b = GradedBasis { labels: Vec::new(), degrees: Vec::new(), index: HashMap::new() };
        for (l, d) in items {
            b.push(l.into(), d)?;
        }
        Ok(b)
    }

    pub fn empty() -> Self {
        GradedBasis { labels: Vec::new(), degrees: Vec::new(), index: HashMap::new() }
    }

    pub fn push(&mut self, label: String, degree: i64) -> Result<usize, AInftyError> {
        if self.index.contains_key(&label) {
            return Err(AInftyError::DuplicateLabel(label));
        }
        let i = self.labels.len();
        self.index.insert(label.clone(), i);
        self.labels.push(label);
        self.degrees.push(degree);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn lookup(&self, label: &str) -> Result<usize, AInftyError> {
        self.index.get(label).copied().ok_or_else(|| AInftyError::UnknownLabel(label.to_string()))
    }

    pub fn indices_of_degree(&self, d: i64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degrees[i] == d).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.labels.iter().zip(&self.degrees).map(|(l, d)| json!([l, d])).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self, AInftyError> {
        let arr = v.as_array().ok_or_else(|| AInftyError::Schema("basis must be an array".into()))?;
        let mut b = GradedBasis::empty();
        for item in arr {
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| AInftyError::Schema("basis entries are [label, degree]".into()))?;
            let label = pair[0].as_str().ok_or_else(|| AInftyError::Schema("label must be a string".into()))?;
            let deg = pair[1].as_i64().ok_or_else(|| AInftyError::Schema("degree must be an integer".into()))?;
            b.push(label.to_string(), deg)?;
        }
        Ok(b)
    }
}

/// Sparse vector: basis index → nonzero coefficient.
pub type SparseVec<S> = BTreeMap<usize, S>;

pub fn add_scaled<S: Scalar>(acc: &mut SparseVec<S>, v: &SparseVec<S>, c: &S) {
    for (k, x) in v {
        add_coeff(acc, *k, &x.mul(c));
    }
}

pub fn add_coeff<S: Scalar>(acc: &mut SparseVec<S>, k: usize, x: &S) {
    if x.is_zero() {
        return;
    }
    match acc.get_mut(&k) {
        Some(y) => {
            let s = y.add(x);
            if s.is_zero() {
                acc.remove(&k);
            } else {
                *y = s;
            }
        }
        None => {
            acc.insert(k, x.clone());
        }
    }
}

/// Sparse `n`-linear map between graded bases, stored on basis tuples.
///
/// Every entry obeys `deg(output) = Σ deg(inputs) + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearOp<S> {
    arity: usize,
    source: Arc<GradedBasis>,
    target: Arc<GradedBasis>,
    shift: i64,
    entries: BTreeMap<Vec<usize>, SparseVec<S>>,
}

impl<S: Scalar> MultilinearOp<S> {
    pub fn new(arity: usize, source: Arc<GradedBasis>, target: Arc<GradedBasis>, shift: i64) -> Self {
        MultilinearOp { arity, source, target, shift, entries: BTreeMap::new() }
    }

    pub fn identity(basis: Arc<GradedBasis>) -> Self {
        let mut op = Self::new(1, basis.clone(), basis.clone(), 0);
        for i in 0..basis.len() {
            op.entries.insert(vec![i], BTreeMap::from([(i, S::one())]));
        }
        op
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn source(&self) -> &Arc<GradedBasis> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GradedBasis> {
        &self.target
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &SparseVec<S>)> {
        self.entries.iter()
    }

    pub fn get(&self, inputs: &[usize]) -> Option<&SparseVec<S>> {
        self.entries.get(inputs)
    }

    pub fn coeff(&self, inputs: &[usize], output: usize) -> S {
        self.entries.get(inputs).and_then(|v| v.get(&output)).cloned().unwrap_or_else(S::zero)
    }

    fn degree_ok(&self, inputs: &[usize], output: usize) -> bool {
        let s: i64 = inputs.iter().map(|&i| self.source.degree(i)).sum();
        self.target.degree(output) == s + self.shift
    }

    /// Adds `c` to the coefficient of `output` in `op(inputs)`.
    pub fn add_entry(&mut self, inputs: &[usize], output: usize, c: &S) -> Result<(), AInftyError> {
        if inputs.len() != self.arity {
            return Err(AInftyError::Arity { expected: self.arity, got: inputs.len() });
        }
        if c.is_zero() {
            return Ok(());
        }
        if !self.degree_ok(inputs, output) {
            return Err(AInftyError::DegreeRule {
                inputs: inputs.iter().map(|&i| self.source.label(i).to_string()).collect(),
                output: self.target.label(output).to_string(),
                shift: self.shift,
            });
        }
        self.add_unchecked(inputs, output, c);
        Ok(())
    }

    pub fn add_labeled(&mut self, inputs: &[&str], output: &str, c: &S) -> Result<(), AInftyError> {
        let ins: Vec<usize> = inputs.iter().map(|l| self.source.lookup(l)).collect::<Result<_, _>>()?;
        let out = self.target.lookup(output)?;
        self.add_entry(&ins, out, c)
    }

    pub(crate) fn add_unchecked(&mut self, inputs: &[usize], output: usize, c: &S) {
        let slot = self.entries.entry(inputs.to_vec()).or_default();
        add_coeff(slot, output, c);
        if slot.is_empty() {
            self.entries.remove(inputs);
        }
    }

    pub(crate) fn add_vector(&mut self, inputs: &[usize], v: &SparseVec<S>, c: &S) {
        if v.is_empty() {
            return;
        }
        let slot = self.entries.entry(inputs.to_vec()).or_default();
        add_scaled(slot, v, c);
        if slot.is_empty() {
            self.entries.remove(inputs);
        }
    }

    /// Verifies the degree rule on every stored entry.
    pub fn check_degrees(&self) -> Result<(), AInftyError> {
        for (ins, v) in &self.entries {
            for &o in v.keys() {
                if !self.degree_ok(ins, o) {
                    return Err(AInftyError::DegreeRule {
                        inputs: ins.iter().map(|&i| self.source.label(i).to_string()).collect(),
                        output: self.target.label(o).to_string(),
                        shift: self.shift,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultilinearOp<T> {
        let mut out = MultilinearOp::new(self.arity, self.source.clone(), self.target.clone(), self.shift);
        for (ins, v) in &self.entries {
            for (o, c) in v {
                out.add_unchecked(ins, *o, &f(c));
            }
        }
        out
    }

    pub fn scaled(&self, c: &S) -> Self {
        self.map_scalars(|x| x.mul(c))
    }

    pub fn plus(&self, other: &Self) -> Result<Self, AInftyError> {
        if self.arity != other.arity || self.shift != other.shift || self.source != other.source || self.target != other.target {
            return Err(AInftyError::BasisMismatch("operands of plus differ in shape".into()));
        }
        let mut out = self.clone();
        for (ins, v) in &other.entries {
            out.add_vector(ins, v, &S::one());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self, AInftyError> {
        self.plus(&other.scaled(&S::one().neg()))
    }

    /// Multilinear evaluation on sparse input vectors.
    pub fn apply(&self, inputs: &[SparseVec<S>]) -> SparseVec<S> {
        assert_eq!(inputs.len(), self.arity);
        let mut out = SparseVec::new();
        let mut tuple = Vec::with_capacity(self.arity);
        self.apply_rec(inputs, &mut tuple, &S::one(), &mut out);
        out
    }

    fn apply_rec(&self, inputs: &[SparseVec<S>], tuple: &mut Vec<usize>, c: &S, out: &mut SparseVec<S>) {
        let depth = tuple.len();
        if depth == inputs.len() {
            if let Some(v) = self.entries.get(tuple.as_slice()) {
                add_scaled(out, v, c);
            }
            return;
        }
        for (k, x) in &inputs[depth] {
            tuple.push(*k);
            self.apply_rec(inputs, tuple, &c.mul(x), out);
            tuple.pop();
        }
    }

    /// First nonzero entry in canonical order, with labels.
    pub fn first_entry(&self) -> Option<(Vec<String>, String, S)> {
        let (ins, v) = self.entries.iter().next()?;
        let (o, c) = v.iter().next()?;
        Some((
            ins.iter().map(|&i| self.source.label(i).to_string()).collect(),
            self.target.label(*o).to_string(),
            c.clone(),
        ))
    }

    pub fn entries_json(&self) -> Value {
        let mut rows = Vec::new();
        for (ins, v) in &self.entries {
            for (o, c) in v {
                let mut row: Vec<Value> = ins.iter().map(|&i| json!(self.source.label(i))).collect();
                row.push(json!(self.target.label(*o)));
                row.push(c.to_json());
                rows.push(Value::Array(row));
            }
        }
        Value::Array(rows)
    }

    pub fn to_json(&self) -> Value {
        json!({ "arity": self.arity, "entries": self.entries_json() })
    }

    /// Reads `{arity, entries: [[in.., out, scalar]]}` against the given bases.
    pub fn from_json(
        v: &Value,
        source: Arc<GradedBasis>,
        target: Arc<GradedBasis>,
        shift_of_arity: impl Fn(usize) -> i64,
    ) -> Result<Self, AInftyError> {
        let arity = v
            .get("arity")
            .and_then(Value::as_u64)
            .filter(|&a| a >= 1)
            .ok_or_else(|| AInftyError::Schema("op needs arity ≥ 1".into()))? as usize;
        let mut op = MultilinearOp::new(arity, source, target, shift_of_arity(arity));
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| AInftyError::Schema("op needs an entries array".into()))?;
        for row in rows {
            let row = row.as_array().ok_or_else(|| AInftyError::Schema("entry must be an array".into()))?;
            if row.len() != arity + 2 {
                return Err(AInftyError::Schema(format!("entry of arity {arity} needs {} fields", arity + 2)));
            }
            let ins: Vec<&str> = row[..arity]
                .iter()
                .map(|x| x.as_str().ok_or_else(|| AInftyError::Schema("labels must be strings".into())))
                .collect::<Result<_, _>>()?;
            let out = row[arity].as_str().ok_or_else(|| AInftyError::Schema("labels must be strings".into()))?;
            let c = S::from_json(&row[arity + 1]).ok_or_else(|| AInftyError::Schema("bad scalar".into()))?;
            op.add_labeled(&ins, out, &c)?;
        }
        Ok(op)
    }
}

/// Sums `sign · outer(t₀…, inner(s…), …t_k)` into `acc`, with the inner
/// output plugged into slot `slot` of `outer`. `sign` receives the labels of
/// the outer inputs left of the slot and the inner tuple.
fn accumulate_insertion<S: Scalar>(
    acc: &mut MultilinearOp<S>,
    outer: &MultilinearOp<S>,
    slot: usize,
    inner: &MultilinearOp<S>,
    outer_index: &HashMap<usize, Vec<&Vec<usize>>>,
    sign: &dyn Fn(&[usize], &[usize]) -> bool,
) {
    for (s, inner_out) in &inner.entries {
        for (c, x) in inner_out {
            let Some(outers) = outer_index.get(c) else { continue };
            for t in outers {
                let mut tuple = Vec::with_capacity(t.len() - 1 + s.len());
                tuple.extend_from_slice(&t[..slot]);
                tuple.extend_from_slice(s);
                tuple.extend_from_slice(&t[slot + 1..]);
                let odd = sign(&t[..slot], s);
                let v = &outer.entries[*t];
                acc.add_vector(&tuple, v, &x.signed(odd));
            }
        }
    }
}

fn index_by_slot<S>(op: &MultilinearOp<S>, slot: usize) -> HashMap<usize, Vec<&Vec<usize>>> {
    let mut idx: HashMap<usize, Vec<&Vec<usize>>> = HashMap::new();
    for t in op.entries.keys() {
        idx.entry(t[slot]).or_default().push(t);
    }
    idx
}

/// A finite collection of operations `m_n` of degree `2 − n` on one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AInftyStructure<S> {
    basis: Arc<GradedBasis>,
    ops: BTreeMap<usize, MultilinearOp<S>>,
}

impl<S: Scalar> AInftyStructure<S> {
    pub fn new(basis: Arc<GradedBasis>) -> Self {
        AInftyStructure { basis, ops: BTreeMap::new() }
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    /// `m_n`, created empty on first use.
    pub fn op_mut(&mut self, n: usize) -> &mut MultilinearOp<S> {
        let basis = self.basis.clone();
        self.ops
            .entry(n)
            .or_insert_with(|| MultilinearOp::new(n, basis.clone(), basis, 2 - n as i64))
    }

    pub fn op(&self, n: usize) -> Option<&MultilinearOp<S>> {
        self.ops.get(&n)
    }

    /// `m_n`, or the zero operation when absent.
    pub fn op_or_zero(&self, n: usize) -> MultilinearOp<S> {
        self.ops
            .get(&n)
            .cloned()
            .unwrap_or_else(|| MultilinearOp::new(n, self.basis.clone(), self.basis.clone(), 2 - n as i64))
    }

    pub fn set_op(&mut self, op: MultilinearOp<S>) -> Result<(), AInftyError> {
        let n = op.arity();
        if *op.source() != self.basis || *op.target() != self.basis {
            return Err(AInftyError::BasisMismatch(format!("m_{n} is defined on another basis")));
        }
        if op.shift() != 2 - n as i64 {
            return Err(AInftyError::BasisMismatch(format!("m_{n} must have shift {}", 2 - n as i64)));
        }
        op.check_degrees()?;
        if op.is_zero() {
            self.ops.remove(&n);
        } else {
            self.ops.insert(n, op);
        }
        Ok(())
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().filter(|(_, op)| !op.is_zero()).map(|(n, _)| *n)
    }

    pub fn max_arity(&self) -> usize {
        self.arities().max().unwrap_or(0)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> AInftyStructure<T> {
        AInftyStructure {
            basis: self.basis.clone(),
            ops: self.ops.iter().map(|(n, op)| (*n, op.map_scalars(f))).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "basis": self.basis.to_json(),
            "ops": self.ops.values().filter(|op| !op.is_zero()).map(MultilinearOp::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, AInftyError> {
        let basis = Arc::new(GradedBasis::from_json(
            v.get("basis").ok_or_else(|| AInftyError::Schema("missing basis".into()))?,
        )?);
        let mut s = AInftyStructure::new(basis.clone());
        if let Some(ops) = v.get("ops") {
            let ops = ops.as_array().ok_or_else(|| AInftyError::Schema("ops must be an array".into()))?;
            for o in ops {
                let op = MultilinearOp::from_json(o, basis.clone(), basis.clone(), |n| 2 - n as i64)?;
                if s.ops.contains_key(&op.arity()) {
                    return Err(AInftyError::Schema(format!("duplicate op of arity {}", op.arity())));
                }
                s.set_op(op)?;
            }
        }
        Ok(s)
    }
}

/// Taylor components `f_n` of degree `1 − n` between two structures.
#[derive(Clone, Debug, PartialEq)]
pub struct AInftyMorphismData<S> {
    pub source: AInftyStructure<S>,
    pub target: AInftyStructure<S>,
    components: BTreeMap<usize, MultilinearOp<S>>,
}

impl<S: Scalar> AInftyMorphismData<S> {
    pub fn new(source: AInftyStructure<S>, target: AInftyStructure<S>) -> Self {
        AInftyMorphismData { source, target, components: BTreeMap::new() }
    }

    pub fn component_mut(&mut self, n: usize) -> &mut MultilinearOp<S> {
        let (s, t) = (self.source.basis.clone(), self.target.basis.clone());
        self.components.entry(n).or_insert_with(|| MultilinearOp::new(n, s, t, 1 - n as i64))
    }

    pub fn component(&self, n: usize) -> Option<&MultilinearOp<S>> {
        self.components.get(&n)
    }

    pub fn set_component(&mut self, op: MultilinearOp<S>) -> Result<(), AInftyError> {
        let n = op.arity();
        if *op.source() != self.source.basis || *op.target() != self.target.basis {
            return Err(AInftyError::BasisMismatch(format!("f_{n} has the wrong source or target")));
        }
        if op.shift() != 1 - n as i64 {
            return Err(AInftyError::BasisMismatch(format!("f_{n} must have shift {}", 1 - n as i64)));
        }
        op.check_degrees()?;
        self.components.insert(n, op);
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "source_basis": self.source.basis.to_json(),
            "target_basis": self.target.basis.to_json(),
            "components": self.components.values().filter(|op| !op.is_zero()).map(MultilinearOp::to_json).collect::<Vec<_>>(),
        })
    }
}

fn parity(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

/// Left-hand side of the arity-`n` A∞ relation, as an operation of shift
/// `3 − n`. The relation holds iff the result is zero.
pub fn relation_defect<S: Scalar>(a: &AInftyStructure<S>, n: usize) -> MultilinearOp<S> {
    let basis = a.basis.clone();
    let mut acc = MultilinearOp::new(n, basis.clone(), basis.clone(), 3 - n as i64);
    let deg = |i: usize| basis.degree(i);
    for j in 1..=n {
        let i = n + 1 - j;
        let (Some(outer), Some(inner)) = (a.op(i), a.op(j)) else { continue };
        for l in 0..i {
            let idx = index_by_slot(outer, l);
            let (ji, il) = (j as i64, l as i64);
            let fixed = il * (ji - 1) + ji * (i as i64 - 1);
            let sign = |prefix: &[usize], _: &[usize]| {
                let sd: i64 = prefix.iter().map(|&p| deg(p)).sum();
                parity(ji * sd + fixed)
            };
            accumulate_insertion(&mut acc, outer, l, inner, &idx, &sign);
        }
    }
    acc
}

/// Difference `Σ ±m_i^W(f…,…,f…) − Σ ±f_s(…, m_r^V(…), …)` at arity `n`,
/// with the `γ_i` and `ε_s` signs. Zero iff the morphism equation holds.
pub fn morphism_defect<S: Scalar>(f: &AInftyMorphismData<S>, n: usize) -> MultilinearOp<S> {
    let vb = f.source.basis.clone();
    let wb = f.target.basis.clone();
    let mut acc = MultilinearOp::new(n, vb.clone(), wb.clone(), 2 - n as i64);
    let deg = |i: usize| vb.degree(i);

    // Left side: m_i^W applied to blocks of f's.
    for i in 1..=n {
        let Some(m) = f.target.op(i) else { continue };
        for blocks in crate::trees::compositions(n, i) {
            let comps: Option<Vec<&MultilinearOp<S>>> = blocks.iter().map(|b| f.component(*b)).collect();
            let Some(comps) = comps else { continue };
            let ii = i as i64;
            // ℓ_p partial sums, ℓ_0 = 0.
            let mut ell = vec![0i64];
            for b in &blocks {
                ell.push(ell.last().unwrap() + *b as i64);
            }
            let base: i64 = (1..i).map(|p| (ii - p as i64) * (ell[p] - ell[p - 1] - 1)).sum();
            let nu: Vec<i64> = (0..=i)
                .map(|p| ((p + 1)..=i).map(|mm| 1 - ell[mm] + ell[mm - 1]).sum())
                .collect();
            let mut chosen: Vec<(&Vec<usize>, &SparseVec<S>)> = Vec::with_capacity(i);
            expand_blocks(&comps, &mut chosen, &mut |choice| {
                let tuple: Vec<usize> = choice.iter().flat_map(|(t, _)| t.iter().copied()).collect();
                let mut gamma = base;
                for p in 1..i {
                    let block_deg: i64 = choice[p - 1].0.iter().map(|&q| deg(q)).sum();
                    gamma += nu[p] * block_deg;
                }
                let outs: Vec<SparseVec<S>> = choice.iter().map(|(_, v)| (*v).clone()).collect();
                let val = m.apply(&outs);
                acc.add_vector(&tuple, &val, &S::one().signed(parity(gamma)));
            });
        }
    }

    // Right side: f_s with one m_r^V inserted at slot j − 1.
    let minus_one = S::one().neg();
    for r in 1..=n {
        let s = n + 1 - r;
        let (Some(fs), Some(mr)) = (f.component(s), f.source.op(r)) else { continue };
        for slot in 0..s {
            let idx = index_by_slot(fs, slot);
            let (ri, j) = (r as i64, slot as i64 + 1);
            let fixed = (j - 1) + ri * (s as i64 - j);
            let sign = |prefix: &[usize], _: &[usize]| {
                let sd: i64 = prefix.iter().map(|&p| deg(p)).sum();
                parity(ri * sd + fixed)
            };
            let mut part = MultilinearOp::new(n, vb.clone(), wb.clone(), 2 - n as i64);
            accumulate_insertion(&mut part, fs, slot, mr, &idx, &sign);
            for (t, v) in &part.entries {
                acc.add_vector(t, v, &minus_one);
            }
        }
    }
    acc
}

fn expand_blocks<'a, S>(
    comps: &[&'a MultilinearOp<S>],
    chosen: &mut Vec<(&'a Vec<usize>, &'a SparseVec<S>)>,
    visit: &mut dyn FnMut(&[(&'a Vec<usize>, &'a SparseVec<S>)]),
) {
    let depth = chosen.len();
    if depth == comps.len() {
        visit(chosen);
        return;
    }
    for e in &comps[depth].entries {
        chosen.push(e);
        expand_blocks(comps, chosen, visit);
        chosen.pop();
    }
}

/// Suspension `b_n = s∘m_n∘(s⁻¹)^{⊗n}`: on basis tuples,
/// `b_n(sa₁,…,saₙ) = (−1)^{Σ_p (n−p)·deg a_p} s·m_n(a₁,…,aₙ)`.
pub fn suspend<S: Scalar>(m: &MultilinearOp<S>) -> MultilinearOp<S> {
    let n = m.arity as i64;
    let src = m.source.clone();
    let mut b = MultilinearOp::new(m.arity, m.source.clone(), m.target.clone(), m.shift);
    for (t, v) in &m.entries {
        let e: i64 = t.iter().enumerate().map(|(p, &a)| (n - 1 - p as i64) * src.degree(a)).sum();
        b.add_vector(t, v, &S::one().signed(parity(e)));
    }
    b
}

/// Inverse of [`suspend`] (the sign is an involution on each tuple).
pub fn desuspend<S: Scalar>(b: &MultilinearOp<S>) -> MultilinearOp<S> {
    suspend(b)
}

/// Outcome of squaring the bar coderivation.
#[derive(Clone, Debug, PartialEq)]
pub struct BarReport {
    pub max_word: usize,
    pub words_checked: usize,
    /// Shortest word length on which `D²` is nonzero.
    pub first_failure: Option<usize>,
    /// A word (labels) with `D²(word) ≠ 0` at that length.
    pub witness: Option<Vec<String>>,
}

impl BarReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

type Word = Vec<usize>;

/// Squares the coderivation `D = Σ 1^{⊗r} ⊗ b_k ⊗ 1^{⊗t}` induced by the
/// suspended operations on every tensor word of length `≤ max_word` and
/// checks `D² = 0`.
pub fn bar_check<S: Scalar>(a: &AInftyStructure<S>, max_word: usize) -> BarReport {
    let basis = a.basis.clone();
    let bs: BTreeMap<usize, MultilinearOp<S>> =
        a.ops.iter().filter(|(_, op)| !op.is_zero()).map(|(k, op)| (*k, suspend(op))).collect();
    let shifted = |i: usize| basis.degree(i) - 1;

    let apply_d = |word: &[usize]| -> BTreeMap<Word, S> {
        let mut out: BTreeMap<Word, S> = BTreeMap::new();
        let len = word.len();
        let mut prefix_deg = 0i64;
        for r in 0..len {
            for (k, b) in &bs {
                if r + k > len {
                    continue;
                }
                if let Some(v) = b.get(&word[r..r + k]) {
                    let odd = parity(prefix_deg);
                    for (o, c) in v {
                        let mut w = Vec::with_capacity(len - k + 1);
                        w.extend_from_slice(&word[..r]);
                        w.push(*o);
                        w.extend_from_slice(&word[r + k..]);
                        let c = c.signed(odd);
                        let slot = out.entry(w).or_insert_with(S::zero);
                        *slot = slot.add(&c);
                    }
                }
            }
            prefix_deg += shifted(word[r]);
        }
        out.retain(|_, c| !c.is_zero());
        out
    };

    let dim = basis.len();
    let mut checked = 0usize;
    for len in 1..=max_word {
        let mut word = vec![0usize; len];
        if dim == 0 {
            break;
        }
        loop {
            checked += 1;
            let mut sq: BTreeMap<Word, S> = BTreeMap::new();
            for (w, c) in apply_d(&word) {
                for (w2, c2) in apply_d(&w) {
                    let slot = sq.entry(w2).or_insert_with(S::zero);
                    *slot = slot.add(&c.mul(&c2));
                }
            }
            if sq.values().any(|c| !c.is_zero()) {
                return BarReport {
                    max_word,
                    words_checked: checked,
                    first_failure: Some(len),
                    witness: Some(word.iter().map(|&i| basis.label(i).to_string()).collect()),
                };
            }
            // Next word in lexicographic order.
            let mut p = len;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                word[p] += 1;
                if word[p] < dim {
                    break;
                }
                word[p] = 0;
                if p == 0 {
                    p = usize::MAX;
                    break;
                }
            }
            if p == usize::MAX {
                break;
            }
        }
    }
    BarReport { max_word, words_checked: checked, first_failure: None, witness: None }
}

/// Relation defects for arities `1..=max_arity`; returns the first failing
/// arity with its first nonzero entry.
pub fn first_relation_failure<S: Scalar>(
    a: &AInftyStructure<S>,
    max_arity: usize,
) -> Option<(usize, Vec<String>, String, S)> {
    for n in 1..=max_arity {
        let d = relation_defect(a, n);
        if let Some((ins, out, c)) = d.first_entry() {
            return Some((n, ins, out, c));
        }
    }
    None
}

/// Objects, hom spaces on increasing pairs, composition tables on
/// increasing sequences, and the declared transversal sequences.
#[derive(Clone, Debug)]
pub struct PreCategory<S> {
    objects: Vec<String>,
    homs: BTreeMap<(usize, usize), GradedBasis>,
    compositions: BTreeMap<Vec<usize>, Vec<(Vec<usize>, usize, S)>>,
    transversal: Vec<Vec<usize>>,
}

/// One located failure of [`pre_category_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct PreCategoryDefect {
    pub sequence: Vec<usize>,
    pub arity: usize,
    pub inputs: Vec<String>,
    pub output: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PreCategoryReport {
    pub closure_violations: Vec<Vec<usize>>,
    pub defects: Vec<PreCategoryDefect>,
    pub sequences_checked: usize,
}

impl PreCategoryReport {
    pub fn passed(&self) -> bool {
        self.closure_violations.is_empty() && self.defects.is_empty()
    }
}

impl<S: Scalar> PreCategory<S> {
    pub fn new(objects: Vec<String>) -> Self {
        PreCategory { objects, homs: BTreeMap::new(), compositions: BTreeMap::new(), transversal: Vec::new() }
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn set_hom(&mut self, i: usize, j: usize, basis: GradedBasis) -> Result<(), AInftyError> {
        if i >= j || j >= self.objects.len() {
            return Err(AInftyError::BasisMismatch(format!("hom ({i},{j}) is not an increasing pair of objects")));
        }
        self.homs.insert((i, j), basis);
        Ok(())
    }

    pub fn hom(&self, i: usize, j: usize) -> Option<&GradedBasis> {
        self.homs.get(&(i, j))
    }

    pub fn add_transversal(&mut self, seq: Vec<usize>) {
        self.transversal.push(seq);
    }

    /// Adds `c·out` to `m_k(ins…)` for the object sequence `seq`
    /// (`k = seq.len() − 1`); labels are local to the hom spaces involved.
    pub fn add_composition(&mut self, seq: &[usize], inputs: &[&str], output: &str, c: &S) -> Result<(), AInftyError> {
        let k = seq.len().checked_sub(1).filter(|&k| k >= 1).ok_or_else(|| AInftyError::Schema("sequence too short".into()))?;
        if inputs.len() != k {
            return Err(AInftyError::Arity { expected: k, got: inputs.len() });
        }
        if seq.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AInftyError::Schema("composition sequences must be increasing".into()));
        }
        let mut ins = Vec::with_capacity(k);
        let mut deg_sum = 0;
        for (p, l) in inputs.iter().enumerate() {
            let h = self.hom(seq[p], seq[p + 1]).ok_or_else(|| AInftyError::UnknownLabel(format!("hom {}->{}", seq[p], seq[p + 1])))?;
            let idx = h.lookup(l)?;
            deg_sum += h.degree(idx);
            ins.push(idx);
        }
        let oh = self.hom(seq[0], seq[k]).ok_or_else(|| AInftyError::UnknownLabel(format!("hom {}->{}", seq[0], seq[k])))?;
        let out = oh.lookup(output)?;
        if oh.degree(out) != deg_sum + 2 - k as i64 {
            return Err(AInftyError::DegreeRule {
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                output: output.to_string(),
                shift: 2 - k as i64,
            });
        }
        self.compositions.entry(seq.to_vec()).or_default().push((ins, out, c.clone()));
        Ok(())
    }

    fn global_label(&self, i: usize, j: usize, l: &str) -> String {
        format!("{}>{}:{}", self.objects[i], self.objects[j], l)
    }

    /// Direct-sum structure on `⊕_{p<q} Hom(X_{s_p}, X_{s_q})` for the
    /// objects of `seq`, with every composition among them.
    pub fn assemble(&self, seq: &[usize]) -> Result<AInftyStructure<S>, AInftyError> {
        let mut basis = GradedBasis::empty();
        let mut offsets: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (p, &i) in seq.iter().enumerate() {
            for &j in &seq[p + 1..] {
                if let Some(h) = self.hom(i, j) {
                    offsets.insert((i, j), basis.len());
                    for x in 0..h.len() {
                        basis.push(self.global_label(i, j, h.label(x)), h.degree(x))?;
                    }
                }
            }
        }
        let basis = Arc::new(basis);
        let members: BTreeSet<usize> = seq.iter().copied().collect();
        let mut s = AInftyStructure::new(basis);
        for (cseq, entries) in &self.compositions {
            if !cseq.iter().all(|o| members.contains(o)) {
                continue;
            }
            let k = cseq.len() - 1;
            let op = s.op_mut(k);
            for (ins, out, c) in entries {
                let gins: Vec<usize> = ins.iter().enumerate().map(|(p, &x)| offsets[&(cseq[p], cseq[p + 1])] + x).collect();
                let gout = offsets[&(cseq[0], cseq[k])] + out;
                op.add_entry(&gins, gout, c)?;
            }
        }
        Ok(s)
    }
}

/// Checks subsequence-closure of the transversal sequences, then the A∞
/// relations up to arity `len − 1` (capped by `max_arity`) on each.
pub fn pre_category_check<S: Scalar>(pc: &PreCategory<S>, max_arity: usize) -> Result<PreCategoryReport, AInftyError> {
    let mut report = PreCategoryReport::default();
    let declared: BTreeSet<Vec<usize>> = pc.transversal.iter().cloned().collect();
    for seq in &pc.transversal {
        for sub in subsequences(seq) {
            if sub.len() >= 2 && sub.len() < seq.len() && !declared.contains(&sub) {
                report.closure_violations.push(sub);
            }
        }
    }
    report.closure_violations.sort();
    report.closure_violations.dedup();
    for seq in &pc.transversal {
        let a = pc.assemble(seq)?;
        report.sequences_checked += 1;
        let top = seq.len().saturating_sub(1).min(max_arity).max(1);
        for n in 1..=top {
            let d = relation_defect(&a, n);
            if let Some((inputs, output, c)) = d.first_entry() {
                report.defects.push(PreCategoryDefect {
                    sequence: seq.clone(),
                    arity: n,
                    inputs,
                    output,
                    value: c.to_json().to_string(),
                });
                break;
            }
        }
    }
    Ok(report)
}

fn subsequences(seq: &[usize]) -> Vec<Vec<usize>> {
    let n = seq.len();
    (1u64..(1u64 << n))
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| seq[b]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, Q};

    fn basis(items: &[(&str, i64)]) -> Arc<GradedBasis> {
        Arc::new(GradedBasis::new(items.iter().map(|(l, d)| (*l, *d))).unwrap())
    }

    /// Λ[x] ⊗ {1, y, z | dy = z}: a 6-dimensional dg-algebra.
    fn small_dga() -> AInftyStructure<Q> {
        let b = basis(&[("1", 0), ("x", 1), ("y", 1), ("z", 2), ("xy", 2), ("xz", 3)]);
        let mut a = AInftyStructure::new(b);
        let m1 = a.op_mut(1);
        m1.add_labeled(&["y"], "z", &qi(1)).unwrap();
        m1.add_labeled(&["xy"], "xz", &qi(-1)).unwrap();
        let m2 = a.op_mut(2);
        for l in ["1", "x", "y", "z", "xy", "xz"] {
            m2.add_labeled(&["1", l], l, &qi(1)).unwrap();
            if l != "1" {
                m2.add_labeled(&[l, "1"], l, &qi(1)).unwrap();
            }
        }
        // x·y = xy, y·x = −xy, x·z = xz, z·x = xz.
        m2.add_labeled(&["x", "y"], "xy", &qi(1)).unwrap();
        m2.add_labeled(&["y", "x"], "xy", &qi(-1)).unwrap();
        m2.add_labeled(&["x", "z"], "xz", &qi(1)).unwrap();
        m2.add_labeled(&["z", "x"], "xz", &qi(1)).unwrap();
        a
    }

    #[test]
    fn dga_relations_vanish() {
        let a = small_dga();
        for n in 1..=4 {
            assert!(relation_defect(&a, n).is_zero(), "arity {n}");
        }
        assert!(bar_check(&a, 3).passed());
    }

    #[test]
    fn arity_one_is_m1_squared() {
        let b = basis(&[("a", 0), ("b", 1), ("c", 2)]);
        let mut a = AInftyStructure::<Q>::new(b);
        a.op_mut(1).add_labeled(&["a"], "b", &qi(1)).unwrap();
        a.op_mut(1).add_labeled(&["b"], "c", &qi(2)).unwrap();
        let d = relation_defect(&a, 1);
        assert_eq!(d.coeff(&[0], 2), qi(2));
        assert_eq!(d.shift(), 2);
        let bar = bar_check(&a, 2);
        assert_eq!(bar.first_failure, Some(1));
    }

    #[test]
    fn random_product_defect_is_associator() {
        // m₂ only: relation at arity 3 is m₂(m₂⊗1) − m₂(1⊗m₂) with the
        // degree-0 basis (no Koszul signs).
        let b = basis(&[("e0", 0), ("e1", 0), ("e2", 0)]);
        let mut a = AInftyStructure::<Q>::new(b.clone());
        let vals = [1, -2, 0, 3, 1, 1, -1, 2, 0, 0, 1, -3, 2, 2, 1, 0, -1, 1, 1, 0, 2, -2, 1, 3, 0, 1, 1];
        let mut it = vals.iter();
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    a.op_mut(2).add_entry(&[x, y], z, &qi(*it.next().unwrap())).unwrap();
                }
            }
        }
        let m2 = a.op(2).unwrap().clone();
        let d = relation_defect(&a, 3);
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    let e = |i: usize| BTreeMap::from([(i, qi(1))]);
                    let left = m2.apply(&[m2.apply(&[e(x), e(y)]), e(z)]);
                    let right = m2.apply(&[e(x), m2.apply(&[e(y), e(z)])]);
                    for o in 0..3 {
                        let expect = left.get(&o).cloned().unwrap_or_default() - right.get(&o).cloned().unwrap_or_default();
                        assert_eq!(d.coeff(&[x, y, z], o), expect);
                    }
                }
            }
        }
        assert!(!d.is_zero());
        assert_eq!(bar_check(&a, 3).first_failure, Some(3));
    }

    #[test]
    fn identity_morphism_has_no_defect() {
        let a = small_dga();
        let mut f = AInftyMorphismData::new(a.clone(), a.clone());
        f.set_component(MultilinearOp::identity(a.basis().clone())).unwrap();
        for n in 1..=3 {
            assert!(morphism_defect(&f, n).is_zero());
        }
    }

    #[test]
    fn non_multiplicative_chain_map() {
        // Scaling by 2 is a chain map but not multiplicative.
        let a = small_dga();
        let mut f = AInftyMorphismData::new(a.clone(), a.clone());
        f.set_component(MultilinearOp::identity(a.basis().clone()).scaled(&qi(2))).unwrap();
        assert!(morphism_defect(&f, 1).is_zero());
        let d = morphism_defect(&f, 2);
        // m₂(f₁⊗f₁) − f₁m₂ = 4m₂ − 2m₂ = 2m₂.
        let expect = a.op(2).unwrap().scaled(&qi(2));
        assert!(d.minus(&MultilinearOp::new(2, d.source().clone(), d.target().clone(), 0).plus(&expect).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn degree_rule_enforced() {
        let b = basis(&[("a", 0), ("b", 1)]);
        let mut a = AInftyStructure::<Q>::new(b);
        assert!(matches!(a.op_mut(2).add_labeled(&["a", "a"], "b", &qi(1)), Err(AInftyError::DegreeRule { .. })));
        assert!(a.op_mut(1).add_labeled(&["a"], "b", &qi(1)).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let a = small_dga();
        let back = AInftyStructure::<Q>::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        let bad = json!({"basis": [["a", 0], ["a", 1]], "ops": []});
        assert!(AInftyStructure::<Q>::from_json(&bad).is_err());
    }

    #[test]
    fn single_object_precategory() {
        let mut pc = PreCategory::<Q>::new(vec!["X".into(), "Y".into()]);
        pc.set_hom(0, 1, GradedBasis::new([("f", 0)]).unwrap()).unwrap();
        pc.add_transversal(vec![0, 1]);
        let r = pre_category_check(&pc, 3).unwrap();
        assert!(r.passed());
        let mut open = pc.clone();
        open.add_transversal(vec![0, 1, 2]);
        assert!(pre_category_check(&open, 3).is_err() || !pre_category_check(&open, 3).unwrap().passed());
    }
}
