//! Homotopy transfer of A∞ structures along retraction data.
//!
//! All tree sums are evaluated in the suspended picture: the ambient
//! operations become `b_k` of degree +1, `i` and `p` have degree 0 and every
//! internal edge carries `−H` (degree −1). Each subtree then evaluates to a
//! degree-0 map, so tensoring subtrees produces no Koszul signs and the only
//! signs are those of the suspension itself.

use crate::ainfty::{
    desuspend, suspend, AInftyError, AInftyMorphismData, AInftyStructure, GradedBasis, MultilinearOp,
    SparseVec,
};
use crate::scalar::Scalar;
use crate::trees::{enumerate, PlanarTree};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("invalid retraction: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AInftyError),
}

/// Ambient structure on `A`, a graded basis for `B`, and maps
/// `i: B → A`, `p: A → B` (degree 0), `H: A → A` (degree −1).
#[derive(Clone, Debug, PartialEq)]
pub struct RetractionData<S> {
    pub ambient: AInftyStructure<S>,
    pub b_basis: Arc<GradedBasis>,
    pub i: MultilinearOp<S>,
    pub p: MultilinearOp<S>,
    pub h: MultilinearOp<S>,
}

/// Entry-level failures of the retraction identities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RetractionReport {
    /// `(identity, input label, output label, value of the failing difference)`
    pub failures: Vec<(String, String, String, String)>,
}

impl RetractionReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `f ∘ g` for arity-one operations.
pub fn compose1<S: Scalar>(f: &MultilinearOp<S>, g: &MultilinearOp<S>) -> MultilinearOp<S> {
    let mut out = MultilinearOp::new(1, g.source().clone(), f.target().clone(), f.shift() + g.shift());
    for (t, v) in g.entries() {
        let w = f.apply(std::slice::from_ref(v));
        for (o, c) in w {
            out.add_unchecked(t, o, &c);
        }
    }
    out
}

impl<S: Scalar> RetractionData<S> {
    pub fn new(
        ambient: AInftyStructure<S>,
        b_basis: Arc<GradedBasis>,
        i: MultilinearOp<S>,
        p: MultilinearOp<S>,
        h: MultilinearOp<S>,
    ) -> Result<Self, TransferError> {
        let a = ambient.basis();
        let shape = |op: &MultilinearOp<S>, src: &Arc<GradedBasis>, tgt: &Arc<GradedBasis>, shift: i64, name: &str| {
            if op.arity() != 1 || op.source() != src || op.target() != tgt || op.shift() != shift {
                Err(TransferError::Invalid(format!("{name} has the wrong shape")))
            } else {
                op.check_degrees().map_err(TransferError::from)
            }
        };
        shape(&i, &b_basis, a, 0, "i")?;
        shape(&p, a, &b_basis, 0, "p")?;
        shape(&h, a, a, -1, "H")?;
        Ok(RetractionData { ambient, b_basis, i, p, h })
    }

    fn d(&self) -> MultilinearOp<S> {
        let a = self.ambient.basis().clone();
        self.ambient.op(1).cloned().unwrap_or_else(|| MultilinearOp::new(1, a.clone(), a, 1))
    }

    /// Checks `p∘i = 1`, `dΠ = Πd` and `1 − Π = dH + Hd` entrywise.
    pub fn validate(&self) -> RetractionReport {
        let mut report = RetractionReport::default();
        let d = self.d();
        let pi = compose1(&self.p, &self.i);
        let id_b = MultilinearOp::identity(self.b_basis.clone());
        record(&mut report, "p∘i = 1", &pi.minus(&id_b).expect("same shape"));
        let proj = compose1(&self.i, &self.p);
        let comm = compose1(&d, &proj).minus(&compose1(&proj, &d)).expect("same shape");
        record(&mut report, "dΠ = Πd", &comm);
        let id_a = MultilinearOp::identity(self.ambient.basis().clone());
        let lhs = id_a.minus(&proj).expect("same shape");
        let rhs = compose1(&d, &self.h).plus(&compose1(&self.h, &d)).expect("same shape");
        record(&mut report, "1 − Π = dH + Hd", &lhs.minus(&rhs).expect("same shape"));
        report
    }

    pub fn to_json(&self) -> Value {
        json!({
            "b_basis": self.b_basis.to_json(),
            "i": self.i.entries_json(),
            "p": self.p.entries_json(),
            "h": self.h.entries_json(),
        })
    }

    /// Reads the retraction block; `ambient` supplies the basis of `A`.
    pub fn from_json(ambient: AInftyStructure<S>, v: &Value) -> Result<Self, TransferError> {
        let field = |k: &str| v.get(k).ok_or_else(|| AInftyError::Schema(format!("retraction needs {k}")));
        let b = Arc::new(GradedBasis::from_json(field("b_basis")?)?);
        let a = ambient.basis().clone();
        let op = |k: &str, src: &Arc<GradedBasis>, tgt: &Arc<GradedBasis>, shift: i64| -> Result<MultilinearOp<S>, TransferError> {
            let wrapped = json!({"arity": 1, "entries": field(k)?});
            Ok(MultilinearOp::from_json(&wrapped, src.clone(), tgt.clone(), |_| shift)?)
        };
        let i = op("i", &b, &a, 0)?;
        let p = op("p", &a, &b, 0)?;
        let h = op("h", &a, &a, -1)?;
        RetractionData::new(ambient, b, i, p, h)
    }
}

fn record<S: Scalar>(report: &mut RetractionReport, what: &str, diff: &MultilinearOp<S>) {
    for (t, v) in diff.entries() {
        for (o, c) in v {
            report.failures.push((
                what.to_string(),
                diff.source().label(t[0]).to_string(),
                diff.target().label(*o).to_string(),
                c.to_json().to_string(),
            ));
        }
    }
}

/// Tree sums for one retraction. Subtree values are cached, so each
/// distinct planar subtree is evaluated once across arities.
struct TreeEvaluator<'a, S: Scalar> {
    r: &'a RetractionData<S>,
    b_ops: BTreeMap<usize, MultilinearOp<S>>,
    cache: HashMap<PlanarTree, MultilinearOp<S>>,
    /// `−H` (suspended; same table as `H` in arity one).
    neg_h: MultilinearOp<S>,
}

impl<'a, S: Scalar> TreeEvaluator<'a, S> {
    fn new(r: &'a RetractionData<S>) -> Self {
        let b_ops = r.ambient.arities().map(|k| (k, suspend(r.ambient.op(k).unwrap()))).collect();
        let neg_h = r.h.scaled(&S::one().neg());
        TreeEvaluator { r, b_ops, cache: HashMap::new(), neg_h }
    }

    /// `λ_T : B^{⊗n} → A`: `b_k` at each vertex, `i` on leaves, `−H` on
    /// internal edges.
    fn eval(&mut self, t: &PlanarTree) -> MultilinearOp<S> {
        if let Some(v) = self.cache.get(t) {
            return v.clone();
        }
        let a = self.r.ambient.basis().clone();
        let b = self.r.b_basis.clone();
        let out = match t {
            PlanarTree::Leaf => self.r.i.clone(),
            PlanarTree::Node(children) => {
                let n = t.leaves();
                let mut acc = MultilinearOp::new(n, b, a.clone(), 2 - n as i64);
                if let Some(bk) = self.b_ops.get(&children.len()).cloned() {
                    let factors: Vec<MultilinearOp<S>> = children
                        .iter()
                        .map(|c| {
                            let v = self.eval(c);
                            if c.is_leaf() {
                                v
                            } else {
                                post_compose(&self.neg_h, &v)
                            }
                        })
                        .collect();
                    if factors.iter().all(|f| !f.is_zero()) {
                        tensor_apply(&bk, &factors, &mut acc);
                    }
                }
                acc
            }
        };
        self.cache.insert(t.clone(), out.clone());
        out
    }

    /// `Σ_T λ_T` over all trees with `n ≥ 2` leaves.
    fn lambda(&mut self, n: usize) -> MultilinearOp<S> {
        let a = self.r.ambient.basis().clone();
        let mut acc = MultilinearOp::new(n, self.r.b_basis.clone(), a, 2 - n as i64);
        for t in enumerate(n, 2) {
            let v = self.eval(&t);
            for (tuple, vec) in v.entries() {
                acc.add_vector(tuple, vec, &S::one());
            }
        }
        acc
    }
}

/// `f ∘ g` where `f` has arity one and `g` any arity.
fn post_compose<S: Scalar>(f: &MultilinearOp<S>, g: &MultilinearOp<S>) -> MultilinearOp<S> {
    let mut out = MultilinearOp::new(g.arity(), g.source().clone(), f.target().clone(), f.shift() + g.shift());
    for (t, v) in g.entries() {
        let w = f.apply(std::slice::from_ref(v));
        out.add_vector(t, &w, &S::one());
    }
    out
}

/// `acc += op ∘ (f₁ ⊗ … ⊗ f_k)` for degree-0 (suspended) factors.
fn tensor_apply<S: Scalar>(op: &MultilinearOp<S>, factors: &[MultilinearOp<S>], acc: &mut MultilinearOp<S>) {
    fn rec<S: Scalar>(
        op: &MultilinearOp<S>,
        factors: &[MultilinearOp<S>],
        tuple: &mut Vec<usize>,
        vecs: &mut Vec<SparseVec<S>>,
        acc: &mut MultilinearOp<S>,
    ) {
        let depth = vecs.len();
        if depth == factors.len() {
            let w = op.apply(vecs);
            acc.add_vector(tuple, &w, &S::one());
            return;
        }
        for (t, v) in factors[depth].entries() {
            let len = tuple.len();
            tuple.extend_from_slice(t);
            vecs.push(v.clone());
            rec(op, factors, tuple, vecs, acc);
            vecs.pop();
            tuple.truncate(len);
        }
    }
    rec(op, factors, &mut Vec::new(), &mut Vec::new(), acc);
}

fn ensure_valid<S: Scalar>(r: &RetractionData<S>) -> Result<(), TransferError> {
    let rep = r.validate();
    if let Some((what, i, o, v)) = rep.failures.first() {
        return Err(TransferError::Invalid(format!("{what} fails at {i} -> {o} (difference {v})")));
    }
    Ok(())
}

/// Transferred operations `m_n^B` for `n ≤ max_arity`:
/// `m₁^B = p m₁ i` and `m_n^B = Σ_T p∘λ_T` over planar trees with `n` leaves.
pub fn transfer_structure<S: Scalar>(r: &RetractionData<S>, max_arity: usize) -> Result<AInftyStructure<S>, TransferError> {
    ensure_valid(r)?;
    let mut out = AInftyStructure::new(r.b_basis.clone());
    let d = r.d();
    out.set_op(compose1(&r.p, &compose1(&d, &r.i)))?;
    let mut ev = TreeEvaluator::new(r);
    for n in 2..=max_arity {
        let lam = ev.lambda(n);
        out.set_op(desuspend(&post_compose(&r.p, &lam)))?;
    }
    Ok(out)
}

/// The canonical morphism `g: B → A` with `g₁ = i` and
/// `g_n = Σ_T (−H)∘λ_T` for `n ≥ 2`.
pub fn transfer_morphism<S: Scalar>(r: &RetractionData<S>, max_arity: usize) -> Result<AInftyMorphismData<S>, TransferError> {
    let b = transfer_structure(r, max_arity)?;
    let mut g = AInftyMorphismData::new(b, r.ambient.clone());
    g.set_component(r.i.clone())?;
    let mut ev = TreeEvaluator::new(r);
    let neg_h = r.h.scaled(&S::one().neg());
    for n in 2..=max_arity {
        let lam = ev.lambda(n);
        g.set_component(desuspend(&post_compose(&neg_h, &lam)))?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, Q};

    fn contractible() -> RetractionData<Q> {
        let a = Arc::new(GradedBasis::new([("a", 0), ("b", 1)]).unwrap());
        let mut s = AInftyStructure::new(a.clone());
        s.op_mut(1).add_labeled(&["a"], "b", &qi(1)).unwrap();
        let b = Arc::new(GradedBasis::empty());
        let i = MultilinearOp::new(1, b.clone(), a.clone(), 0);
        let p = MultilinearOp::new(1, a.clone(), b.clone(), 0);
        let mut h = MultilinearOp::new(1, a.clone(), a.clone(), -1);
        h.add_labeled(&["b"], "a", &qi(1)).unwrap();
        RetractionData::new(s, b, i, p, h).unwrap()
    }

    #[test]
    fn contractible_case() {
        let r = contractible();
        assert!(r.validate().is_valid());
        let m = transfer_structure(&r, 4).unwrap();
        assert_eq!(m.max_arity(), 0);
        let g = transfer_morphism(&r, 3).unwrap();
        assert!(g.component(1).unwrap().is_zero());

        let mut bad = r.clone();
        bad.h = bad.h.scaled(&qi(2));
        let rep = bad.validate();
        assert!(!rep.is_valid());
        assert!(rep.failures.iter().all(|f| f.0 == "1 − Π = dH + Hd"));
        assert!(transfer_structure(&bad, 3).is_err());
    }

    #[test]
    fn identity_retraction() {
        let a = crate::corpus::tensor(&crate::corpus::exterior(), &crate::corpus::square_zero());
        let basis = a.basis().clone();
        let id = MultilinearOp::identity(basis.clone());
        let h = MultilinearOp::new(1, basis.clone(), basis.clone(), -1);
        let r = RetractionData::new(a.clone(), basis, id.clone(), id, h).unwrap();
        assert!(r.validate().is_valid());
        let m = transfer_structure(&r, 4).unwrap();
        assert_eq!(m.op_or_zero(1), a.op_or_zero(1));
        assert_eq!(m.op_or_zero(2), a.op_or_zero(2));
        assert!(m.op_or_zero(3).is_zero() && m.op_or_zero(4).is_zero());
        let g = transfer_morphism(&r, 3).unwrap();
        assert!(g.component(2).unwrap().is_zero());
    }
}
