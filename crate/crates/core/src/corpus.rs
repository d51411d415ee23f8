//! Seeded random dg-algebras and retractions used by the property suites,
//! the acceptance pipelines and the benchmarks.
//!
//! Algebras are built from a few small blocks (the ground field, an
//! exterior algebra on a degree-1 generator, a square-zero algebra with a
//! nontrivial differential, and graded endomorphism algebras) by graded
//! tensor and direct products, then hidden behind a random degree-preserving
//! change of basis with entries in `{−2..2}`.

use crate::ainfty::{AInftyStructure, GradedBasis, MultilinearOp, SparseVec};
use crate::rational::{qi, QMatrix, Q};
use crate::transfer::RetractionData;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

fn structure(items: &[(&str, i64)]) -> AInftyStructure<Q> {
    AInftyStructure::new(Arc::new(GradedBasis::new(items.iter().map(|(l, d)| (*l, *d))).unwrap()))
}

fn unit_products(a: &mut AInftyStructure<Q>, unit: &str) {
    let labels: Vec<String> = a.basis().labels().to_vec();
    let m2 = a.op_mut(2);
    for l in &labels {
        m2.add_labeled(&[unit, l], l, &qi(1)).unwrap();
        if l != unit {
            m2.add_labeled(&[l, unit], l, &qi(1)).unwrap();
        }
    }
}

/// The ground field in degree 0.
pub fn ground() -> AInftyStructure<Q> {
    let mut a = structure(&[("1", 0)]);
    unit_products(&mut a, "1");
    a
}

/// `Λ[x]`, `deg x = 1`, `x² = 0`, no differential.
pub fn exterior() -> AInftyStructure<Q> {
    let mut a = structure(&[("1", 0), ("x", 1)]);
    unit_products(&mut a, "1");
    a
}

/// `{1, y, z}` with `deg y = 1`, `deg z = 2`, `dy = z`, all products of
/// positive-degree elements zero. Acyclic apart from the unit.
pub fn square_zero() -> AInftyStructure<Q> {
    let mut a = structure(&[("1", 0), ("y", 1), ("z", 2)]);
    unit_products(&mut a, "1");
    a.op_mut(1).add_labeled(&["y"], "z", &qi(1)).unwrap();
    a
}

/// `End(V)` for `V = ⟨e₁ (deg 0), e₂ (deg k)⟩`. With `differential`,
/// `k = 1` and `V` carries `δe₁ = e₂`, so the algebra is acyclic.
pub fn endomorphisms(k: i64, differential: bool) -> AInftyStructure<Q> {
    let k = if differential { 1 } else { k };
    let vdeg = [0, k];
    let mut items = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            items.push((format!("E{}{}", r + 1, c + 1), vdeg[r] - vdeg[c]));
        }
    }
    let mut a = AInftyStructure::new(Arc::new(GradedBasis::new(items.clone()).unwrap()));
    let idx = |r: usize, c: usize| 2 * r + c;
    let m2 = a.op_mut(2);
    for r in 0..2 {
        for j in 0..2 {
            for c in 0..2 {
                m2.add_entry(&[idx(r, j), idx(j, c)], idx(r, c), &qi(1)).unwrap();
            }
        }
    }
    if differential {
        // d(φ) = δφ − (−1)^{|φ|} φδ with δ = E21.
        let m1 = a.op_mut(1);
        for r in 0..2 {
            for c in 0..2 {
                let deg = items[idx(r, c)].1;
                if r == 0 {
                    m1.add_entry(&[idx(r, c)], idx(1, c), &qi(1)).unwrap();
                }
                if c == 1 {
                    m1.add_entry(&[idx(r, c)], idx(r, 0), &crate::scalar::Scalar::signed(&qi(1), deg.rem_euclid(2) == 0)).unwrap();
                }
            }
        }
    }
    a
}

/// `⟨1, a, x, u, v⟩` with `deg a = deg x = 1`, `deg u = deg v = 2`,
/// `a² = u`, `ax = v`, `xa = c·v` and `dx = u`. The class of `a` has a
/// nontrivial triple Massey product for generic `c`, so transfer onto
/// cohomology produces a nonzero `m₃`.
pub fn massey(c: i64) -> AInftyStructure<Q> {
    let mut a = structure(&[("1", 0), ("a", 1), ("x", 1), ("u", 2), ("v", 2)]);
    unit_products(&mut a, "1");
    let m2 = a.op_mut(2);
    m2.add_labeled(&["a", "a"], "u", &qi(1)).unwrap();
    m2.add_labeled(&["a", "x"], "v", &qi(1)).unwrap();
    m2.add_labeled(&["x", "a"], "v", &qi(c)).unwrap();
    a.op_mut(1).add_labeled(&["x"], "u", &qi(1)).unwrap();
    a
}

/// Graded tensor product of dg-algebras (uses `m₁`, `m₂` only).
pub fn tensor(a: &AInftyStructure<Q>, b: &AInftyStructure<Q>) -> AInftyStructure<Q> {
    let (ab, bb) = (a.basis(), b.basis());
    let mut items = Vec::new();
    for u in 0..ab.len() {
        for v in 0..bb.len() {
            items.push((format!("{}.{}", ab.label(u), bb.label(v)), ab.degree(u) + bb.degree(v)));
        }
    }
    let nb = bb.len();
    let pair = |u: usize, v: usize| u * nb + v;
    let mut t = AInftyStructure::new(Arc::new(GradedBasis::new(items).unwrap()));
    let (am1, bm1) = (a.op_or_zero(1), b.op_or_zero(1));
    let (am2, bm2) = (a.op_or_zero(2), b.op_or_zero(2));
    let m1 = t.op_mut(1);
    for u in 0..ab.len() {
        for v in 0..nb {
            if let Some(du) = am1.get(&[u]) {
                for (o, c) in du {
                    m1.add_entry(&[pair(u, v)], pair(*o, v), c).unwrap();
                }
            }
            if let Some(dv) = bm1.get(&[v]) {
                let odd = ab.degree(u).rem_euclid(2) == 1;
                for (o, c) in dv {
                    m1.add_entry(&[pair(u, v)], pair(u, *o), &crate::scalar::Scalar::signed(c, odd)).unwrap();
                }
            }
        }
    }
    let m2 = t.op_mut(2);
    for (ut, uo) in am2.entries() {
        for (vt, vo) in bm2.entries() {
            // (u⊗v)(u'⊗v') = (−1)^{|v||u'|} uu' ⊗ vv'
            let odd = (bb.degree(vt[0]) * ab.degree(ut[1])).rem_euclid(2) == 1;
            for (o1, c1) in uo {
                for (o2, c2) in vo {
                    m2.add_entry(&[pair(ut[0], vt[0]), pair(ut[1], vt[1])], pair(*o1, *o2), &crate::scalar::Scalar::signed(&(c1 * c2), odd))
                        .unwrap();
                }
            }
        }
    }
    t
}

/// Direct product: block-diagonal operations on the disjoint union of bases.
pub fn product(a: &AInftyStructure<Q>, b: &AInftyStructure<Q>) -> AInftyStructure<Q> {
    let mut items: Vec<(String, i64)> = Vec::new();
    for (tag, s) in [("L", a), ("R", b)] {
        for i in 0..s.basis().len() {
            items.push((format!("{tag}{}", s.basis().label(i)), s.basis().degree(i)));
        }
    }
    let off = a.basis().len();
    let mut p = AInftyStructure::new(Arc::new(GradedBasis::new(items).unwrap()));
    for (shift, s) in [(0, a), (off, b)] {
        for n in s.arities().collect::<Vec<_>>() {
            let op = s.op(n).unwrap();
            for (t, v) in op.entries() {
                let t2: Vec<usize> = t.iter().map(|x| x + shift).collect();
                for (o, c) in v {
                    p.op_mut(n).add_entry(&t2, o + shift, c).unwrap();
                }
            }
        }
    }
    p
}

fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let m = QMatrix::from_i64(&rows);
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Re-expresses every operation in a random basis `e'_j = Σ_i C_ij e_i`
/// with one invertible block `C` per degree. Labels become `e0, e1, …`.
pub fn change_basis<R: Rng>(a: &AInftyStructure<Q>, rng: &mut R) -> AInftyStructure<Q> {
    let basis = a.basis();
    let n = basis.len();
    let mut c = QMatrix::zeros(n, n);
    let mut degs: Vec<i64> = basis.degrees().to_vec();
    degs.sort();
    degs.dedup();
    for d in degs {
        let idx = basis.indices_of_degree(d);
        let block = random_invertible(rng, idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (k, &j) in idx.iter().enumerate() {
                c[(i, j)] = block[(r, k)].clone();
            }
        }
    }
    let cinv = c.inverse().expect("block-diagonal invertible");
    let col = |j: usize| -> SparseVec<Q> { (0..n).filter(|&i| !c[(i, j)].is_zero()).map(|i| (i, c[(i, j)].clone())).collect() };
    let new_basis =
        Arc::new(GradedBasis::new((0..n).map(|i| (format!("e{i}"), basis.degree(i)))).unwrap());
    let mut out = AInftyStructure::new(new_basis);
    for k in a.arities().collect::<Vec<_>>() {
        let op = a.op(k).unwrap();
        let mut tuple = vec![0usize; k];
        loop {
            let w = op.apply(&tuple.iter().map(|&j| col(j)).collect::<Vec<_>>());
            if !w.is_empty() {
                let x: Vec<Q> = (0..n).map(|i| w.get(&i).cloned().unwrap_or_default()).collect();
                let y = cinv.mul_vec(&x);
                for (o, v) in y.iter().enumerate() {
                    out.op_mut(k).add_entry(&tuple, o, v).unwrap();
                }
            }
            if !next_tuple(&mut tuple, n) {
                break;
            }
        }
    }
    out
}

pub(crate) fn next_tuple(t: &mut [usize], n: usize) -> bool {
    for p in (0..t.len()).rev() {
        t[p] += 1;
        if t[p] < n {
            return true;
        }
        t[p] = 0;
    }
    false
}

/// A random associative dg-algebra of dimension between 1 and `max_dim`
/// (at most 6), in a random basis.
pub fn random_dga<R: Rng>(rng: &mut R, max_dim: usize) -> AInftyStructure<Q> {
    let recipes: Vec<fn(&mut R) -> AInftyStructure<Q>> = vec![
        |_| ground(),
        |_| exterior(),
        |_| square_zero(),
        |r| endomorphisms(r.gen_range(-1..=2), r.gen_bool(0.5)),
        |_| tensor(&exterior(), &exterior()),
        |_| tensor(&exterior(), &square_zero()),
        |_| tensor(&square_zero(), &exterior()),
        |_| product(&ground(), &square_zero()),
        |_| product(&exterior(), &square_zero()),
        |_| product(&square_zero(), &square_zero()),
        |_| product(&exterior(), &exterior()),
        |_| product(&endomorphisms(1, true), &exterior()),
        |r| product(&ground(), &endomorphisms(r.gen_range(0..=1), r.gen_bool(0.5))),
        |_| tensor(&exterior(), &tensor(&exterior(), &ground())),
        |r| product(&ground(), &massey(r.gen_range(-2..=2))),
    ];
    loop {
        // Algebras with Massey products are the ones with interesting
        // transferred structures; give them a larger share.
        if rng.gen_bool(0.35) {
            let c = *[-2i64, 0, 2, 3].choose(rng).unwrap();
            return change_basis(&massey(c), rng);
        }
        let f = recipes.choose(rng).unwrap();
        let a = f(rng);
        if a.basis().len() <= max_dim.min(6) {
            return change_basis(&a, rng);
        }
    }
}

/// Matrix of the degree-`k` component of `m₁` (rows: degree `k+1`).
fn d_block(a: &AInftyStructure<Q>, k: i64) -> (Vec<usize>, Vec<usize>, QMatrix) {
    let b = a.basis();
    let src = b.indices_of_degree(k);
    let tgt = b.indices_of_degree(k + 1);
    let d = a.op_or_zero(1);
    let mut m = QMatrix::zeros(tgt.len(), src.len());
    for (c, &s) in src.iter().enumerate() {
        for (r, &t) in tgt.iter().enumerate() {
            m[(r, c)] = d.coeff(&[s], t);
        }
    }
    (src, tgt, m)
}

/// Cohomology dimension of `m₁` in each degree present in the basis.
pub fn cohomology_dims(a: &AInftyStructure<Q>) -> BTreeMap<i64, usize> {
    let mut degs: Vec<i64> = a.basis().degrees().to_vec();
    degs.sort();
    degs.dedup();
    degs.into_iter()
        .map(|k| {
            let (src, _, out) = d_block(a, k);
            let (_, _, inc) = d_block(a, k - 1);
            (k, src.len() - out.rank() - inc.rank())
        })
        .collect()
}

fn cols_to_matrix(rows: usize, cols: &[Vec<Q>]) -> QMatrix {
    let mut m = QMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for i in 0..rows {
            m[(i, j)] = c[i].clone();
        }
    }
    m
}

/// Extends the independent columns `base` by random combinations of
/// `pool` until they span the span of `base ∪ pool`.
fn extend_randomly<R: Rng>(rng: &mut R, dim: usize, base: &[Vec<Q>], pool: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let target = {
        let mut all = base.to_vec();
        all.extend_from_slice(pool);
        cols_to_matrix(dim, &all).rank()
    };
    let mut have = base.to_vec();
    let mut added = Vec::new();
    while have.len() < target {
        let coeffs: Vec<Q> = pool.iter().map(|_| qi(rng.gen_range(-2..=2))).collect();
        let v: Vec<Q> = (0..dim)
            .map(|i| pool.iter().zip(&coeffs).fold(Q::zero(), |s, (p, c)| s + &p[i] * c))
            .collect();
        let mut trial = have.clone();
        trial.push(v.clone());
        if cols_to_matrix(dim, &trial).rank() == trial.len() {
            have = trial;
            added.push(v);
        }
    }
    added
}

/// A random valid retraction of `a` onto a copy of its cohomology.
///
/// Each degree is split as `im d ⊕ H ⊕ C` with random complements and the
/// homotopy inverts `d: C → im d`. With `extra_pair`, one acyclic pair
/// `(c, dc)` (if any) is kept in `B` as well, so `m₁^B ≠ 0`.
pub fn random_retraction<R: Rng>(a: &AInftyStructure<Q>, rng: &mut R, extra_pair: bool) -> RetractionData<Q> {
    let basis = a.basis().clone();
    let n = basis.len();
    let mut degs: Vec<i64> = basis.degrees().to_vec();
    degs.sort();
    degs.dedup();
    // Global coordinates for a vector supported on a degree block.
    let embed = |idx: &[usize], v: &[Q]| -> Vec<Q> {
        let mut g = vec![Q::zero(); n];
        for (k, &i) in idx.iter().enumerate() {
            g[i] = v[k].clone();
        }
        g
    };
    let unit = |dim: usize, k: usize| -> Vec<Q> { (0..dim).map(|i| if i == k { qi(1) } else { Q::zero() }).collect() };

    // Per degree: C^k (complement of cycles) and the images d(C^k).
    let mut comp: BTreeMap<i64, Vec<Vec<Q>>> = BTreeMap::new();
    let mut bnd: BTreeMap<i64, Vec<Vec<Q>>> = BTreeMap::new();
    let mut harm: BTreeMap<i64, Vec<Vec<Q>>> = BTreeMap::new();
    let dmat = a.op_or_zero(1);
    let apply_d = |v: &[Q]| -> Vec<Q> {
        let sv: SparseVec<Q> = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
        let w = dmat.apply(&[sv]);
        (0..n).map(|i| w.get(&i).cloned().unwrap_or_default()).collect()
    };
    for &k in &degs {
        let (src, _, m) = d_block(a, k);
        let kernel: Vec<Vec<Q>> = m.kernel().into_iter().map(|v| embed(&src, &v)).collect();
        let all: Vec<Vec<Q>> = (0..src.len()).map(|j| embed(&src, &unit(src.len(), j))).collect();
        let c = extend_randomly(rng, n, &kernel, &all);
        let images: Vec<Vec<Q>> = c.iter().map(|v| apply_d(v)).collect();
        comp.insert(k, c);
        bnd.entry(k + 1).or_default().extend(images);
    }
    for &k in &degs {
        let (src, _, m) = d_block(a, k);
        let kernel: Vec<Vec<Q>> = m.kernel().into_iter().map(|v| embed(&src, &v)).collect();
        let b = bnd.get(&k).cloned().unwrap_or_default();
        harm.insert(k, extend_randomly(rng, n, &b, &kernel));
    }

    // Optionally move one pair (c, dc) from the complement into B.
    let mut kept: Option<(i64, usize)> = None;
    if extra_pair {
        let candidates: Vec<(i64, usize)> =
            comp.iter().flat_map(|(k, cs)| (0..cs.len()).map(move |j| (*k, j))).collect();
        kept = candidates.choose(rng).copied();
    }

    // New coordinates: columns [B-part | rest]. B-part = harmonic vectors
    // plus the kept pair; H inverts d on the remaining boundaries.
    let mut b_items: Vec<(String, i64)> = Vec::new();
    let mut b_vecs: Vec<Vec<Q>> = Vec::new();
    let mut rest: Vec<Vec<Q>> = Vec::new();
    let mut h_pairs: Vec<(Vec<Q>, Vec<Q>)> = Vec::new(); // (boundary, preimage)
    for &k in &degs {
        for (j, v) in harm[&k].iter().enumerate() {
            b_items.push((format!("h{k}_{j}"), k));
            b_vecs.push(v.clone());
        }
    }
    for (&k, cs) in &comp {
        for (j, c) in cs.iter().enumerate() {
            let dc = apply_d(c);
            if kept == Some((k, j)) {
                b_items.push((format!("c{k}"), k));
                b_vecs.push(c.clone());
                b_items.push((format!("dc{k}"), k + 1));
                b_vecs.push(dc);
            } else {
                rest.push(c.clone());
                rest.push(dc.clone());
                h_pairs.push((dc, c.clone()));
            }
        }
    }
    let b_basis = Arc::new(GradedBasis::new(b_items).unwrap());
    let mut all = b_vecs.clone();
    all.extend(rest);
    let frame = cols_to_matrix(n, &all);
    let frame_inv = frame.inverse().expect("complements span A");

    let mut i_op = MultilinearOp::new(1, b_basis.clone(), basis.clone(), 0);
    for (j, v) in b_vecs.iter().enumerate() {
        for (o, x) in v.iter().enumerate() {
            i_op.add_entry(&[j], o, x).unwrap();
        }
    }
    // p(e_s) = first |B| frame coordinates of e_s.
    let mut p_op = MultilinearOp::new(1, basis.clone(), b_basis.clone(), 0);
    for s in 0..n {
        for j in 0..b_vecs.len() {
            p_op.add_entry(&[s], j, &frame_inv[(j, s)]).unwrap();
        }
    }
    // H(e_s) = Σ (coordinate of e_s along boundary dc) · c.
    let mut h_op = MultilinearOp::new(1, basis.clone(), basis.clone(), -1);
    let offset = b_vecs.len();
    for s in 0..n {
        for (t, (_, pre)) in h_pairs.iter().enumerate() {
            // rest is interleaved (c, dc); boundary of pair t sits at 2t+1.
            let coord = &frame_inv[(offset + 2 * t + 1, s)];
            if coord.is_zero() {
                continue;
            }
            for (o, x) in pre.iter().enumerate() {
                h_op.add_entry(&[s], o, &(coord * x)).unwrap();
            }
        }
    }
    RetractionData::new(a.clone(), b_basis, i_op, p_op, h_op).expect("shapes are consistent")
}

/// Adds a random degree-respecting perturbation to one operation of arity
/// `arity`, producing a structure whose relations fail. Returns `None` if
/// no entry of that arity respects the degree rule.
pub fn corrupt<R: Rng>(a: &AInftyStructure<Q>, rng: &mut R, arity: usize) -> Option<AInftyStructure<Q>> {
    let basis = a.basis().clone();
    let n = basis.len();
    let shift = 2 - arity as i64;
    let mut slots = Vec::new();
    let mut t = vec![0usize; arity];
    loop {
        let s: i64 = t.iter().map(|&i| basis.degree(i)).sum();
        for o in basis.indices_of_degree(s + shift) {
            slots.push((t.clone(), o));
        }
        if !next_tuple(&mut t, n) {
            break;
        }
    }
    if slots.is_empty() {
        return None;
    }
    let (t, o) = slots.choose(rng).unwrap().clone();
    let mut out = a.clone();
    let delta = if rng.gen_bool(0.5) { qi(1) } else { qi(-1) };
    out.op_mut(arity).add_entry(&t, o, &delta).unwrap();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::relation_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn blocks_are_dg_algebras() {
        for a in [
            ground(),
            exterior(),
            square_zero(),
            massey(1),
            massey(-1),
            endomorphisms(0, false),
            endomorphisms(1, true),
            endomorphisms(2, false),
            tensor(&exterior(), &square_zero()),
            tensor(&endomorphisms(1, true), &exterior()),
            product(&exterior(), &endomorphisms(1, true)),
        ] {
            for n in 1..=3 {
                assert!(relation_defect(&a, n).is_zero(), "{:?} arity {n}", a.basis().labels());
            }
        }
    }

    #[test]
    fn cohomology_of_blocks() {
        assert_eq!(cohomology_dims(&square_zero()), BTreeMap::from([(0, 1), (1, 0), (2, 0)]));
        assert!(cohomology_dims(&endomorphisms(1, true)).values().all(|&d| d == 0));
    }

    #[test]
    fn random_algebras_and_retractions_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let a = random_dga(&mut rng, 6);
            for n in 1..=3 {
                assert!(relation_defect(&a, n).is_zero());
            }
            let extra = rng.gen_bool(0.5);
            let r = random_retraction(&a, &mut rng, extra);
            assert!(r.validate().is_valid(), "{:?}", r.validate());
            if !extra {
                let dims: usize = cohomology_dims(&a).values().sum();
                assert_eq!(r.b_basis.len(), dims);
            }
        }
    }
}
