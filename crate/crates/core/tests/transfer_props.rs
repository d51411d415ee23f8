use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use syz_core::ainfty::{bar_check, morphism_defect, relation_defect, AInftyStructure, SparseVec};
use syz_core::corpus::{cohomology_dims, massey, random_dga, random_retraction};
use syz_core::rational::{qi, Q};
use syz_core::transfer::{transfer_morphism, transfer_structure, RetractionData};
use syz_core::Scalar;

fn corpus(seed: u64, count: usize) -> Vec<RetractionData<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = random_dga(&mut rng, 6);
            let extra = rng.gen_bool(0.25);
            random_retraction(&a, &mut rng, extra)
        })
        .collect()
}

#[test]
fn transferred_structures_satisfy_relations() {
    let mut nontrivial = 0;
    for (case, r) in corpus(11, 40).iter().enumerate() {
        let b = transfer_structure(r, 5).unwrap();
        if b.max_arity() >= 3 {
            nontrivial += 1;
        }
        for n in 1..=5 {
            let d = relation_defect(&b, n);
            assert!(d.is_zero(), "case {case} arity {n}: {:?}", d.first_entry());
        }
        assert!(bar_check(&b, 4).passed(), "case {case}");
    }
    assert!(nontrivial >= 5, "corpus too tame: {nontrivial}");
}

#[test]
fn transfer_morphism_is_an_ainfty_morphism() {
    for (case, r) in corpus(12, 25).iter().enumerate() {
        let g = transfer_morphism(r, 4).unwrap();
        for n in 1..=4 {
            assert!(morphism_defect(&g, n).is_zero(), "case {case} arity {n}");
        }
    }
}

fn e(i: usize) -> SparseVec<Q> {
    BTreeMap::from([(i, qi(1))])
}

/// m₃ = p(m₂(Hm₂(ia, ib), ic) − (−1)^{|a|} m₂(ia, Hm₂(ib, ic))), expanded
/// by hand from the two binary trees with three leaves.
fn m3_by_hand(r: &RetractionData<Q>, x: usize, y: usize, z: usize) -> SparseVec<Q> {
    let m2 = r.ambient.op_or_zero(2);
    let one = |op: &syz_core::MultilinearOp<Q>, v: SparseVec<Q>| op.apply(&[v]);
    let (ix, iy, iz) = (one(&r.i, e(x)), one(&r.i, e(y)), one(&r.i, e(z)));
    let left = m2.apply(&[one(&r.h, m2.apply(&[ix.clone(), iy.clone()])), iz.clone()]);
    let right = m2.apply(&[ix, one(&r.h, m2.apply(&[iy, iz]))]);
    let odd = r.b_basis.degree(x).rem_euclid(2) == 1;
    let mut sum = left;
    for (k, c) in right {
        let v = sum.entry(k).or_insert_with(Q::zero);
        *v = v.clone() - c.signed(odd);
    }
    sum.retain(|_, c| !c.is_zero());
    one(&r.p, sum)
}

#[test]
fn m3_matches_direct_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen_nonzero = false;
    let mut rs = corpus(13, 20);
    for c in [-2, 0, 2, 3] {
        let a = syz_core::corpus::change_basis(&massey(c), &mut rng);
        rs.push(random_retraction(&a, &mut rng, false));
    }
    for r in &rs {
        let b = transfer_structure(r, 4).unwrap();
        let m3 = b.op_or_zero(3);
        let n = r.b_basis.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let expect = m3_by_hand(r, x, y, z);
                    let got = m3.get(&[x, y, z]).cloned().unwrap_or_default();
                    assert_eq!(got, expect);
                    seen_nonzero |= !expect.is_empty();
                }
            }
        }
    }
    assert!(seen_nonzero);
}

#[test]
fn cohomology_is_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let a = random_dga(&mut rng, 6);
        let extra = rng.gen_bool(0.5);
        let r = random_retraction(&a, &mut rng, extra);
        let b = transfer_structure(&r, 2).unwrap();
        let on_b: BTreeMap<i64, usize> = cohomology_dims(&b).into_iter().filter(|(_, d)| *d > 0).collect();
        let on_a: BTreeMap<i64, usize> = cohomology_dims(&a).into_iter().filter(|(_, d)| *d > 0).collect();
        assert_eq!(on_a, on_b);
        if !extra {
            assert!(b.op_or_zero(1).is_zero());
            // m₁ = 0 forces m₂ to be associative.
            let mut only_m2 = AInftyStructure::new(b.basis().clone());
            only_m2.set_op(b.op_or_zero(2)).unwrap();
            assert!(relation_defect(&only_m2, 3).is_zero());
        }
    }
}

#[test]
fn transferred_structure_survives_a_second_transfer() {
    // The ambient structure here already has m₃ ≠ 0.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = syz_core::corpus::change_basis(&massey(2), &mut rng);
    let r = random_retraction(&a, &mut rng, false);
    let b = transfer_structure(&r, 5).unwrap();
    assert!(b.max_arity() >= 3);
    let r2 = random_retraction(&b, &mut rng, false);
    let c = transfer_structure(&r2, 5).unwrap();
    for n in 1..=5 {
        assert!(relation_defect(&c, n).is_zero());
    }
}
