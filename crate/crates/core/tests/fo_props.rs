use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syz_core::ainfty::pre_category_check;
use syz_core::fukaya_oh::{fo_category, intersections, m2_entry, mk_vanishing_certificate, AffineLagrangian};
use syz_core::rational::{integer_box, q, qi, Q};
use syz_core::{QMatrix, Valuation};

fn line(a: i64, b: Q, u: Q) -> AffineLagrangian {
    AffineLagrangian::line(a, b, u).unwrap()
}

fn random_shift(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-3..=3), rng.gen_range(1..=4))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Q {
    let n = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    q(n, rng.gen_range(1..=3))
}

fn sym2(a: i64, b: i64, c: i64) -> QMatrix {
    QMatrix::from_i64(&[vec![a, b], vec![b, c]])
}

/// Brute force: every `y` in the grid `(1/N)Zⁿ ∩ [0,1)ⁿ`, `N` a multiple of
/// det·(shift denominators), with `Dy + β` integral.
fn brute_count(d: &QMatrix, beta: &[Q]) -> usize {
    let det = d.det().numer().clone();
    let den = beta.iter().fold(BigInt::one(), |a, b| num_integer::Integer::lcm(&a, b.denom()));
    let n_grid = det.magnitude().clone() * den.magnitude();
    let n = beta.len();
    let top = BigInt::from(n_grid.clone()) - 1;
    let grid = BigInt::from(n_grid);
    integer_box(&vec![BigInt::zero(); n], &vec![top; n])
        .into_iter()
        .filter(|p| {
            let y: Vec<Q> = p.iter().map(|x| Q::new(x.clone(), grid.clone())).collect();
            d.mul_vec(&y).iter().zip(beta).all(|(a, b)| (a + b).is_integer())
        })
        .count()
}

#[test]
fn intersection_counts_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let a = sym2(rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let b = sym2(rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let d = b.sub(&a);
        if d.det().is_zero() {
            continue;
        }
        let sa = vec![random_shift(&mut rng), random_shift(&mut rng)];
        let sb = vec![random_shift(&mut rng), random_shift(&mut rng)];
        let beta: Vec<Q> = sb.iter().zip(&sa).map(|(x, y)| x - y).collect();
        let la = AffineLagrangian::untwisted(a, sa).unwrap();
        let lb = AffineLagrangian::untwisted(b, sb).unwrap();
        let pts = intersections(&la, &lb).unwrap();
        let det = d.det().numer().magnitude().clone();
        assert_eq!(BigInt::from(pts.len()), BigInt::from(det));
        assert_eq!(pts.len(), brute_count(&d, &beta));
        let neg = d.inertia().1 as i64;
        assert!(pts.iter().all(|p| p.degree == neg));
    }
}

#[test]
fn associativity_on_convex_quadruples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cutoff = qi(20);
    for slopes in [[0, 1, 2, 3], [0, 1, 3, 4]] {
        for trial in 0..4 {
            let ls: Vec<AffineLagrangian> = slopes
                .iter()
                .map(|&a| {
                    if trial == 0 {
                        line(a, Q::zero(), Q::one())
                    } else {
                        line(a, random_shift(&mut rng), random_unit(&mut rng))
                    }
                })
                .collect();
            let cat = fo_category(&ls, &cutoff).unwrap();
            let rep = pre_category_check(&cat.category, 3).unwrap();
            assert!(rep.passed(), "{slopes:?} trial {trial}: {:?}", rep.defects);
            assert_eq!(mk_vanishing_certificate(&ls, 3).unwrap().target_degree, -1);
        }
    }
}

#[test]
fn associativity_in_dimension_two() {
    let ls: Vec<AffineLagrangian> = [sym2(0, 0, 0), sym2(1, 0, 1), sym2(3, 1, 2), sym2(4, 1, 4)]
        .into_iter()
        .zip([[q(0, 1), q(0, 1)], [q(1, 2), q(0, 1)], [q(0, 1), q(1, 3)], [q(1, 4), q(1, 2)]])
        .map(|(a, b)| AffineLagrangian::new(a, b.to_vec(), vec![q(2, 1), q(-1, 3)]).unwrap())
        .collect();
    let cat = fo_category(&ls, &qi(6)).unwrap();
    let rep = pre_category_check(&cat.category, 3).unwrap();
    assert!(rep.passed(), "{:?}", rep.defects);
    assert!(mk_vanishing_certificate(&ls, 3).is_ok());
}

#[test]
fn integer_shift_and_global_holonomy_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cutoff = qi(15);
    for _ in 0..10 {
        let s: Vec<Q> = (0..3).map(|_| random_shift(&mut rng)).collect();
        let u: Vec<Q> = (0..3).map(|_| random_unit(&mut rng)).collect();
        let slopes = [0, rng.gen_range(1..=2), 3];
        let base: Vec<AffineLagrangian> = (0..3).map(|i| line(slopes[i], s[i].clone(), u[i].clone())).collect();
        let m = fo_category(&base, &cutoff).unwrap().m2();
        let mut shifted = base.clone();
        shifted[2] = line(slopes[2], &s[2] + qi(rng.gen_range(-3..=3)), u[2].clone());
        assert_eq!(fo_category(&shifted, &cutoff).unwrap().m2(), m);
        let c = random_unit(&mut rng);
        let scaled: Vec<AffineLagrangian> = (0..3).map(|i| line(slopes[i], s[i].clone(), &u[i] * &c)).collect();
        assert_eq!(fo_category(&scaled, &cutoff).unwrap().m2(), m);
    }
}

#[test]
fn valuations_are_nonnegative_and_zero_only_at_common_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cutoff = qi(12);
    for _ in 0..15 {
        let s: Vec<Q> = (0..3).map(|_| q(rng.gen_range(0..=2), 2)).collect();
        let slopes = [0, rng.gen_range(1..=2), 3];
        let ls: Vec<AffineLagrangian> = (0..3).map(|i| line(slopes[i], s[i].clone(), Q::one())).collect();
        let p01 = intersections(&ls[0], &ls[1]).unwrap();
        let p12 = intersections(&ls[1], &ls[2]).unwrap();
        let p02 = intersections(&ls[0], &ls[2]).unwrap();
        for x0 in &p01 {
            for x1 in &p12 {
                let out = m2_entry([&ls[0], &ls[1], &ls[2]], x0, x1, &cutoff).unwrap();
                for (j, v) in &out {
                    let Valuation::Finite(e) = v.val() else { panic!("stored zero") };
                    assert!(e >= Q::zero());
                    // Valuation 0 means a lift of x1 and a lift of x2 sit on x0's lift.
                    let common = x0.position == x1.position && x0.position == p02[*j].position;
                    assert_eq!(e.is_zero(), common);
                }
            }
        }
    }
}

#[test]
fn grading_mismatch_gives_zero() {
    // Slopes (0, 2, 1): x0 degree 0, x1 degree 1, every x2 degree 0.
    let ls = [line(0, Q::zero(), Q::one()), line(2, Q::zero(), Q::one()), line(1, Q::zero(), Q::one())];
    let x0 = &intersections(&ls[0], &ls[1]).unwrap()[0];
    let x1 = &intersections(&ls[1], &ls[2]).unwrap()[0];
    assert!(m2_entry([&ls[0], &ls[1], &ls[2]], x0, x1, &qi(10)).unwrap().is_empty());
}
