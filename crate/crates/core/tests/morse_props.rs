use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syz_core::ainfty::pre_category_check;
use syz_core::morse::{
    configurations, critical_points, morse_category, morse_category_weighted, morse_differential, weights_positive,
    CriticalSet, MorseError, TrigPolynomial,
};
use syz_core::rational::{q, qi, q_to_f64, Q};
use syz_core::NovikovElem;

fn random_trig(rng: &mut ChaCha8Rng) -> TrigPolynomial {
    let mut coef = || q(rng.gen_range(-3..=3), rng.gen_range(1..=3));
    let cos: Vec<(u32, Q)> = (1..=2).map(|k| (k, coef())).collect();
    let sin: Vec<(u32, Q)> = (1..=2).map(|k| (k, coef())).collect();
    TrigPolynomial::new(Q::zero(), cos, sin)
}

/// Random transversal triples; rejected draws are skipped.
fn triples(seed: u64, count: usize) -> Vec<[TrigPolynomial; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let fs = [random_trig(&mut rng), random_trig(&mut rng), random_trig(&mut rng)];
        if morse_category(&fs).is_ok() {
            out.push(fs);
        }
    }
    out
}

/// Follows the gradient of `g` (downhill if `down`) from `y` in steps of
/// 1e-4 until the derivative changes sign, then returns the nearest
/// critical point of the requested kind.
fn flow_to(g: &TrigPolynomial, crit: &CriticalSet, y: f64, down: bool) -> usize {
    let dir = |x: f64| if down { -g.derivative_f64(x).signum() } else { g.derivative_f64(x).signum() };
    let s0 = dir(y);
    let mut x = y;
    for _ in 0..20_000 {
        let nx = x + s0 * 1e-4;
        if dir(nx) != s0 {
            break;
        }
        x = nx;
    }
    let want = if down { 0 } else { 1 };
    let circ = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    (0..crit.len())
        .filter(|&j| crit.points[j].index == want)
        .min_by(|&a, &b| {
            circ(q_to_f64(&crit.points[a].position), x)
                .partial_cmp(&circ(q_to_f64(&crit.points[b].position), x))
                .unwrap()
        })
        .unwrap()
}

#[test]
fn configurations_match_flow_oracle() {
    for fs in triples(3, 12) {
        let (g01, g12, g02) = (fs[0].sub(&fs[1]), fs[1].sub(&fs[2]), fs[0].sub(&fs[2]));
        let (s01, s12, s02) =
            (critical_points(&g01).unwrap(), critical_points(&g12).unwrap(), critical_points(&g02).unwrap());
        let pos = |s: &CriticalSet, j: usize| q_to_f64(&s.points[j].position);
        let mut expect = Vec::new();
        for x2 in s02.minima() {
            let p = pos(&s02, x2);
            expect.push((flow_to(&g01, &s01, p, true), flow_to(&g12, &s12, p, true), x2));
        }
        for x1 in s12.maxima() {
            let p = pos(&s12, x1);
            expect.push((flow_to(&g01, &s01, p, true), x1, flow_to(&g02, &s02, p, false)));
        }
        for x0 in s01.maxima() {
            let p = pos(&s01, x0);
            expect.push((x0, flow_to(&g12, &s12, p, true), flow_to(&g02, &s02, p, false)));
        }
        expect.sort();
        let mut got: Vec<(usize, usize, usize)> =
            configurations(&s01, &s12, &s02).iter().map(|c| (c.x0, c.x1, c.x2)).collect();
        got.sort();
        assert_eq!(got, expect);
    }
}

#[test]
fn leibniz_relation_and_circle_cohomology() {
    for fs in triples(4, 20) {
        let mc = morse_category(&fs).unwrap();
        let rep = pre_category_check(&mc.category, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.defects);
        for (i, j) in mc.critical.keys() {
            let d = morse_differential(&fs[*i], &fs[*j]).unwrap();
            let crit = &mc.critical[&(*i, *j)];
            let mins = crit.minima().count();
            // rank ∂ = #min − 1 on a circle, so H⁰ = H¹ = 1.
            let m = syz_core::QMatrix::from_rows(
                crit.maxima()
                    .map(|o| crit.minima().map(|s| d.coeff(&[s], o)).collect())
                    .collect(),
            );
            assert_eq!(m.rank(), mins - 1);
        }
    }
}

#[test]
fn unit_and_fundamental_class_products() {
    // Σ minima is the unit cocycle; products with it preserve the degree-1
    // class (measured by the sum of coefficients over maxima).
    for fs in triples(5, 15) {
        let mc = morse_category(&fs).unwrap();
        let s = mc.structure();
        let b = s.basis().clone();
        let m2 = s.op_or_zero(2);
        let idx = |i: usize, j: usize, x: usize| b.lookup(&format!("f{i}>f{j}:x{x}")).unwrap();
        let (s01, s12, s02) = (&mc.critical[&(0, 1)], &mc.critical[&(1, 2)], &mc.critical[&(0, 2)]);
        let unit = |i: usize, j: usize, c: &CriticalSet| -> syz_core::ainfty::SparseVec<Q> {
            c.minima().map(|x| (idx(i, j, x), qi(1))).collect()
        };
        assert_eq!(m2.apply(&[unit(0, 1, s01), unit(1, 2, s12)]), unit(0, 2, s02));
        for mx in s12.maxima() {
            let v = m2.apply(&[unit(0, 1, s01), [(idx(1, 2, mx), qi(1))].into()]);
            assert_eq!(v.values().cloned().sum::<Q>(), qi(1));
        }
        for mx in s01.maxima() {
            let v = m2.apply(&[[(idx(0, 1, mx), qi(1))].into(), unit(1, 2, s12)]);
            assert_eq!(v.values().cloned().sum::<Q>(), qi(1));
        }
    }
}

#[test]
fn weighted_products() {
    let cutoff = qi(40);
    for fs in triples(6, 10) {
        let w = morse_category_weighted(&fs, &cutoff).unwrap();
        let rep = pre_category_check(&w.category, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.defects);
        let m2w = w.m2();
        assert!(weights_positive(&m2w));
        // Dropping the weights recovers the unweighted table.
        let u = morse_category(&fs).unwrap().m2();
        let dropped = m2w.map_scalars(|c: &NovikovElem| c.terms().iter().map(|(_, x)| x.clone()).sum::<Q>());
        assert_eq!(dropped, u.map_scalars(|c: &Q| c.clone()));
    }
}

#[test]
fn shared_critical_point_is_rejected() {
    // f0 − f1 = cos(2πy) and f1 − f2 = cos(4πy) share the critical point 0.
    let f0 = TrigPolynomial::new(Q::zero(), [(1, qi(1)), (2, qi(1))], []);
    let f1 = TrigPolynomial::new(Q::zero(), [(2, qi(1))], []);
    let f2 = TrigPolynomial::zero();
    assert!(matches!(morse_category(&[f0, f1, f2]), Err(MorseError::NotTransversal(..))));
}
