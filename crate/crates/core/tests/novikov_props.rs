use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use syz_core::rational::{q, qi, Q};
use syz_core::{NovikovElem, Valuation};

fn rational(num: std::ops::RangeInclusive<i64>, den: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = Q> {
    (num, den).prop_map(|(n, d)| q(n, d))
}

/// Exponents in [0, 10] with denominators up to 4.
fn exponent() -> impl Strategy<Value = Q> {
    (0i64..=40).prop_map(|n| q(n, 4))
}

fn exact_elem() -> impl Strategy<Value = NovikovElem> {
    prop::collection::vec((exponent(), rational(-5..=5, 1..=3)), 0..5).prop_map(|t| NovikovElem::new(t, None))
}

fn nonzero_elem() -> impl Strategy<Value = NovikovElem> {
    (exponent(), rational(1..=5, 1..=3), any::<bool>(), exact_elem()).prop_map(|(e, c, neg, rest)| {
        let c = if neg { -c } else { c };
        // Leading term strictly below everything else.
        let tail: Vec<(Q, Q)> = rest.terms().iter().map(|(x, y)| (&e + x + q(1, 4), y.clone())).collect();
        let mut t = vec![(e, c)];
        t.extend(tail);
        NovikovElem::new(t, None)
    })
}

fn cutoff() -> impl Strategy<Value = Q> {
    (8i64..=48).prop_map(|n| q(n, 4))
}

fn config() -> Config {
    Config { cases: 1000, rng_seed: RngSeed::Fixed(0x5eed_0007), failure_persistence: None, ..Config::default() }
}

fn val_sum(a: &Valuation, b: &Valuation) -> Valuation {
    match (a.finite(), b.finite()) {
        (Some(x), Some(y)) => Valuation::Finite(x + y),
        _ => Valuation::Infinite,
    }
}

fn val_min(a: &Valuation, b: &Valuation) -> Valuation {
    match (a.finite(), b.finite()) {
        (Some(x), Some(y)) => Valuation::Finite(x.min(y).clone()),
        (Some(x), None) | (None, Some(x)) => Valuation::Finite(x.clone()),
        _ => Valuation::Infinite,
    }
}

fn val_ge(a: &Valuation, b: &Valuation) -> bool {
    match (a.finite(), b.finite()) {
        (_, None) => a.is_infinite(),
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x >= y,
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ring_axioms_exact(x in exact_elem(), y in exact_elem(), z in exact_elem()) {
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.add(&NovikovElem::zero()), x.clone());
        prop_assert_eq!(x.mul(&NovikovElem::one()), x.clone());
        prop_assert!(x.sub(&x).is_zero());
        prop_assert!(x.mul(&NovikovElem::zero()).is_zero());
    }

    #[test]
    fn ring_axioms_truncated(x in exact_elem(), y in exact_elem(), z in exact_elem(), l in cutoff()) {
        let (x, y, z) = (x.truncate(&l), y.truncate(&l), z.truncate(&l));
        let lhs = x.mul(&y).mul(&z);
        let rhs = x.mul(&y.mul(&z));
        prop_assert!(lhs.eq_upto(&rhs, &l));
        let lhs = x.mul(&y.add(&z));
        let rhs = x.mul(&y).add(&x.mul(&z));
        prop_assert!(lhs.eq_upto(&rhs, &l));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
    }

    #[test]
    fn inverse_up_to_cutoff(x in nonzero_elem(), l in cutoff()) {
        let inv = x.inv_to(&l).unwrap();
        let prod = x.mul(&inv);
        let c = prod.cutoff().cloned().unwrap();
        prop_assert!(c >= l);
        prop_assert!(prod.eq_upto(&NovikovElem::one(), &c));
        // Truncated input: the product equals 1 below its own cutoff.
        let xt = x.truncate(&l);
        if xt.is_zero() {
            return Ok(());
        }
        let prod = xt.mul(&xt.inv().unwrap());
        let c = prod.cutoff().cloned().unwrap();
        prop_assert!(prod.eq_upto(&NovikovElem::one(), &c));
        let a = x.val().finite().unwrap().clone();
        prop_assert!(c >= &l - &a - &a);
    }

    #[test]
    fn valuation_laws(x in exact_elem(), y in exact_elem()) {
        prop_assert_eq!(x.mul(&y).val(), val_sum(&x.val(), &y.val()));
        let s = x.add(&y);
        let m = val_min(&x.val(), &y.val());
        prop_assert!(val_ge(&s.val(), &m));
        if x.val() != y.val() {
            prop_assert_eq!(s.val(), m);
        }
    }

    #[test]
    fn truncation_is_a_homomorphism(x in exact_elem(), y in exact_elem(), l in cutoff()) {
        let t = |e: &NovikovElem| e.truncate(&l);
        prop_assert_eq!(t(&x.mul(&y)), t(&t(&x).mul(&t(&y))));
        prop_assert_eq!(t(&x.add(&y)), t(&t(&x).add(&t(&y))));
    }

    #[test]
    fn adic_comparison(x in exact_elem(), e in exponent(), s in exponent()) {
        let y = x.add(&NovikovElem::q_pow(e.clone()));
        prop_assert!(x.adic_leq(&x, &s));
        prop_assert_eq!(x.adic_leq(&y, &s), e >= s);
    }
}

#[test]
fn documented_examples() {
    let x = NovikovElem::new(vec![(qi(2), qi(1)), (qi(5), qi(3))], None);
    assert_eq!(x.val(), Valuation::Finite(qi(2)));
    assert!(NovikovElem::new(vec![(qi(3), qi(1)), (qi(3), qi(-1))], None).val().is_infinite());
    let one_minus_q = NovikovElem::new(vec![(Q::zero(), Q::one()), (qi(1), qi(-1))], None);
    let inv = one_minus_q.inv_to(&qi(4)).unwrap();
    assert_eq!(inv, NovikovElem::new((0..4).map(|k| (qi(k), qi(1))).collect(), Some(qi(4))));
    assert_eq!(NovikovElem::q_pow(qi(2)).inv().unwrap(), NovikovElem::q_pow(qi(-2)));
    assert_eq!(NovikovElem::constant(qi(2)).inv().unwrap(), NovikovElem::constant(q(1, 2)));
    let one = NovikovElem::one();
    let fifth = one.add(&NovikovElem::q_pow(qi(5)));
    assert!(one.adic_leq(&fifth, &qi(3)));
    assert!(!one.adic_leq(&fifth, &qi(7)));
}
