//! Fixed inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use syz_core::corpus::{random_dga, random_retraction};
use syz_core::fukaya_oh::AffineLagrangian;
use syz_core::rational::{q, qi, Q};
use syz_core::transfer::{transfer_structure, RetractionData};
use syz_core::NovikovElem;

/// The first seeded retraction whose transferred structure has a nonzero m3.
pub fn retraction_with_m3(seed: u64) -> RetractionData<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = random_dga(&mut rng, 6);
        let r = random_retraction(&a, &mut rng, true);
        let b = transfer_structure(&r, 3).expect("corpus retractions are valid");
        if b.op(3).is_some_and(|op| !op.is_zero()) {
            return r;
        }
    }
}

pub fn lines(slopes: &[i64]) -> Vec<AffineLagrangian> {
    slopes
        .iter()
        .enumerate()
        .map(|(i, &a)| AffineLagrangian::line(a, q(i as i64, 3), qi(1)).expect("valid line"))
        .collect()
}

/// `Σ_{k<n} (k+1)/(k+2) q^{k/2}`, cut at `n/2`.
pub fn dense_series(n: i64) -> NovikovElem {
    NovikovElem::new((0..n).map(|k| (q(k, 2), q(k + 1, k + 2))).collect(), Some(q(n, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert!(retraction_with_m3(1).validate().is_valid());
        assert_eq!(lines(&[0, 1, 2]).len(), 3);
        assert_eq!(dense_series(8).terms().len(), 8);
    }
}
