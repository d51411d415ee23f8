//! Closed `f64` intervals with outward rounding.
//!
//! Each arithmetic result is widened by one ulp in each direction, which
//! encloses the exact result of the operation on the endpoints.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[x − r, x + r]`, rounded outward.
    pub fn around(x: f64, r: f64) -> Self {
        let r = r.abs();
        Interval { lo: (x - r).next_down(), hi: (x + r).next_up() }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn rad(&self) -> f64 {
        (0.5 * self.width()).next_up()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// Strictly inside `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn widen(&self, r: f64) -> Self {
        Interval { lo: (self.lo - r).next_down(), hi: (self.hi + r).next_up() }
    }

    pub fn shift(&self, t: f64) -> Self {
        Interval { lo: (self.lo + t).next_down(), hi: (self.hi + t).next_up() }
    }

    pub fn add(&self, o: &Interval) -> Self {
        Interval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    pub fn sub(&self, o: &Interval) -> Self {
        Interval { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }

    pub fn mul(&self, o: &Interval) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Division by an interval not containing zero.
    pub fn div(&self, o: &Interval) -> Option<Self> {
        if o.contains_zero() {
            return None;
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Interval { lo: lo.next_down(), hi: hi.next_up() })
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outward_rounding_encloses() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a.add(&b);
        assert!(s.contains(0.1 + 0.2) && s.lo < 0.30000000000000004);
        let p = Interval::new(-1.0, 2.0).mul(&Interval::new(3.0, 4.0));
        assert!(p.lo <= -4.0 && p.hi >= 8.0);
        assert!(Interval::new(1.0, 2.0).div(&Interval::new(-1.0, 1.0)).is_none());
    }

    #[test]
    fn relations() {
        let a = Interval::new(0.0, 1.0);
        assert!(Interval::new(0.25, 0.5).interior_of(&a));
        assert!(!a.interior_of(&a));
        assert!(a.intersects(&Interval::new(1.0, 2.0)));
        assert_eq!(a.intersect(&Interval::new(2.0, 3.0)), None);
    }
}
