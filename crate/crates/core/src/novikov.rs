//! Truncated Novikov series `Σ cᵢ q^{λᵢ}` with `q = e^{−1/ε}`.
//!
//! Exponents and coefficients are exact rationals. An element optionally
//! carries a cutoff `Λ`: it then stands for every series agreeing with the
//! stored terms below `Λ`. A missing cutoff means the element is an exact
//! finite sum. Arithmetic propagates the cutoff so a result never claims
//! more precision than its inputs support.

use crate::rational::{bigint_from_json, bigint_to_json, fmt_q, Q};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NovikovError {
    #[error("division by zero in the Novikov field")]
    DivisionByZero,
    #[error("inverse of a non-monomial exact element needs a cutoff")]
    UnboundedInverse,
    #[error("malformed Novikov JSON: {0}")]
    Json(String),
}

/// `v(x)`: smallest exponent, `+∞` for zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(Q),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", fmt_q(v)),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NovikovElem {
    terms: Vec<(Q, Q)>,
    cutoff: Option<Q>,
}

fn min_cutoff(a: &Option<Q>, b: &Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y).clone()),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

fn add_cutoff(a: &Option<Q>, shift: &Q) -> Option<Q> {
    a.as_ref().map(|c| c + shift)
}

impl NovikovElem {
    /// Normalizes arbitrary `(exponent, coefficient)` pairs: sorts, merges
    /// equal exponents, drops zeros and everything at or above the cutoff.
    pub fn new(mut terms: Vec<(Q, Q)>, cutoff: Option<Q>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Q, Q)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(e, c)| !c.is_zero() && cutoff.as_ref().is_none_or(|l| e < l));
        NovikovElem { terms: merged, cutoff }
    }

    pub fn zero() -> Self {
        NovikovElem { terms: Vec::new(), cutoff: None }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![(Q::zero(), c)], None)
    }

    /// `q^a`.
    pub fn q_pow(a: Q) -> Self {
        Self::new(vec![(a, Q::one())], None)
    }

    pub fn monomial(coeff: Q, exponent: Q) -> Self {
        Self::new(vec![(exponent, coeff)], None)
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    pub fn cutoff(&self) -> Option<&Q> {
        self.cutoff.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff.is_none()
    }

    pub fn val(&self) -> Valuation {
        match self.terms.first() {
            Some((e, _)) => Valuation::Finite(e.clone()),
            None => Valuation::Infinite,
        }
    }

    /// Lowest exponent the represented series could have: the stored
    /// valuation, or the cutoff if that is smaller.
    fn val_lower(&self) -> Option<Q> {
        match (self.terms.first(), &self.cutoff) {
            (Some((e, _)), Some(l)) => Some(e.min(l).clone()),
            (Some((e, _)), None) => Some(e.clone()),
            (None, l) => l.clone(),
        }
    }

    pub fn leading_coeff(&self) -> Option<&Q> {
        self.terms.first().map(|(_, c)| c)
    }

    /// Coefficient of `q^e` (zero if absent).
    pub fn coeff(&self, e: &Q) -> Q {
        self.terms
            .binary_search_by(|(x, _)| x.cmp(e))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Q::zero())
    }

    pub fn truncate(&self, cutoff: &Q) -> Self {
        let c = min_cutoff(&self.cutoff, &Some(cutoff.clone()));
        Self::new(self.terms.clone(), c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms, min_cutoff(&self.cutoff, &other.cutoff))
    }

    pub fn neg(&self) -> Self {
        NovikovElem {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        // x = xs + O(q^Λx), y = ys + O(q^Λy): the product is known below
        // min(v(x) + Λy, v(y) + Λx), capped by the smaller input cutoff.
        let mut cutoff = min_cutoff(&self.cutoff, &other.cutoff);
        if let Some(l) = &other.cutoff {
            if let Some(v) = self.val_lower() {
                cutoff = min_cutoff(&cutoff, &Some(v + l));
            }
        }
        if let Some(l) = &self.cutoff {
            if let Some(v) = other.val_lower() {
                cutoff = min_cutoff(&cutoff, &Some(v + l));
            }
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if cutoff.as_ref().is_none_or(|l| &e < l) {
                    terms.push((e, c1 * c2));
                }
            }
        }
        Self::new(terms, cutoff)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(), self.cutoff.clone())
    }

    /// Multiplication by `q^a`; shifts the cutoff along.
    pub fn shift(&self, a: &Q) -> Self {
        NovikovElem {
            terms: self.terms.iter().map(|(e, c)| (e + a, c.clone())).collect(),
            cutoff: add_cutoff(&self.cutoff, a),
        }
    }

    /// Inverse. Exact monomials invert exactly; anything else is expanded as
    /// a geometric series up to the precision the input supports.
    pub fn inv(&self) -> Result<Self, NovikovError> {
        self.inv_impl(None)
    }

    /// Inverse expanded below `cutoff` (also used for exact non-monomials).
    pub fn inv_to(&self, cutoff: &Q) -> Result<Self, NovikovError> {
        self.inv_impl(Some(cutoff.clone()))
    }

    fn inv_impl(&self, requested: Option<Q>) -> Result<Self, NovikovError> {
        let Some((a, c)) = self.terms.first().cloned() else {
            return Err(NovikovError::DivisionByZero);
        };
        let c_inv = c.recip();
        // x = c q^a (1 + u); relative precision of u is Λ − a, and the
        // result q^{−a}·(...) is then known below Λ − 2a.
        let mut cutoff = self.cutoff.as_ref().map(|l| l - &a - &a);
        if let Some(r) = requested {
            cutoff = min_cutoff(&cutoff, &Some(r));
        }
        if self.terms.len() == 1 {
            let base = Self::monomial(c_inv, -a);
            return Ok(match cutoff {
                Some(l) => base.truncate(&l),
                None => base,
            });
        }
        let Some(cutoff) = cutoff else {
            return Err(NovikovError::UnboundedInverse);
        };
        // u has strictly positive exponents; stop once every new term of
        // (−u)^k·q^{−a} lies at or above the cutoff.
        let u_terms: Vec<(Q, Q)> =
            self.terms[1..].iter().map(|(e, x)| (e - &a, -(x * &c_inv))).collect();
        let neg_u = NovikovElem::new(u_terms, None);
        let min_u = neg_u.terms[0].0.clone();
        let rel_cut = &cutoff + &a;
        let mut acc = Self::one();
        let mut power = Self::one();
        let mut k = 1i64;
        loop {
            if Q::from_integer(k.into()) * &min_u >= rel_cut {
                break;
            }
            power = power.mul(&neg_u).truncate(&rel_cut);
            acc = acc.add(&power);
            k += 1;
        }
        let result = acc.truncate(&rel_cut).shift(&(-&a)).scale(&c_inv);
        Ok(NovikovElem::new(result.terms, Some(cutoff)))
    }

    /// `v(x − y) ≥ s`, read off the stored terms.
    pub fn adic_leq(&self, other: &Self, s: &Q) -> bool {
        match self.sub(other).val() {
            Valuation::Infinite => true,
            Valuation::Finite(v) => &v >= s,
        }
    }

    /// Equality of the two series below `cutoff`.
    pub fn eq_upto(&self, other: &Self, cutoff: &Q) -> bool {
        let strip = |x: &Self| -> Vec<(Q, Q)> {
            x.terms.iter().filter(|(e, _)| e < cutoff).cloned().collect()
        };
        strip(self) == strip(other)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                json!([
                    bigint_to_json(e.numer()),
                    bigint_to_json(e.denom()),
                    bigint_to_json(c.numer()),
                    bigint_to_json(c.denom())
                ])
            })
            .collect();
        let cutoff = match &self.cutoff {
            Some(l) => json!([bigint_to_json(l.numer()), bigint_to_json(l.denom())]),
            None => Value::Null,
        };
        json!({ "terms": terms, "cutoff": cutoff })
    }

    pub fn from_json(v: &Value) -> Result<Self, NovikovError> {
        let bad = |m: &str| NovikovError::Json(m.to_string());
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let ratio = |n: &Value, d: &Value| -> Result<Q, NovikovError> {
            let n = bigint_from_json(n).ok_or_else(|| bad("bad integer"))?;
            let d = bigint_from_json(d).ok_or_else(|| bad("bad integer"))?;
            if d.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Q::new(n, d))
        };
        let mut parsed = Vec::with_capacity(terms.len());
        let mut last: Option<Q> = None;
        for t in terms {
            let a = t.as_array().filter(|a| a.len() == 4).ok_or_else(|| bad("term is not a quadruple"))?;
            let e = ratio(&a[0], &a[1])?;
            let c = ratio(&a[2], &a[3])?;
            if last.as_ref().is_some_and(|l| &e <= l) {
                return Err(bad("exponents must be strictly ascending"));
            }
            last = Some(e.clone());
            parsed.push((e, c));
        }
        let cutoff = match v.get("cutoff") {
            None | Some(Value::Null) => None,
            Some(Value::Array(p)) if p.len() == 2 => Some(ratio(&p[0], &p[1])?),
            Some(_) => return Err(bad("cutoff must be a [num, den] pair or null")),
        };
        Ok(Self::new(parsed, cutoff))
    }
}

impl fmt::Display for NovikovElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() && self.cutoff.is_none() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let a = c.abs();
            if e.is_zero() {
                write!(f, "{}", fmt_q(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", fmt_q(&a))?;
                }
                write!(f, "q^({})", fmt_q(e))?;
            }
        }
        if let Some(l) = &self.cutoff {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O(q^({}))", fmt_q(l))?;
        }
        Ok(())
    }
}

impl crate::scalar::Scalar for NovikovElem {
    fn zero() -> Self {
        NovikovElem::zero()
    }
    fn one() -> Self {
        NovikovElem::one()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        NovikovElem::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        NovikovElem::mul(self, other)
    }
    fn neg(&self) -> Self {
        NovikovElem::neg(self)
    }
    fn from_q(x: &Q) -> Self {
        NovikovElem::constant(x.clone())
    }
    fn to_json(&self) -> Value {
        NovikovElem::to_json(self)
    }
    fn from_json(v: &Value) -> Option<Self> {
        NovikovElem::from_json(v).ok()
    }
}
