//! Rooted planar trees: the index sets of the composition and transfer
//! formulas.
//!
//! Trees are unlabeled. Leaves are implicitly numbered `1..n` left to
//! right; consumers decide what to put on vertices and edges.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlanarTree {
    Leaf,
    Node(Vec<PlanarTree>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeParseError {
    #[error("unexpected character {0:?} at offset {1}")]
    Unexpected(char, usize),
    #[error("unexpected end of input")]
    Eof,
    #[error("internal vertex with fewer than two children at offset {0}")]
    LowValency(usize),
    #[error("trailing input at offset {0}")]
    Trailing(usize),
}

impl PlanarTree {
    pub fn corolla(n: usize) -> Self {
        if n == 1 {
            PlanarTree::Leaf
        } else {
            PlanarTree::Node(vec![PlanarTree::Leaf; n])
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PlanarTree::Leaf)
    }

    pub fn leaves(&self) -> usize {
        match self {
            PlanarTree::Leaf => 1,
            PlanarTree::Node(ch) => ch.iter().map(PlanarTree::leaves).sum(),
        }
    }

    pub fn internal_vertices(&self) -> usize {
        match self {
            PlanarTree::Leaf => 0,
            PlanarTree::Node(ch) => 1 + ch.iter().map(PlanarTree::internal_vertices).sum::<usize>(),
        }
    }

    /// Edges joining two internal vertices.
    pub fn internal_edges(&self) -> usize {
        self.internal_vertices().saturating_sub(1)
    }

    pub fn min_valency(&self) -> Option<usize> {
        match self {
            PlanarTree::Leaf => None,
            PlanarTree::Node(ch) => {
                let own = ch.len();
                Some(ch.iter().filter_map(PlanarTree::min_valency).fold(own, usize::min))
            }
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            PlanarTree::Leaf => true,
            PlanarTree::Node(ch) => ch.len() == 2 && ch.iter().all(PlanarTree::is_binary),
        }
    }

    /// Preorder child counts (leaf = 0); the canonical sort key.
    pub fn signature(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.push_signature(&mut out);
        out
    }

    fn push_signature(&self, out: &mut Vec<usize>) {
        match self {
            PlanarTree::Leaf => out.push(0),
            PlanarTree::Node(ch) => {
                out.push(ch.len());
                for c in ch {
                    c.push_signature(out);
                }
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self, TreeParseError> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(TreeParseError::Trailing(pos));
        }
        Ok(t)
    }
}

fn parse_tree(s: &[char], pos: &mut usize) -> Result<PlanarTree, TreeParseError> {
    match s.get(*pos) {
        None => Err(TreeParseError::Eof),
        Some('.') => {
            *pos += 1;
            Ok(PlanarTree::Leaf)
        }
        Some('(') => {
            let start = *pos;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match s.get(*pos) {
                    Some(')') => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_tree(s, pos)?),
                    None => return Err(TreeParseError::Eof),
                }
            }
            if children.len() < 2 {
                return Err(TreeParseError::LowValency(start));
            }
            Ok(PlanarTree::Node(children))
        }
        Some(&c) => Err(TreeParseError::Unexpected(c, *pos)),
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanarTree::Leaf => write!(f, "."),
            PlanarTree::Node(ch) => {
                write!(f, "(")?;
                for c in ch {
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// All planar trees with `n` leaves whose internal vertices have at least
/// `min_valency` children, sorted by [`PlanarTree::signature`].
pub fn enumerate(n: usize, min_valency: usize) -> Vec<PlanarTree> {
    let min_valency = min_valency.max(2);
    let mut memo: Vec<Option<Vec<PlanarTree>>> = vec![None; n + 1];
    let mut out = enumerate_rec(n, min_valency, None, &mut memo);
    out.sort_by_cached_key(PlanarTree::signature);
    out
}

/// Trees whose internal vertices all have exactly two children.
pub fn enumerate_binary(n: usize) -> Vec<PlanarTree> {
    let mut memo: Vec<Option<Vec<PlanarTree>>> = vec![None; n + 1];
    let mut out = enumerate_rec(n, 2, Some(2), &mut memo);
    out.sort_by_cached_key(PlanarTree::signature);
    out
}

fn enumerate_rec(
    n: usize,
    min_valency: usize,
    max_valency: Option<usize>,
    memo: &mut Vec<Option<Vec<PlanarTree>>>,
) -> Vec<PlanarTree> {
    if n == 0 {
        return Vec::new();
    }
    if let Some(done) = &memo[n] {
        return done.clone();
    }
    let mut out = vec![];
    if n == 1 {
        out.push(PlanarTree::Leaf);
    } else {
        let top = max_valency.map_or(n, |m| m.min(n));
        for k in min_valency..=top {
            for parts in compositions(n, k) {
                let child_sets: Vec<Vec<PlanarTree>> =
                    parts.iter().map(|&p| enumerate_rec(p, min_valency, max_valency, memo)).collect();
                for choice in cartesian(&child_sets) {
                    out.push(PlanarTree::Node(choice));
                }
            }
        }
    }
    memo[n] = Some(out.clone());
    out
}

/// Ordered ways to write `n` as a sum of `k` positive parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if n < k {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=n - (k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(sets: &[Vec<PlanarTree>]) -> Vec<Vec<PlanarTree>> {
    let mut acc = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(acc.len() * set.len());
        for prefix in &acc {
            for t in set {
                let mut v = prefix.clone();
                v.push(t.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// A tree with a marked midpoint on every internal edge.
///
/// Midpoints are identified by the internal vertex below them (preorder
/// index among internal vertices, root = 0, which never carries one).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdividedTree {
    pub tree: PlanarTree,
    pub midpoints: Vec<usize>,
}

pub fn subdivide(t: &PlanarTree) -> SubdividedTree {
    let mut midpoints = Vec::new();
    let mut counter = 0usize;
    fn walk(t: &PlanarTree, is_root: bool, counter: &mut usize, mids: &mut Vec<usize>) {
        if let PlanarTree::Node(ch) = t {
            let me = *counter;
            *counter += 1;
            if !is_root {
                mids.push(me);
            }
            for c in ch {
                walk(c, false, counter, mids);
            }
        }
    }
    walk(t, true, &mut counter, &mut midpoints);
    SubdividedTree { tree: t.clone(), midpoints }
}

impl SubdividedTree {
    pub fn midpoint_count(&self) -> usize {
        self.midpoints.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate(1, 2), vec![PlanarTree::Leaf]);
        assert_eq!(enumerate(3, 2).len(), 3);
        assert_eq!(enumerate(4, 2).len(), 11);
        assert_eq!(enumerate_binary(2).len(), 1);
        assert_eq!(enumerate_binary(3).len(), 2);
        assert_eq!(enumerate_binary(5).len(), 14);
    }

    #[test]
    fn min_valency_three() {
        // Trees with all internal valencies ≥ 3 and 5 leaves: the corolla,
        // 3 ways to hang a 3-corolla under a 3-vertex.
        let ts = enumerate(5, 3);
        assert!(ts.iter().all(|t| t.min_valency().unwrap() >= 3));
        assert_eq!(ts.len(), 4);
    }

    #[test]
    fn canonical_order_is_sorted_and_unique() {
        let ts = enumerate(5, 2);
        let sigs: Vec<_> = ts.iter().map(PlanarTree::signature).collect();
        let mut sorted = sigs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sigs, sorted);
    }

    #[test]
    fn subdivision() {
        let corolla = PlanarTree::corolla(4);
        assert_eq!(subdivide(&corolla).midpoint_count(), 0);
        let comb = PlanarTree::parse("((..).)").unwrap();
        assert_eq!(subdivide(&comb).midpoint_count(), 1);
        for t in enumerate(5, 2) {
            assert_eq!(subdivide(&t).midpoint_count(), t.internal_edges());
        }
    }

    #[test]
    fn text_form() {
        let t = PlanarTree::parse("((..).)").unwrap();
        assert_eq!(t.leaves(), 3);
        assert_eq!(t.to_string(), "((..).)");
        assert_eq!(PlanarTree::parse("(.)"), Err(TreeParseError::LowValency(0)));
        assert!(PlanarTree::parse("(..").is_err());
        assert!(PlanarTree::parse("(..)x").is_err());
    }
}
