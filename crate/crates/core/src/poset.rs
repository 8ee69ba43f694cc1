//! Finite posets with the Alexandrov topology.
//!
//! Opens are exactly the upward-closed subsets, so every point has a minimal
//! open neighborhood (its upward cone) and the opens form a complete Heyting
//! algebra. Points are opaque string identifiers; internally they are indexed
//! in lexicographic order of their names, which makes every enumeration in the
//! crate deterministic.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caps::{Caps, HARD_MAX_POINTS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("duplicate element identifier {0:?}")]
    DuplicateElement(String),
    #[error("cycle detected: {0:?} and {1:?} are mutually related but distinct")]
    Cycle(String, String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("poset has {0} points, exceeding the cap of {1}")]
    TooManyPoints(usize, usize),
    #[error("a poset must have at least one point")]
    Empty,
    #[error("set is not upward closed: contains {0:?} but not {1:?} above it")]
    NotOpen(String, String),
}

/// An upward-closed subset of a poset, stored as a bitmask over point indices.
///
/// An `OpenSet` is only meaningful relative to the poset it was produced from;
/// operations that need order information take the poset as an argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpenSet {
    bits: u32,
}

impl PartialOrd for OpenSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_cmp(*other)
    }
}

impl OpenSet {
    pub const EMPTY: OpenSet = OpenSet { bits: 0 };

    pub(crate) fn from_bits(bits: u32) -> Self {
        OpenSet { bits }
    }

    /// Raw bitmask construction; callers must ensure upward closure.
    pub(crate) fn from_names_unchecked(bits: u32) -> Self {
        OpenSet { bits }
    }

    pub(crate) fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, point: usize) -> bool {
        self.bits & (1 << point) != 0
    }

    pub fn union(self, other: OpenSet) -> OpenSet {
        OpenSet::from_bits(self.bits | other.bits)
    }

    pub fn intersect(self, other: OpenSet) -> OpenSet {
        OpenSet::from_bits(self.bits & other.bits)
    }

    pub fn is_subset(self, other: OpenSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// Point indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..32usize).filter(move |i| bits & (1 << i) != 0)
    }

    /// Point names in canonical (lexicographic) order.
    pub fn names(self, p: &Poset) -> Vec<String> {
        self.iter().map(|i| p.name(i).to_string()).collect()
    }

    /// Canonical ordering: by size, then lexicographically on the sorted
    /// point-index tuple. Matches the enumeration order of [`Poset::all_opens`].
    pub fn canonical_cmp(self, other: OpenSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }

    pub fn render(self, p: &Poset) -> String {
        let mut s = String::from("{");
        for (k, name) in self.names(p).iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            s.push_str(name);
        }
        s.push('}');
        s
    }
}

#[derive(Debug)]
struct PosetInner {
    names: Vec<String>,
    /// `up[i]` is the bitmask of all `j` with `i <= j` (reflexive).
    up: Vec<u32>,
}

/// A finite partial order, stored with its full reflexive-transitive closure.
#[derive(Debug, Clone)]
pub struct Poset {
    inner: Arc<PosetInner>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.inner.names == other.inner.names && self.inner.up == other.inner.up
    }
}
impl Eq for Poset {}

impl Poset {
    /// Builds a poset from element names and generating `leq` pairs, taking
    /// the reflexive-transitive closure. Fails on duplicate names or when the
    /// closure violates antisymmetry.
    pub fn new<S: AsRef<str>>(elements: &[S], leq_pairs: &[(S, S)]) -> Result<Poset, PosetError> {
        Poset::with_cap(elements, leq_pairs, Caps::default().max_points)
    }

    pub fn with_cap<S: AsRef<str>>(
        elements: &[S],
        leq_pairs: &[(S, S)],
        max_points: usize,
    ) -> Result<Poset, PosetError> {
        if elements.is_empty() {
            return Err(PosetError::Empty);
        }
        let cap = max_points.min(HARD_MAX_POINTS);
        if elements.len() > cap {
            return Err(PosetError::TooManyPoints(elements.len(), cap));
        }
        let mut names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(PosetError::DuplicateElement(w[0].clone()));
            }
        }
        let index = |s: &str| -> Result<usize, PosetError> {
            names
                .binary_search_by(|n| n.as_str().cmp(s))
                .map_err(|_| PosetError::UnknownPoint(s.to_string()))
        };
        let n = names.len();
        let mut up: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for (a, b) in leq_pairs {
            let i = index(a.as_ref())?;
            let j = index(b.as_ref())?;
            up[i] |= 1 << j;
        }
        // Transitive closure: iterate until fixpoint (n <= 32, cheap).
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = up[i];
                for j in 0..n {
                    if up[i] & (1 << j) != 0 {
                        acc |= up[j];
                    }
                }
                if acc != up[i] {
                    up[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if up[i] & (1 << j) != 0 && up[j] & (1 << i) != 0 {
                    return Err(PosetError::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(Poset {
            inner: Arc::new(PosetInner { names, up }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty posets
    }

    pub fn name(&self, i: usize) -> &str {
        &self.inner.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.inner.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.inner
            .names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| PosetError::UnknownPoint(name.to_string()))
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.inner.up[i] & (1 << j) != 0
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// The whole space as an open set.
    pub fn full(&self) -> OpenSet {
        OpenSet::from_bits(if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        })
    }

    /// `U_alpha`, the smallest open set containing `alpha`.
    pub fn minimal_open(&self, alpha: usize) -> OpenSet {
        OpenSet::from_bits(self.inner.up[alpha])
    }

    pub fn minimal_open_named(&self, alpha: &str) -> Result<OpenSet, PosetError> {
        Ok(self.minimal_open(self.index_of(alpha)?))
    }

    /// Checks upward closure.
    pub fn is_open(&self, s: OpenSet) -> bool {
        s.iter()
            .all(|i| OpenSet::from_bits(self.inner.up[i]).is_subset(s))
    }

    /// Ensures `s` is open, reporting a witness pair when it is not.
    pub fn check_open(&self, s: OpenSet) -> Result<OpenSet, PosetError> {
        for i in s.iter() {
            for j in OpenSet::from_bits(self.inner.up[i]).iter() {
                if !s.contains(j) {
                    return Err(PosetError::NotOpen(
                        self.name(i).to_string(),
                        self.name(j).to_string(),
                    ));
                }
            }
        }
        Ok(s)
    }

    /// Builds an open set from point names, checking upward closure.
    pub fn open_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<OpenSet, PosetError> {
        self.check_open(self.subset_from_names(names)?)
    }

    /// Builds an arbitrary subset (not necessarily open) from point names.
    pub fn subset_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<OpenSet, PosetError> {
        let mut bits = 0u32;
        for s in names {
            bits |= 1 << self.index_of(s.as_ref())?;
        }
        Ok(OpenSet::from_bits(bits))
    }

    /// The largest open subset of `s`: `{alpha | U_alpha ⊆ s}`.
    pub fn interior(&self, s: OpenSet) -> OpenSet {
        let mut bits = 0u32;
        for i in 0..self.len() {
            if OpenSet::from_bits(self.inner.up[i]).is_subset(s) {
                bits |= 1 << i;
            }
        }
        OpenSet::from_bits(bits)
    }

    pub fn complement(&self, s: OpenSet) -> OpenSet {
        OpenSet::from_bits(self.full().bits() & !s.bits())
    }

    /// All upward-closed subsets in canonical order (size, then lexicographic
    /// on the sorted point tuple).
    pub fn all_opens(&self) -> Vec<OpenSet> {
        let n = self.len();
        let mut opens: Vec<OpenSet> = (0u32..(1u64 << n) as u32)
            .map(OpenSet::from_bits)
            .filter(|&s| self.is_open(s))
            .collect();
        opens.sort_by(|a, b| a.canonical_cmp(*b));
        opens
    }

    pub fn meet(&self, u: OpenSet, v: OpenSet) -> OpenSet {
        u.intersect(v)
    }

    pub fn join(&self, u: OpenSet, v: OpenSet) -> OpenSet {
        u.union(v)
    }

    /// Heyting implication: `(U ⇒ V) = ((K ∖ U) ∪ V)°`.
    pub fn imp(&self, u: OpenSet, v: OpenSet) -> OpenSet {
        self.interior(self.complement(u).union(v))
    }

    /// Heyting negation: `imp(u, ∅)`.
    pub fn neg(&self, u: OpenSet) -> OpenSet {
        self.imp(u, OpenSet::EMPTY)
    }

    /// Dispatch form used by the CLI.
    pub fn heyting(&self, op: HeytingOp, u: OpenSet, v: OpenSet) -> OpenSet {
        match op {
            HeytingOp::Meet => self.meet(u, v),
            HeytingOp::Join => self.join(u, v),
            HeytingOp::Imp => self.imp(u, v),
            HeytingOp::Neg => self.neg(u),
        }
    }

    /// Splits an open set into maximal order-connected pieces: connectivity is
    /// the transitive closure of comparability within `u`. Pieces are returned
    /// ordered by their least point index.
    pub fn connected_components(&self, u: OpenSet) -> Vec<OpenSet> {
        let pts: Vec<usize> = u.iter().collect();
        let mut seen = vec![false; pts.len()];
        let mut comps = Vec::new();
        for start in 0..pts.len() {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut bits = 0u32;
            while let Some(k) = stack.pop() {
                bits |= 1 << pts[k];
                for (m, &q) in pts.iter().enumerate() {
                    if !seen[m] && self.comparable(pts[k], q) {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
            comps.push(OpenSet::from_bits(bits));
        }
        comps
    }

    /// True when every pair of points has an upper bound.
    pub fn is_directed(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.inner.up[i] & self.inner.up[j] != 0))
    }

    /// The least upper bound of two points, when it exists and is unique.
    pub fn binary_sup(&self, i: usize, j: usize) -> Option<usize> {
        let commons = self.inner.up[i] & self.inner.up[j];
        OpenSet::from_bits(commons)
            .iter()
            .find(|&k| OpenSet::from_bits(commons).is_subset(OpenSet::from_bits(self.inner.up[k])))
    }

    /// Points of `u` with no strictly smaller point inside `u`.
    pub fn minimal_points(&self, u: OpenSet) -> Vec<usize> {
        u.iter()
            .filter(|&i| u.iter().all(|j| j == i || !self.leq(j, i)))
            .collect()
    }

    /// A linear extension of the order restricted to `u` (smaller first).
    pub fn linear_extension(&self, u: OpenSet) -> Vec<usize> {
        let mut pts: Vec<usize> = u.iter().collect();
        // i <= j implies up[i] ⊇ up[j], strictly for i < j, so sorting by
        // descending cone size (ties by index) is a linear extension.
        pts.sort_by_key(|&i| (std::cmp::Reverse(self.inner.up[i].count_ones()), i));
        pts
    }

    /// True when `i` is covered by `j` (no point strictly between).
    pub fn covers(&self, i: usize, j: usize) -> bool {
        i != j
            && self.leq(i, j)
            && !(0..self.len()).any(|k| k != i && k != j && self.leq(i, k) && self.leq(k, j))
    }

    /// The induced sub-poset on the points of an open set. Opens of the result
    /// are exactly the opens of `self` contained in `u`.
    pub fn restrict_to(&self, u: OpenSet) -> Result<Poset, PosetError> {
        self.check_open(u)?;
        let names: Vec<String> = u.iter().map(|i| self.name(i).to_string()).collect();
        if names.is_empty() {
            return Err(PosetError::Empty);
        }
        let mut pairs = Vec::new();
        for i in u.iter() {
            for j in u.iter() {
                if i != j && self.leq(i, j) {
                    pairs.push((self.name(i).to_string(), self.name(j).to_string()));
                }
            }
        }
        Poset::with_cap(&names, &pairs, HARD_MAX_POINTS)
    }

    /// Related pairs `(i, j)` with `i <= j`, including the diagonal.
    pub fn related_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.leq(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poset[")?;
        for (k, name) in self.names().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, "; ")?;
        let mut first = true;
        for (i, j) in self.related_pairs() {
            if i != j && self.covers(i, j) {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{}<{}", self.name(i), self.name(j))?;
                first = false;
            }
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeytingOp {
    Meet,
    Join,
    Imp,
    Neg,
}

/// Named points of an open set, as a `BTreeSet` for report serialization.
pub fn open_names(p: &Poset, u: OpenSet) -> BTreeSet<String> {
    u.names(p).into_iter().collect()
}
