//! Finite-scale weak-degree calculus: oracle preorders, mass problems, weak
//! reducibility, the dual isomorphism with up-sets of degrees, and the
//! lattice operations on weak degrees.
//!
//! Oracles and degrees are abstract. No computability is modeled: everything
//! here depends only on the oracle relation being a preorder, quotiented to a
//! partial order of degrees. A mass problem is a set of oracles; a weak
//! degree is canonically represented by the upward-closed set of degrees of
//! its members, which makes equality and the lattice operations plain set
//! operations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poset::{OpenSet, Poset, PosetError};
use crate::sheaf::{Sheaf, SheafError, StalkElem};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DegreeError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("unknown oracle {0}")]
    UnknownOracle(String),
    #[error("duplicate oracle {0}")]
    DuplicateOracle(String),
    #[error("deg map omits oracle {0}")]
    MissingDeg(String),
    #[error("deg map names unknown degree {0}")]
    UnknownDegree(String),
    #[error("deg map is not order-faithful on oracles {0} and {1}")]
    NotFaithful(String, String),
    #[error("degree {0} is not the degree of any oracle")]
    NotSurjective(String),
    #[error("degree set is not upward closed")]
    NotUpClosed,
    #[error("degree poset has no bottom element")]
    NoBottom,
    #[error("degrees {0} and {1} have no unique least upper bound")]
    NoBinarySup(String, String),
    #[error("value {0} maps to unknown degree {1}")]
    BadValueDegree(String, String),
    #[error("the model base poset must equal the degree poset in Muchnik mode")]
    BaseMismatch,
}

/// A finite oracle preorder together with its quotient partial order of
/// degrees and the (order-faithful, surjective) degree map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeStructure {
    degrees: Poset,
    oracles: Vec<String>,
    /// `oracle_leq[i]` is the bitmask of oracles `j` with `i <= j`
    /// (reflexive-transitive closure of the supplied preorder).
    oracle_leq: Vec<u32>,
    /// Oracle index to degree point index.
    deg: Vec<usize>,
}

/// A set of oracles, identified with its set of solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MassProblem {
    bits: u32,
}

impl MassProblem {
    pub const EMPTY: MassProblem = MassProblem { bits: 0 };

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32usize).filter(move |i| self.bits & (1 << i) != 0)
    }

    pub fn contains(self, oracle: usize) -> bool {
        self.bits & (1 << oracle) != 0
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }
}

/// A weak (Muchnik) degree in canonical form: the upward-closed set of
/// degrees of the solutions of any representative mass problem. Degrees are
/// ordered by reverse inclusion of representatives: larger set, easier
/// problem, smaller degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeakDegree {
    pub rep: OpenSet,
}

impl DegreeStructure {
    /// Builds the structure from explicit parts, validating that `deg` is a
    /// surjective, order-faithful quotient map onto the degree poset.
    pub fn new<S: AsRef<str>>(
        degrees: Poset,
        oracles: &[S],
        oracle_leq_pairs: &[(S, S)],
        deg: &BTreeMap<String, String>,
    ) -> Result<DegreeStructure, DegreeError> {
        let mut names: Vec<String> = oracles.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(DegreeError::DuplicateOracle(w[0].clone()));
            }
        }
        let index = |s: &str| -> Result<usize, DegreeError> {
            names
                .binary_search_by(|n| n.as_str().cmp(s))
                .map_err(|_| DegreeError::UnknownOracle(s.to_string()))
        };
        let n = names.len();
        let mut leq: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for (a, b) in oracle_leq_pairs {
            leq[index(a.as_ref())?] |= 1 << index(b.as_ref())?;
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = leq[i];
                for j in 0..n {
                    if leq[i] & (1 << j) != 0 {
                        acc |= leq[j];
                    }
                }
                if acc != leq[i] {
                    leq[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut deg_idx = vec![usize::MAX; n];
        for (i, name) in names.iter().enumerate() {
            let d = deg
                .get(name)
                .ok_or_else(|| DegreeError::MissingDeg(name.clone()))?;
            deg_idx[i] = degrees
                .index_of(d)
                .map_err(|_| DegreeError::UnknownDegree(d.clone()))?;
        }
        // Order-faithful: f <= g iff deg(f) <= deg(g).
        for i in 0..n {
            for j in 0..n {
                let o = leq[i] & (1 << j) != 0;
                let d = degrees.leq(deg_idx[i], deg_idx[j]);
                if o != d {
                    return Err(DegreeError::NotFaithful(names[i].clone(), names[j].clone()));
                }
            }
        }
        for d in 0..degrees.len() {
            if !deg_idx.contains(&d) {
                return Err(DegreeError::NotSurjective(degrees.name(d).to_string()));
            }
        }
        Ok(DegreeStructure {
            degrees,
            oracles: names,
            oracle_leq: leq,
            deg: deg_idx,
        })
    }

    /// Builds the quotient structure from a bare oracle preorder. Each degree
    /// is named after the lexicographically least oracle in its class.
    pub fn from_preorder<S: AsRef<str>>(
        oracles: &[S],
        oracle_leq_pairs: &[(S, S)],
    ) -> Result<DegreeStructure, DegreeError> {
        let mut names: Vec<String> = oracles.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(DegreeError::DuplicateOracle(w[0].clone()));
            }
        }
        let index = |s: &str| -> Result<usize, DegreeError> {
            names
                .binary_search_by(|n| n.as_str().cmp(s))
                .map_err(|_| DegreeError::UnknownOracle(s.to_string()))
        };
        let n = names.len();
        let mut leq: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for (a, b) in oracle_leq_pairs {
            leq[index(a.as_ref())?] |= 1 << index(b.as_ref())?;
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = leq[i];
                for j in 0..n {
                    if leq[i] & (1 << j) != 0 {
                        acc |= leq[j];
                    }
                }
                if acc != leq[i] {
                    leq[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // Equivalence classes under mutual reducibility.
        let mut class_rep: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in 0..i {
                if leq[i] & (1 << j) != 0 && leq[j] & (1 << i) != 0 {
                    class_rep[i] = class_rep[j];
                    break;
                }
            }
        }
        let mut degree_names: Vec<String> = Vec::new();
        let mut degree_of: BTreeMap<String, String> = BTreeMap::new();
        for i in 0..n {
            if class_rep[i] == i {
                degree_names.push(names[i].clone());
            }
            degree_of.insert(names[i].clone(), names[class_rep[i]].clone());
        }
        let mut pairs: Vec<(String, String)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if class_rep[i] == i && class_rep[j] == j && i != j && leq[i] & (1 << j) != 0 {
                    pairs.push((names[i].clone(), names[j].clone()));
                }
            }
        }
        let degrees = Poset::with_cap(&degree_names, &pairs, crate::caps::HARD_MAX_POINTS)?;
        let mut deg_idx = vec![usize::MAX; n];
        for (i, name) in names.iter().enumerate() {
            deg_idx[i] = degrees
                .index_of(&degree_of[name])
                .expect("class representative is a degree");
        }
        let ds = DegreeStructure {
            degrees,
            oracles: names.clone(),
            oracle_leq: leq,
            deg: deg_idx,
        };
        // The quotient order is faithful by construction; keep the check as a
        // guard on the closure computation.
        for i in 0..n {
            for j in 0..n {
                let o = ds.oracle_leq[i] & (1 << j) != 0;
                let d = ds.degrees.leq(ds.deg[i], ds.deg[j]);
                if o != d {
                    return Err(DegreeError::NotFaithful(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(ds)
    }

    pub fn degrees(&self) -> &Poset {
        &self.degrees
    }

    pub fn oracles(&self) -> &[String] {
        &self.oracles
    }

    pub fn oracle_index(&self, name: &str) -> Result<usize, DegreeError> {
        self.oracles
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| DegreeError::UnknownOracle(name.to_string()))
    }

    pub fn oracle_leq(&self, f: usize, g: usize) -> bool {
        self.oracle_leq[f] & (1 << g) != 0
    }

    pub fn deg_of(&self, oracle: usize) -> usize {
        self.deg[oracle]
    }

    pub fn problem_from_names<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<MassProblem, DegreeError> {
        let mut bits = 0u32;
        for s in names {
            bits |= 1 << self.oracle_index(s.as_ref())?;
        }
        Ok(MassProblem { bits })
    }

    pub fn all_mass_problems(&self) -> Vec<MassProblem> {
        (0u32..(1u64 << self.oracles.len()) as u32)
            .map(|bits| MassProblem { bits })
            .collect()
    }

    /// `p` is weakly reducible to `q`: every solution of `q` computes a
    /// solution of `p`.
    pub fn weak_reduces(&self, p: MassProblem, q: MassProblem) -> bool {
        q.iter().all(|g| p.iter().any(|f| self.oracle_leq(f, g)))
    }

    /// The up-set of degrees of the members of `p`; the canonical
    /// representative of its weak degree.
    pub fn psi_inv(&self, p: MassProblem) -> OpenSet {
        let mut bits = 0u32;
        for f in p.iter() {
            bits |= self.degrees.minimal_open(self.deg[f]).bits();
        }
        OpenSet::from_names_unchecked(bits)
    }

    /// The weak degree with an upward-closed set of degrees as
    /// representative: the degree of the mass problem of all oracles whose
    /// degree lies in the set.
    pub fn psi(&self, u: OpenSet) -> Result<WeakDegree, DegreeError> {
        if !self.degrees.is_open(u) {
            return Err(DegreeError::NotUpClosed);
        }
        Ok(WeakDegree { rep: u })
    }

    /// The mass problem canonically representing an up-set of degrees.
    pub fn problem_of_upset(&self, u: OpenSet) -> MassProblem {
        let mut bits = 0u32;
        for (i, &d) in self.deg.iter().enumerate() {
            if u.contains(d) {
                bits |= 1 << i;
            }
        }
        MassProblem { bits }
    }

    pub fn weak_degree(&self, p: MassProblem) -> WeakDegree {
        WeakDegree {
            rep: self.psi_inv(p),
        }
    }

    /// All weak degrees: one per up-set of degrees.
    pub fn all_weak_degrees(&self) -> Vec<WeakDegree> {
        self.degrees
            .all_opens()
            .into_iter()
            .map(|rep| WeakDegree { rep })
            .collect()
    }

    pub fn top_degree(&self) -> WeakDegree {
        WeakDegree {
            rep: OpenSet::EMPTY,
        }
    }

    pub fn bottom_degree(&self) -> WeakDegree {
        WeakDegree {
            rep: self.degrees.full(),
        }
    }

    /// `a <= b` on weak degrees: reverse inclusion of representatives.
    pub fn wdeg_leq(&self, a: WeakDegree, b: WeakDegree) -> bool {
        b.rep.is_subset(a.rep)
    }

    pub fn wdeg_sup(&self, a: WeakDegree, b: WeakDegree) -> WeakDegree {
        WeakDegree {
            rep: a.rep.intersect(b.rep),
        }
    }

    pub fn wdeg_inf(&self, a: WeakDegree, b: WeakDegree) -> WeakDegree {
        WeakDegree {
            rep: a.rep.union(b.rep),
        }
    }

    /// Implication: the least `c` with `sup(a, c) >= b`. Computed as the
    /// Heyting implication of representatives; [`Self::wdeg_imp_brute`] is the
    /// enumeration form, kept as an independent route.
    pub fn wdeg_imp(&self, a: WeakDegree, b: WeakDegree) -> WeakDegree {
        WeakDegree {
            rep: self.degrees.imp(a.rep, b.rep),
        }
    }

    /// Implication by brute force: the infimum over all weak degrees `c`
    /// such that `sup(a, c) >= b`.
    pub fn wdeg_imp_brute(&self, a: WeakDegree, b: WeakDegree) -> WeakDegree {
        let mut acc = OpenSet::EMPTY;
        for c in self.all_weak_degrees() {
            if self.wdeg_leq(b, self.wdeg_sup(a, c)) {
                acc = acc.union(c.rep); // infimum = union of representatives
            }
        }
        WeakDegree { rep: acc }
    }

    pub fn wdeg_neg(&self, a: WeakDegree) -> WeakDegree {
        self.wdeg_imp(a, self.top_degree())
    }

    pub fn wdeg_op(&self, op: WdegOp, a: WeakDegree, b: WeakDegree) -> WeakDegree {
        match op {
            WdegOp::Sup => self.wdeg_sup(a, b),
            WdegOp::Inf => self.wdeg_inf(a, b),
            WdegOp::Imp => self.wdeg_imp(a, b),
            WdegOp::Neg => self.wdeg_neg(a),
        }
    }

    /// Arbitrary suprema and infima via representatives.
    pub fn wdeg_sup_all(&self, degs: &[WeakDegree]) -> WeakDegree {
        let mut rep = self.degrees.full();
        for d in degs {
            rep = rep.intersect(d.rep);
        }
        WeakDegree { rep }
    }

    pub fn wdeg_inf_all(&self, degs: &[WeakDegree]) -> WeakDegree {
        let mut rep = OpenSet::EMPTY;
        for d in degs {
            rep = rep.union(d.rep);
        }
        WeakDegree { rep }
    }

    /// Requires a bottom degree and unique binary suprema (the shape needed
    /// for pair bounds); returns the bottom point index.
    pub fn validate_semilattice(&self) -> Result<usize, DegreeError> {
        let n = self.degrees.len();
        let bottom = (0..n)
            .find(|&b| (0..n).all(|d| self.degrees.leq(b, d)))
            .ok_or(DegreeError::NoBottom)?;
        for i in 0..n {
            for j in 0..n {
                if self.degrees.binary_sup(i, j).is_none() {
                    return Err(DegreeError::NoBinarySup(
                        self.degrees.name(i).to_string(),
                        self.degrees.name(j).to_string(),
                    ));
                }
            }
        }
        Ok(bottom)
    }

    pub fn render_weak_degree(&self, d: WeakDegree) -> String {
        d.rep.render(&self.degrees)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdegOp {
    Sup,
    Inf,
    Imp,
    Neg,
}

/// Abstract values with degrees: the stand-in for the degree-of-a-real map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSystem {
    /// Value name to degree point index, totally defined.
    pub vdeg: BTreeMap<String, usize>,
}

impl ValueSystem {
    pub fn new(
        ds: &DegreeStructure,
        values: &BTreeMap<String, String>,
    ) -> Result<ValueSystem, DegreeError> {
        let mut vdeg = BTreeMap::new();
        for (v, d) in values {
            let idx = ds
                .degrees
                .index_of(d)
                .map_err(|_| DegreeError::BadValueDegree(v.clone(), d.clone()))?;
            vdeg.insert(v.clone(), idx);
        }
        Ok(ValueSystem { vdeg })
    }

    pub fn degree_of(&self, value: &str) -> Option<usize> {
        self.vdeg.get(value).copied()
    }

    pub fn values(&self) -> BTreeSet<&str> {
        self.vdeg.keys().map(|s| s.as_str()).collect()
    }
}

/// The degree-bounded constant sheaf over the degree poset: the stalk at a
/// degree `d` holds the values computable at `d` (those with `vdeg <= d`),
/// with inclusion transitions. Its nonempty sections are constant values on
/// opens inside the value's cone, which is the finite abstraction of the
/// degree-gated reals.
pub fn muchnik_reals_sheaf(ds: &DegreeStructure, vs: &ValueSystem) -> Result<Sheaf, DegreeError> {
    ds.validate_semilattice()?;
    let base = ds.degrees.clone();
    let n = base.len();
    let mut stalks: Vec<Vec<StalkElem>> = Vec::with_capacity(n);
    for d in 0..n {
        let elems: Vec<StalkElem> = vs
            .vdeg
            .iter()
            .filter(|(_, &vd)| base.leq(vd, d))
            .map(|(v, _)| StalkElem::atom(v.clone()))
            .collect();
        stalks.push(elems);
    }
    let mut trans = BTreeMap::new();
    for (i, j) in base.related_pairs() {
        if i == j {
            continue;
        }
        let f: Vec<u32> = stalks[i]
            .iter()
            .map(|e| {
                stalks[j]
                    .iter()
                    .position(|x| x == e)
                    .expect("stalks grow upward") as u32
            })
            .collect();
        trans.insert((i, j), f);
    }
    Ok(Sheaf::from_parts(base, stalks, trans)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle preorder f0 <= f1, f0 <= f2 with three degree classes.
    fn vee() -> DegreeStructure {
        DegreeStructure::from_preorder(&["f0", "f1", "f2"], &[("f0", "f1"), ("f0", "f2")]).unwrap()
    }

    fn k2() -> DegreeStructure {
        DegreeStructure::from_preorder(&["bot", "top"], &[("bot", "top")]).unwrap()
    }

    #[test]
    fn quotient_construction() {
        // Mutually reducible oracles collapse to one degree.
        let ds =
            DegreeStructure::from_preorder(&["f", "g", "h"], &[("f", "g"), ("g", "f"), ("f", "h")])
                .unwrap();
        assert_eq!(ds.degrees().len(), 2);
        assert_eq!(
            ds.deg_of(ds.oracle_index("f").unwrap()),
            ds.deg_of(ds.oracle_index("g").unwrap())
        );

        let v = vee();
        assert_eq!(v.degrees().len(), 3);
        assert!(!v.degrees().is_directed());
    }

    #[test]
    fn faithfulness_validation() {
        let degrees = Poset::new(&["d0", "d1"], &[("d0", "d1")]).unwrap();
        let mut deg = BTreeMap::new();
        deg.insert("f".to_string(), "d0".to_string());
        deg.insert("g".to_string(), "d1".to_string());
        // Claimed order d0 <= d1 but oracles unrelated: not faithful.
        let err = DegreeStructure::new(degrees.clone(), &["f", "g"], &[], &deg).unwrap_err();
        assert!(matches!(err, DegreeError::NotFaithful(_, _)));
        // With the matching oracle pair it validates.
        assert!(DegreeStructure::new(degrees.clone(), &["f", "g"], &[("f", "g")], &deg).is_ok());
        // Surjectivity.
        let mut deg2 = BTreeMap::new();
        deg2.insert("f".to_string(), "d0".to_string());
        let err = DegreeStructure::new(degrees, &["f"], &[], &deg2).unwrap_err();
        assert!(matches!(err, DegreeError::NotSurjective(_)));
    }

    #[test]
    fn weak_reduces_examples() {
        let v = vee();
        let p1 = v.problem_from_names(&["f1"]).unwrap();
        let p2 = v.problem_from_names(&["f2"]).unwrap();
        assert!(v.weak_reduces(p1, p1)); // reflexive
        assert!(v.weak_reduces(p1, MassProblem::EMPTY)); // empty problem is top
        assert!(!v.weak_reduces(p1, p2)); // f1 does not reduce to f2

        // Transitivity on all triples of the fixture.
        let all = v.all_mass_problems();
        for &p in &all {
            for &q in &all {
                for &r in &all {
                    if v.weak_reduces(p, q) && v.weak_reduces(q, r) {
                        assert!(v.weak_reduces(p, r));
                    }
                }
            }
        }
    }

    #[test]
    fn psi_examples() {
        let v = vee();
        assert_eq!(v.psi_inv(MassProblem::EMPTY), OpenSet::EMPTY);
        let all = v.problem_from_names(&["f0", "f1", "f2"]).unwrap();
        assert_eq!(v.psi_inv(all), v.degrees().full());
        let p1 = v.problem_from_names(&["f1"]).unwrap();
        let d1 = v.degrees().index_of("f1").unwrap();
        assert_eq!(v.psi_inv(p1), v.degrees().minimal_open(d1));
        assert!(v
            .psi(OpenSet::from_names_unchecked(
                1 << v.degrees().index_of("f0").unwrap()
            ))
            .is_err());
    }

    #[test]
    fn psi_is_order_reversing_bijection() {
        let v = vee();
        // Bijectivity: psi_inv . problem_of_upset is the identity on up-sets.
        for u in v.degrees().all_opens() {
            assert_eq!(v.psi_inv(v.problem_of_upset(u)), u);
        }
        // Order reversal against the mass-problem order, both directions.
        let all = v.all_mass_problems();
        for &p in &all {
            for &q in &all {
                let rev = v.psi_inv(q).is_subset(v.psi_inv(p));
                assert_eq!(v.weak_reduces(p, q), rev);
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let v = vee();
        let d1 = v.weak_degree(v.problem_from_names(&["f1"]).unwrap());
        let d2 = v.weak_degree(v.problem_from_names(&["f2"]).unwrap());
        let both = v.weak_degree(v.problem_from_names(&["f1", "f2"]).unwrap());
        assert_eq!(v.wdeg_inf(d1, d2), both);
        assert_eq!(v.wdeg_sup(d1, v.bottom_degree()), d1);
        assert_eq!(v.wdeg_imp(d1, d1), v.bottom_degree());
        assert_eq!(v.wdeg_neg(v.bottom_degree()), v.top_degree());
        // Solvability of a => b is equivalent to a >= b.
        for a in v.all_weak_degrees() {
            for b in v.all_weak_degrees() {
                let solvable = v.wdeg_imp(a, b) == v.bottom_degree();
                assert_eq!(solvable, v.wdeg_leq(b, a));
            }
        }
    }

    #[test]
    fn imp_routes_agree() {
        for ds in [vee(), k2()] {
            for a in ds.all_weak_degrees() {
                for b in ds.all_weak_degrees() {
                    assert_eq!(ds.wdeg_imp(a, b), ds.wdeg_imp_brute(a, b));
                }
            }
        }
    }

    #[test]
    fn reals_sheaf_k2() {
        let ds = k2();
        let mut values = BTreeMap::new();
        values.insert("u".to_string(), "bot".to_string());
        values.insert("v".to_string(), "top".to_string());
        let vs = ValueSystem::new(&ds, &values).unwrap();
        let sheaf = muchnik_reals_sheaf(&ds, &vs).unwrap();
        let base = sheaf.base().clone();
        let sections = sheaf.all_sections(10_000).unwrap();
        let rendered: Vec<String> = sections
            .iter()
            .filter(|s| !s.extent().is_empty())
            .map(|s| s.render(&sheaf))
            .collect();
        assert_eq!(rendered, vec!["<top:u>", "<top:v>", "<bot:u,top:u>"]);
        // Value at the bottom degree yields a global section.
        assert!(sections.iter().any(|s| s.extent() == base.full()));
        // Proper subsheaf of the constant sheaf over the same values.
        let constant = Sheaf::simple(base, &["u", "v"]);
        assert!(sections.len() < constant.all_sections(10_000).unwrap().len());

        // Non-semilattice degrees are rejected.
        let v = vee();
        let mut values = BTreeMap::new();
        for o in v.oracles() {
            values.insert(o.clone(), o.clone());
        }
        let vs = ValueSystem::new(&v, &values).unwrap();
        assert!(matches!(
            muchnik_reals_sheaf(&v, &vs),
            Err(DegreeError::NoBinarySup(_, _))
        ));
    }

    #[test]
    fn complete_distributivity_small_families() {
        let v = vee();
        let degs = v.all_weak_degrees();
        for &b in &degs {
            for &x in &degs {
                for &y in &degs {
                    let fam = [x, y];
                    assert_eq!(
                        v.wdeg_inf(v.wdeg_sup_all(&fam), b),
                        v.wdeg_sup_all(&[v.wdeg_inf(x, b), v.wdeg_inf(y, b)])
                    );
                    assert_eq!(
                        v.wdeg_sup(v.wdeg_inf_all(&fam), b),
                        v.wdeg_inf_all(&[v.wdeg_sup(x, b), v.wdeg_sup(y, b)])
                    );
                }
            }
        }
    }
}
