//! Bounded prefix cones and the disjoint-refinement procedure.
//!
//! The universe is the set of sequences of length `depth` over the alphabet
//! `{0..branching-1}`; a cone `V_p` is the set of sequences extending the
//! prefix `p`. Refinement replaces a collection of cones by the cones of the
//! minimal prefixes (in length-then-lexicographic order) covered by some
//! input cone, yielding a pairwise disjoint collection with the same union,
//! each member contained in an input cone.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("digit {digit} out of range for branching {branching}")]
    DigitRange { digit: u8, branching: u8 },
    #[error("prefix length {len} exceeds the depth bound {depth}")]
    TooDeep { len: usize, depth: u8 },
    #[error("branching must be at least 1")]
    ZeroBranching,
}

/// A prefix over the alphabet `{0..b-1}`, standing for the cone of its
/// extensions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixCone {
    pub prefix: Vec<u8>,
}

impl PrefixCone {
    pub fn new(prefix: Vec<u8>) -> PrefixCone {
        PrefixCone { prefix }
    }

    pub fn root() -> PrefixCone {
        PrefixCone { prefix: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn is_prefix_of(&self, other: &PrefixCone) -> bool {
        other.prefix.len() >= self.prefix.len()
            && other.prefix[..self.prefix.len()] == self.prefix[..]
    }

    fn check(&self, branching: u8, depth: u8) -> Result<(), ConeError> {
        if branching == 0 {
            return Err(ConeError::ZeroBranching);
        }
        if self.prefix.len() > depth as usize {
            return Err(ConeError::TooDeep {
                len: self.prefix.len(),
                depth,
            });
        }
        for &d in &self.prefix {
            if d >= branching {
                return Err(ConeError::DigitRange {
                    digit: d,
                    branching,
                });
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        if self.prefix.is_empty() {
            "e".to_string()
        } else {
            self.prefix
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    /// Parses a comma-separated digit tuple; `e` or the empty string is the
    /// root prefix.
    pub fn parse(text: &str) -> Result<PrefixCone, ConeError> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(PrefixCone::root());
        }
        let mut prefix = Vec::new();
        for part in text.split(',') {
            let d: u8 = part.trim().parse().map_err(|_| ConeError::DigitRange {
                digit: u8::MAX,
                branching: 0,
            })?;
            prefix.push(d);
        }
        Ok(PrefixCone { prefix })
    }
}

/// How two cones relate as sets of depth-bounded sequences, determined by
/// prefix comparability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeRelation {
    Equal,
    /// The left cone strictly contains the right cone.
    Contains,
    /// The left cone is strictly contained in the right cone.
    Contained,
    Disjoint,
}

pub fn cone_relations(p: &PrefixCone, q: &PrefixCone) -> ConeRelation {
    if p == q {
        ConeRelation::Equal
    } else if p.is_prefix_of(q) {
        ConeRelation::Contains
    } else if q.is_prefix_of(p) {
        ConeRelation::Contained
    } else {
        ConeRelation::Disjoint
    }
}

/// All depth-`depth` sequences extending `p`, as flat digit strings.
fn extensions(p: &PrefixCone, branching: u8, depth: u8) -> Vec<Vec<u8>> {
    let mut out = vec![p.prefix.clone()];
    while out[0].len() < depth as usize {
        let mut next = Vec::with_capacity(out.len() * branching as usize);
        for seq in &out {
            for d in 0..branching {
                let mut s = seq.clone();
                s.push(d);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// `V_p ⊆ V_q` over the depth-bounded universe, by membership.
fn cone_subset(p: &PrefixCone, q: &PrefixCone, branching: u8, depth: u8) -> bool {
    let qs = extensions(q, branching, depth);
    extensions(p, branching, depth)
        .iter()
        .all(|s| qs.contains(s))
}

/// The disjoint refinement: cones of prefixes minimal (no covered proper
/// prefix) among those whose cone lies inside some input cone. Prefixes are
/// scanned in length-then-lexicographic order, so the output is canonical.
pub fn refine_disjoint(
    cones: &[PrefixCone],
    branching: u8,
    depth: u8,
) -> Result<Vec<PrefixCone>, ConeError> {
    for c in cones {
        c.check(branching, depth)?;
    }
    if cones.is_empty() {
        return Ok(Vec::new());
    }
    let mut covered: Vec<PrefixCone> = Vec::new();
    let mut output: Vec<PrefixCone> = Vec::new();
    let mut level: Vec<PrefixCone> = vec![PrefixCone::root()];
    for _ in 0..=depth {
        for p in &level {
            if covered.iter().any(|q| q.is_prefix_of(p)) {
                continue; // a proper prefix is already covered
            }
            if cones.iter().any(|u| cone_subset(p, u, branching, depth)) {
                covered.push(p.clone());
                output.push(p.clone());
            }
        }
        let mut next = Vec::with_capacity(level.len() * branching as usize);
        for p in &level {
            if p.len() < depth as usize {
                for d in 0..branching {
                    let mut s = p.prefix.clone();
                    s.push(d);
                    next.push(PrefixCone::new(s));
                }
            }
        }
        level = next;
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn cones(specs: &[&[u8]]) -> Vec<PrefixCone> {
        specs.iter().map(|s| PrefixCone::new(s.to_vec())).collect()
    }

    #[test]
    fn refine_examples() {
        assert_eq!(refine_disjoint(&[], 2, 4).unwrap(), Vec::new());
        // A cone swallowed by a shorter one disappears.
        let out = refine_disjoint(&cones(&[&[0], &[0, 1]]), 2, 4).unwrap();
        assert_eq!(out, cones(&[&[0]]));
        // An antichain of minimal prefixes is returned as-is.
        let input = cones(&[&[0], &[1, 2]]);
        let out = refine_disjoint(&input, 3, 4).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn refine_unary_alphabet() {
        // With branching 1 every cone is the whole universe, so the root
        // prefix is the minimal covered one.
        let out = refine_disjoint(&cones(&[&[0, 0]]), 1, 3).unwrap();
        assert_eq!(out, vec![PrefixCone::root()]);
    }

    #[test]
    fn relations_examples() {
        let p0 = PrefixCone::new(vec![0]);
        let p01 = PrefixCone::new(vec![0, 1]);
        let p1 = PrefixCone::new(vec![1]);
        assert_eq!(cone_relations(&p0, &p01), ConeRelation::Contains);
        assert_eq!(cone_relations(&p01, &p0), ConeRelation::Contained);
        assert_eq!(cone_relations(&p0, &p1), ConeRelation::Disjoint);
        assert_eq!(cone_relations(&p01, &p01), ConeRelation::Equal);
    }

    #[test]
    fn bounds_are_checked() {
        assert!(matches!(
            refine_disjoint(&cones(&[&[3]]), 3, 4),
            Err(ConeError::DigitRange { .. })
        ));
        assert!(matches!(
            refine_disjoint(&cones(&[&[0, 0, 0]]), 2, 2),
            Err(ConeError::TooDeep { .. })
        ));
        assert!(matches!(
            refine_disjoint(&cones(&[&[0]]), 0, 2),
            Err(ConeError::ZeroBranching)
        ));
    }

    fn union_of(out: &[PrefixCone], b: u8, d: u8) -> std::collections::BTreeSet<Vec<u8>> {
        out.iter().flat_map(|c| extensions(c, b, d)).collect()
    }

    #[test]
    fn refinement_properties_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let b = rng.gen_range(1..=3u8);
            let d = rng.gen_range(1..=5u8);
            let k = rng.gen_range(0..=5usize);
            let input: Vec<PrefixCone> = (0..k)
                .map(|_| {
                    let len = rng.gen_range(0..=d) as usize;
                    PrefixCone::new((0..len).map(|_| rng.gen_range(0..b)).collect())
                })
                .collect();
            let out = refine_disjoint(&input, b, d).unwrap();
            // Union preservation over the depth-d universe.
            assert_eq!(union_of(&out, b, d), union_of(&input, b, d));
            // Subordination: each output inside some input.
            for c in &out {
                assert!(input.iter().any(|u| cone_subset(c, u, b, d)));
            }
            // Pairwise disjoint.
            for (i, c1) in out.iter().enumerate() {
                for c2 in out.iter().skip(i + 1) {
                    let e1 = union_of(std::slice::from_ref(c1), b, d);
                    let e2 = union_of(std::slice::from_ref(c2), b, d);
                    assert!(e1.is_disjoint(&e2));
                }
            }
            // Idempotence.
            assert_eq!(refine_disjoint(&out, b, d).unwrap(), out);
        }
    }
}
