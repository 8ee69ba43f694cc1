//! Finite sheaves over a poset space, in functor form.
//!
//! A sheaf is stored as a set-valued functor on the base poset: a finite
//! stalk at every point and a transition function along every related pair,
//! functorial by validation. Sections are the derived data: matching
//! families over an open set, i.e. pointwise stalk choices that commute with
//! the transitions. Over Alexandrov spaces this presentation is equivalent
//! to the extent/restriction presentation, and the extent/restriction axioms
//! hold for the derived structure by construction.
//!
//! The module also provides the standard constructions: products,
//! restriction sheaves, the Sierpinski-valued sheaf `Omega1`, function
//! sheaves, power sheaves, simple (locally constant) sheaves, morphism
//! enumeration, subsheaf enumeration, and isomorphism search.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::caps::Caps;
use crate::poset::{OpenSet, Poset, PosetError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SheafError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("expected {expected} stalks, got {got}")]
    StalkCount { expected: usize, got: usize },
    #[error("duplicate stalk element {elem} at point {point}")]
    DuplicateStalkElem { point: String, elem: String },
    #[error("missing transition {from} -> {to}")]
    MissingTransition { from: String, to: String },
    #[error("transition {from} -> {to} names unknown or out-of-range element")]
    BadTransition { from: String, to: String },
    #[error("functoriality violation at {lo} <= {mid} <= {hi}: composite disagrees with direct transition")]
    Functoriality { lo: String, mid: String, hi: String },
    #[error("transition {from} -> {to} is required but the target stalk is empty")]
    NoMapIntoEmpty { from: String, to: String },
    #[error("stalk at {point} would have {count} elements, exceeding the cap of {cap}")]
    StalkCap {
        point: String,
        count: usize,
        cap: usize,
    },
    #[error("section enumeration exceeded the cap of {0}")]
    TooManySections(usize),
    #[error("enumeration work budget exceeded ({0} steps)")]
    WorkBudget(usize),
    #[error("sheaves have different base posets")]
    BaseMismatch,
    #[error("family does not match transitions at {lo} <= {hi}")]
    NotMatching { lo: String, hi: String },
    #[error("value at {point} is out of range for its stalk")]
    ValueRange { point: String },
    #[error("extent omits {point} but a value is given there (or vice versa)")]
    ExtentMismatch { point: String },
    #[error("sections are incompatible at {point}")]
    Incompatible { point: String },
    #[error("unknown stalk element {elem} at point {point}")]
    UnknownStalkElem { point: String, elem: String },
    #[error("stalk at {point} has {size} elements; exhaustive search supports at most {max}")]
    IsoTooLarge {
        point: String,
        size: usize,
        max: usize,
    },
}

/// Budget on raw backtracking steps for the exhaustive enumerations.
const WORK_BUDGET: usize = 4_000_000;

/// A natural family of per-point maps over an upward-closed domain.
///
/// `components[p]` sends indices of the domain sheaf's stalk at `p` to
/// indices of the codomain sheaf's stalk at `p`. Naturality (commutation with
/// the transitions on both sides) is checked where such families are built.
/// These are exactly the sheaf morphisms `M|U -> N|U`, and also the stalk
/// elements of function sheaves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SheafMorphism {
    pub domain: OpenSet,
    pub components: BTreeMap<usize, Vec<u32>>,
}

impl SheafMorphism {
    /// Restriction of the family to a smaller open set.
    pub fn restrict(&self, u: OpenSet) -> SheafMorphism {
        let dom = self.domain.intersect(u);
        SheafMorphism {
            domain: dom,
            components: self
                .components
                .iter()
                .filter(|(p, _)| dom.contains(**p))
                .map(|(p, f)| (*p, f.clone()))
                .collect(),
        }
    }

    /// Applies the morphism to a section of the domain sheaf. The result has
    /// extent `E(a) ∩ domain` and lives in the codomain sheaf.
    pub fn apply(&self, a: &Section) -> Section {
        let extent = a.extent().intersect(self.domain);
        let mut values = vec![None; a.values.len()];
        for p in extent.iter() {
            let x = a.values[p].expect("point in extent");
            values[p] = Some(self.components[&p][x as usize]);
        }
        Section { extent, values }
    }

    pub fn is_natural(&self, dom: &Sheaf, cod: &Sheaf) -> bool {
        for p in self.domain.iter() {
            for q in self.domain.iter() {
                if p != q && dom.base().leq(p, q) {
                    for x in 0..dom.stalk(p).len() {
                        let via_dom = self.components[&q][dom.trans_apply(p, q, x as u32) as usize];
                        let via_cod = cod.trans_apply(p, q, self.components[&p][x]);
                        if via_dom != via_cod {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn render(&self, base: &Poset) -> String {
        let mut s = String::from("[");
        for (k, (p, f)) in self.components.iter().enumerate() {
            if k > 0 {
                s.push(';');
            }
            s.push_str(base.name(*p));
            s.push(':');
            s.push('{');
            for (i, y) in f.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&format!("{i}>{y}"));
            }
            s.push('}');
        }
        s.push(']');
        s
    }
}

/// An element of some stalk. Derived constructions produce structured
/// elements; user-defined sheaves use named atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StalkElem {
    /// A named value (user functor sheaves, simple sheaves, degree-bounded values).
    Atom(String),
    /// A pair, for product sheaves.
    Pair(Box<StalkElem>, Box<StalkElem>),
    /// An open set `V ⊆ U_alpha`, for the sheaf `Omega1`.
    Open(OpenSet),
    /// A natural family on `U_alpha`, for function sheaves.
    Family(Arc<SheafMorphism>),
}

impl StalkElem {
    pub fn atom<S: Into<String>>(s: S) -> StalkElem {
        StalkElem::Atom(s.into())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            StalkElem::Atom(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&StalkElem, &StalkElem)> {
        match self {
            StalkElem::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_open(&self) -> Option<OpenSet> {
        match self {
            StalkElem::Open(u) => Some(*u),
            _ => None,
        }
    }

    pub fn as_family(&self) -> Option<&SheafMorphism> {
        match self {
            StalkElem::Family(f) => Some(f),
            _ => None,
        }
    }

    /// Deterministic display name, used in reports and model files.
    pub fn render(&self, base: &Poset) -> String {
        match self {
            StalkElem::Atom(s) => s.clone(),
            StalkElem::Pair(a, b) => format!("({},{})", a.render(base), b.render(base)),
            StalkElem::Open(u) => u.render(base),
            StalkElem::Family(f) => f.render(base),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct SheafInner {
    base: Poset,
    /// Per-point stalks, each sorted and duplicate-free.
    stalks: Vec<Vec<StalkElem>>,
    /// Index maps for every related pair `(i, j)` with `i < j` in the order.
    /// The identity transition on the diagonal is implicit.
    trans: BTreeMap<(usize, usize), Vec<u32>>,
}

/// A finite sheaf in functor form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sheaf {
    inner: Arc<SheafInner>,
}

/// A matching family with an extent: the derived notion of section.
///
/// Every sheaf has exactly one section with empty extent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    extent: OpenSet,
    /// One entry per base point; `Some` exactly on the extent.
    values: Vec<Option<u32>>,
}

impl PartialOrd for Section {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Section {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.extent
            .cmp(&other.extent)
            .then_with(|| self.values.cmp(&other.values))
    }
}

impl Section {
    pub fn empty(n_points: usize) -> Section {
        Section {
            extent: OpenSet::EMPTY,
            values: vec![None; n_points],
        }
    }

    pub fn extent(&self) -> OpenSet {
        self.extent
    }

    pub fn value_at(&self, point: usize) -> Option<u32> {
        self.values.get(point).copied().flatten()
    }

    pub fn is_global(&self, base: &Poset) -> bool {
        self.extent == base.full()
    }

    /// Restriction in functor form: drop the points outside `u`.
    /// `E(a|U) = E(a) ∩ U` and `(a|U)|V = a|(U ∩ V)` hold definitionally.
    pub fn restrict(&self, u: OpenSet) -> Section {
        let extent = self.extent.intersect(u);
        Section {
            extent,
            values: (0..self.values.len())
                .map(|p| {
                    if extent.contains(p) {
                        self.values[p]
                    } else {
                        None
                    }
                })
                .collect(),
        }
    }

    /// `a <= b` in the section order: `a = b` restricted to `E(a)`.
    pub fn leq(&self, other: &Section) -> bool {
        *self == other.restrict(self.extent)
    }

    pub fn render(&self, sheaf: &Sheaf) -> String {
        let mut s = String::from("<");
        for (k, p) in self.extent.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let v = self.values[p].unwrap() as usize;
            s.push_str(&format!(
                "{}:{}",
                sheaf.base().name(p),
                sheaf.stalk(p)[v].render(sheaf.base())
            ));
        }
        s.push('>');
        s
    }
}

/// Pointwise equality on the overlap of extents.
pub fn compatible(a: &Section, b: &Section) -> bool {
    a.extent
        .intersect(b.extent)
        .iter()
        .all(|p| a.values[p] == b.values[p])
}

impl Sheaf {
    /// Validated construction from raw stalks and transitions.
    ///
    /// `trans` must contain index maps at least for all covering pairs with a
    /// nonempty source stalk; maps for the remaining related pairs are derived
    /// by composition. Functoriality of the full transition system is checked.
    pub fn from_parts(
        base: Poset,
        stalks: Vec<Vec<StalkElem>>,
        trans: BTreeMap<(usize, usize), Vec<u32>>,
    ) -> Result<Sheaf, SheafError> {
        let n = base.len();
        if stalks.len() != n {
            return Err(SheafError::StalkCount {
                expected: n,
                got: stalks.len(),
            });
        }
        // Sort each stalk canonically and remap the given transitions.
        let mut sorted: Vec<Vec<StalkElem>> = Vec::with_capacity(n);
        let mut perm: Vec<Vec<usize>> = Vec::with_capacity(n); // perm[p][new] = old
        let mut inv: Vec<Vec<u32>> = Vec::with_capacity(n); // inv[p][old] = new
        for (p, stalk) in stalks.into_iter().enumerate() {
            let mut order: Vec<usize> = (0..stalk.len()).collect();
            order.sort_by(|&a, &b| stalk[a].cmp(&stalk[b]));
            let s: Vec<StalkElem> = order.iter().map(|&i| stalk[i].clone()).collect();
            for w in s.windows(2) {
                if w[0] == w[1] {
                    return Err(SheafError::DuplicateStalkElem {
                        point: base.name(p).to_string(),
                        elem: w[0].render(&base),
                    });
                }
            }
            let mut iv = vec![0u32; s.len()];
            for (new, &old) in order.iter().enumerate() {
                iv[old] = new as u32;
            }
            sorted.push(s);
            perm.push(order);
            inv.push(iv);
        }
        let mut maps: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for ((i, j), f) in trans {
            if i == j || !base.leq(i, j) {
                return Err(SheafError::BadTransition {
                    from: base.name(i).to_string(),
                    to: base.name(j).to_string(),
                });
            }
            if f.len() != sorted[i].len() || f.iter().any(|&y| y as usize >= sorted[j].len()) {
                if !sorted[i].is_empty() && sorted[j].is_empty() {
                    return Err(SheafError::NoMapIntoEmpty {
                        from: base.name(i).to_string(),
                        to: base.name(j).to_string(),
                    });
                }
                return Err(SheafError::BadTransition {
                    from: base.name(i).to_string(),
                    to: base.name(j).to_string(),
                });
            }
            let remapped: Vec<u32> = (0..sorted[i].len())
                .map(|new_x| inv[j][f[perm[i][new_x]] as usize])
                .collect();
            maps.insert((i, j), remapped);
        }
        // Derive missing transitions by composition until fixpoint.
        loop {
            let mut added = false;
            for (i, j) in base.related_pairs() {
                if i == j || maps.contains_key(&(i, j)) {
                    continue;
                }
                if sorted[i].is_empty() {
                    maps.insert((i, j), Vec::new());
                    added = true;
                    continue;
                }
                let mid = (0..n).find(|&k| {
                    k != i
                        && k != j
                        && base.leq(i, k)
                        && base.leq(k, j)
                        && maps.contains_key(&(i, k))
                        && maps.contains_key(&(k, j))
                });
                if let Some(k) = mid {
                    let comp: Vec<u32> = maps[&(i, k)]
                        .iter()
                        .map(|&x| maps[&(k, j)][x as usize])
                        .collect();
                    maps.insert((i, j), comp);
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        for (i, j) in base.related_pairs() {
            if i != j && !maps.contains_key(&(i, j)) {
                if !sorted[i].is_empty() && sorted[j].is_empty() {
                    return Err(SheafError::NoMapIntoEmpty {
                        from: base.name(i).to_string(),
                        to: base.name(j).to_string(),
                    });
                }
                return Err(SheafError::MissingTransition {
                    from: base.name(i).to_string(),
                    to: base.name(j).to_string(),
                });
            }
        }
        // Full functoriality check.
        for (i, j) in base.related_pairs() {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k != i && k != j && base.leq(i, k) && base.leq(k, j) {
                    let direct = &maps[&(i, j)];
                    let first = &maps[&(i, k)];
                    let second = &maps[&(k, j)];
                    for x in 0..sorted[i].len() {
                        if second[first[x] as usize] != direct[x] {
                            return Err(SheafError::Functoriality {
                                lo: base.name(i).to_string(),
                                mid: base.name(k).to_string(),
                                hi: base.name(j).to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(Sheaf {
            inner: Arc::new(SheafInner {
                base,
                stalks: sorted,
                trans: maps,
            }),
        })
    }

    /// Construction from named stalks and name-level transition maps
    /// (the model-file form).
    pub fn from_named_parts(
        base: Poset,
        stalks: &BTreeMap<String, Vec<String>>,
        transitions: &BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
    ) -> Result<Sheaf, SheafError> {
        let n = base.len();
        let mut named: Vec<Vec<String>> = vec![Vec::new(); n];
        for (point, elems) in stalks {
            let p = base.index_of(point)?;
            named[p] = elems.clone();
        }
        // from_parts sorts; build index maps against the sorted order here.
        let mut sorted_names = named.clone();
        for s in &mut sorted_names {
            s.sort();
        }
        let lookup = |p: usize, name: &str| -> Result<u32, SheafError> {
            sorted_names[p]
                .binary_search_by(|x| x.as_str().cmp(name))
                .map(|i| i as u32)
                .map_err(|_| SheafError::UnknownStalkElem {
                    point: base.name(p).to_string(),
                    elem: name.to_string(),
                })
        };
        let mut trans = BTreeMap::new();
        for (from, tos) in transitions {
            let i = base.index_of(from)?;
            for (to, map) in tos {
                let j = base.index_of(to)?;
                let mut f = vec![u32::MAX; sorted_names[i].len()];
                for (x, y) in map {
                    f[lookup(i, x)? as usize] = lookup(j, y)?;
                }
                if f.contains(&u32::MAX) {
                    return Err(SheafError::BadTransition {
                        from: from.clone(),
                        to: to.clone(),
                    });
                }
                trans.insert((i, j), f);
            }
        }
        let sorted_elems: Vec<Vec<StalkElem>> = sorted_names
            .iter()
            .map(|names| names.iter().map(StalkElem::atom).collect())
            .collect();
        Sheaf::from_parts(base, sorted_elems, trans)
    }

    pub fn base(&self) -> &Poset {
        &self.inner.base
    }

    pub fn stalk(&self, point: usize) -> &[StalkElem] {
        &self.inner.stalks[point]
    }

    pub fn stalk_index(&self, point: usize, elem: &StalkElem) -> Option<u32> {
        self.inner.stalks[point]
            .binary_search(elem)
            .ok()
            .map(|i| i as u32)
    }

    pub fn trans_apply(&self, i: usize, j: usize, x: u32) -> u32 {
        if i == j {
            x
        } else {
            self.inner.trans[&(i, j)][x as usize]
        }
    }

    /// The one-point-stalk sheaf; its sections are exactly the opens.
    pub fn terminal(base: Poset) -> Sheaf {
        let n = base.len();
        let stalks = vec![vec![StalkElem::atom("*")]; n];
        let trans = base
            .related_pairs()
            .into_iter()
            .filter(|(i, j)| i != j)
            .map(|(i, j)| ((i, j), vec![0u32]))
            .collect();
        Sheaf::from_parts(base, stalks, trans).expect("terminal sheaf is functorial")
    }

    /// The empty-stalk sheaf; its only section is the empty section.
    pub fn empty_sheaf(base: Poset) -> Sheaf {
        let n = base.len();
        Sheaf::from_parts(base, vec![Vec::new(); n], BTreeMap::new())
            .expect("empty sheaf is functorial")
    }

    /// The simple sheaf over a value set: locally constant partial functions
    /// into the set. Every minimal neighborhood `U_alpha` is order-connected,
    /// so each stalk is a copy of the value set with identity transitions;
    /// per-component constancy emerges in the derived sections.
    pub fn simple<S: AsRef<str>>(base: Poset, values: &[S]) -> Sheaf {
        let mut vals: Vec<String> = values.iter().map(|v| v.as_ref().to_string()).collect();
        vals.sort();
        vals.dedup();
        let n = base.len();
        let stalk: Vec<StalkElem> = vals.iter().map(StalkElem::atom).collect();
        let trans = base
            .related_pairs()
            .into_iter()
            .filter(|(i, j)| i != j)
            .map(|(i, j)| ((i, j), (0..vals.len() as u32).collect()))
            .collect();
        Sheaf::from_parts(base, vec![stalk; n], trans).expect("simple sheaf is functorial")
    }

    /// The global section of a simple sheaf with the given constant value.
    pub fn constant_section(&self, value: &str) -> Option<Section> {
        let n = self.base().len();
        let mut values = vec![None; n];
        for (p, slot) in values.iter_mut().enumerate() {
            *slot = Some(self.stalk_index(p, &StalkElem::atom(value))?);
        }
        Some(Section {
            extent: self.base().full(),
            values,
        })
    }

    /// All matching families over `u`, in canonical order. Over the empty set
    /// there is exactly one (empty) section.
    pub fn sections(&self, u: OpenSet, cap: usize) -> Result<Vec<Section>, SheafError> {
        let base = self.base();
        let n = base.len();
        if u.is_empty() {
            return Ok(vec![Section::empty(n)]);
        }
        let mins = base.minimal_points(u);
        let order = base.linear_extension(u);
        if mins.iter().any(|&m| self.stalk(m).is_empty()) {
            return Ok(Vec::new());
        }
        // Upper bound on raw assignments; guards the enumeration loop itself.
        let mut bound: u128 = 1;
        for &m in &mins {
            bound = bound.saturating_mul(self.stalk(m).len() as u128);
            if bound > WORK_BUDGET as u128 {
                return Err(SheafError::WorkBudget(WORK_BUDGET));
            }
        }
        let mut out = Vec::new();
        let mut choice: Vec<usize> = vec![0; mins.len()];
        'outer: loop {
            // Propagate the choice upward along the linear extension.
            let mut values: Vec<Option<u32>> = vec![None; n];
            for (k, &m) in mins.iter().enumerate() {
                values[m] = Some(choice[k] as u32);
            }
            let mut ok = true;
            'prop: for &p in &order {
                if values[p].is_some() {
                    continue;
                }
                let mut v: Option<u32> = None;
                for &q in &order {
                    if q == p {
                        break;
                    }
                    if base.leq(q, p) {
                        let w = self.trans_apply(q, p, values[q].unwrap());
                        match v {
                            None => v = Some(w),
                            Some(prev) if prev != w => {
                                ok = false;
                                break 'prop;
                            }
                            _ => {}
                        }
                    }
                }
                values[p] = v; // every point of u sits above a minimal point
            }
            if ok {
                out.push(Section { extent: u, values });
                if out.len() > cap {
                    return Err(SheafError::TooManySections(cap));
                }
            }
            // Odometer over minimal-point choices.
            for k in (0..mins.len()).rev() {
                choice[k] += 1;
                if choice[k] < self.stalk(mins[k]).len() {
                    continue 'outer;
                }
                choice[k] = 0;
            }
            break;
        }
        out.sort();
        Ok(out)
    }

    /// Sections over every open, in canonical order of (extent, family).
    pub fn all_sections(&self, cap: usize) -> Result<Vec<Section>, SheafError> {
        let mut out = Vec::new();
        for u in self.base().all_opens() {
            let mut secs = self.sections(u, cap)?;
            if out.len() + secs.len() > cap {
                return Err(SheafError::TooManySections(cap));
            }
            out.append(&mut secs);
        }
        Ok(out)
    }

    /// Validated section construction.
    pub fn section(
        &self,
        extent: OpenSet,
        values: Vec<Option<u32>>,
    ) -> Result<Section, SheafError> {
        let base = self.base();
        base.check_open(extent)?;
        if values.len() != base.len() {
            return Err(SheafError::StalkCount {
                expected: base.len(),
                got: values.len(),
            });
        }
        for (p, value) in values.iter().enumerate() {
            match *value {
                Some(v) => {
                    if !extent.contains(p) {
                        return Err(SheafError::ExtentMismatch {
                            point: base.name(p).to_string(),
                        });
                    }
                    if v as usize >= self.stalk(p).len() {
                        return Err(SheafError::ValueRange {
                            point: base.name(p).to_string(),
                        });
                    }
                }
                None => {
                    if extent.contains(p) {
                        return Err(SheafError::ExtentMismatch {
                            point: base.name(p).to_string(),
                        });
                    }
                }
            }
        }
        for p in extent.iter() {
            for q in extent.iter() {
                if p != q && base.leq(p, q) {
                    let w = self.trans_apply(p, q, values[p].unwrap());
                    if w != values[q].unwrap() {
                        return Err(SheafError::NotMatching {
                            lo: base.name(p).to_string(),
                            hi: base.name(q).to_string(),
                        });
                    }
                }
            }
        }
        Ok(Section { extent, values })
    }

    /// Section construction from point and element names (model-file form).
    pub fn section_from_names(
        &self,
        extent_names: &[String],
        family: &BTreeMap<String, String>,
    ) -> Result<Section, SheafError> {
        let base = self.base();
        let extent = base.open_from_names(extent_names)?;
        let mut values = vec![None; base.len()];
        for (point, elem) in family {
            let p = base.index_of(point)?;
            let idx = self
                .stalk(p)
                .iter()
                .position(|e| e.render(base) == *elem)
                .ok_or_else(|| SheafError::UnknownStalkElem {
                    point: point.clone(),
                    elem: elem.clone(),
                })?;
            values[p] = Some(idx as u32);
        }
        self.section(extent, values)
    }

    /// Least upper bound of a pairwise compatible set of sections: the glued
    /// family over the union of extents.
    pub fn sup_sections(&self, sections: &[Section]) -> Result<Section, SheafError> {
        let n = self.base().len();
        let mut extent = OpenSet::EMPTY;
        let mut values: Vec<Option<u32>> = vec![None; n];
        for s in sections {
            for p in s.extent.iter() {
                match values[p] {
                    None => values[p] = s.values[p],
                    Some(v) if Some(v) != s.values[p] => {
                        return Err(SheafError::Incompatible {
                            point: self.base().name(p).to_string(),
                        })
                    }
                    _ => {}
                }
            }
            extent = extent.union(s.extent);
        }
        debug_assert!(self.section(extent, values.clone()).is_ok());
        Ok(Section { extent, values })
    }

    /// Product sheaf: pointwise cartesian product with componentwise
    /// transitions. Its sections over `u` correspond to pairs of sections
    /// over `u`.
    pub fn product(&self, other: &Sheaf) -> Result<Sheaf, SheafError> {
        if self.base() != other.base() {
            return Err(SheafError::BaseMismatch);
        }
        let base = self.base().clone();
        let n = base.len();
        let mut stalks = Vec::with_capacity(n);
        for p in 0..n {
            let mut elems = Vec::new();
            for a in self.stalk(p) {
                for b in other.stalk(p) {
                    elems.push(StalkElem::Pair(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
            stalks.push(elems);
        }
        let mut trans = BTreeMap::new();
        for (i, j) in base.related_pairs() {
            if i == j {
                continue;
            }
            let w = other.stalk(i).len().max(1) as u32;
            let wj = other.stalk(j).len().max(1) as u32;
            let f: Vec<u32> = (0..stalks[i].len() as u32)
                .map(|k| {
                    let (a, b) = (k / w, k % w);
                    self.trans_apply(i, j, a) * wj + other.trans_apply(i, j, b)
                })
                .collect();
            trans.insert((i, j), f);
        }
        Sheaf::from_parts(base, stalks, trans)
    }

    /// Splits a section of a product sheaf into its two component sections.
    pub fn split_pair(&self, left: &Sheaf, right: &Sheaf, s: &Section) -> (Section, Section) {
        let n = self.base().len();
        let mut lv = vec![None; n];
        let mut rv = vec![None; n];
        for p in s.extent.iter() {
            let elem = &self.stalk(p)[s.values[p].unwrap() as usize];
            let (a, b) = elem.as_pair().expect("product stalk element");
            lv[p] = Some(left.stalk_index(p, a).expect("component in left stalk"));
            rv[p] = Some(right.stalk_index(p, b).expect("component in right stalk"));
        }
        (
            Section {
                extent: s.extent,
                values: lv,
            },
            Section {
                extent: s.extent,
                values: rv,
            },
        )
    }

    /// Builds the product section of two sections restricted to the common
    /// extent.
    pub fn pair_section(&self, left: &Sheaf, right: &Sheaf, a: &Section, b: &Section) -> Section {
        let extent = a.extent.intersect(b.extent);
        let n = self.base().len();
        let mut values = vec![None; n];
        for p in extent.iter() {
            let elem = StalkElem::Pair(
                Box::new(left.stalk(p)[a.values[p].unwrap() as usize].clone()),
                Box::new(right.stalk(p)[b.values[p].unwrap() as usize].clone()),
            );
            values[p] = Some(self.stalk_index(p, &elem).expect("pair in product stalk"));
        }
        Section { extent, values }
    }

    /// Restriction sheaf `M|U`: stalks vanish outside `u`. Its sections are
    /// exactly the sections of `M` with extent inside `u`.
    pub fn restriction_sheaf(&self, u: OpenSet) -> Result<Sheaf, SheafError> {
        self.base().check_open(u)?;
        let n = self.base().len();
        let stalks: Vec<Vec<StalkElem>> = (0..n)
            .map(|p| {
                if u.contains(p) {
                    self.stalk(p).to_vec()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let trans: BTreeMap<(usize, usize), Vec<u32>> = self
            .inner
            .trans
            .iter()
            .filter(|((i, _), _)| u.contains(*i))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Sheaf::from_parts(self.base().clone(), stalks, trans)
    }

    /// The sheaf `Omega1` of nested opens: the stalk at `alpha` consists of
    /// all opens inside `U_alpha`, restricted by intersection. Isomorphic to
    /// the sheaf of Sierpinski-space-valued continuous functions.
    pub fn omega1(base: Poset) -> Sheaf {
        let n = base.len();
        let opens = base.all_opens();
        let mut per_point: Vec<Vec<OpenSet>> = Vec::with_capacity(n);
        for p in 0..n {
            let ua = base.minimal_open(p);
            per_point.push(opens.iter().copied().filter(|v| v.is_subset(ua)).collect());
        }
        let stalks: Vec<Vec<StalkElem>> = per_point
            .iter()
            .map(|vs| vs.iter().map(|&v| StalkElem::Open(v)).collect())
            .collect();
        let mut trans = BTreeMap::new();
        for (i, j) in base.related_pairs() {
            if i == j {
                continue;
            }
            let uj = base.minimal_open(j);
            let f: Vec<u32> = per_point[i]
                .iter()
                .map(|&v| {
                    per_point[j]
                        .iter()
                        .position(|&w| w == v.intersect(uj))
                        .expect("restricted open in stalk") as u32
                })
                .collect();
            trans.insert((i, j), f);
        }
        Sheaf::from_parts(base, stalks, trans).expect("omega1 is functorial")
    }

    /// Function sheaf `N^M`: the stalk at `alpha` is the set of natural
    /// families on `U_alpha`, and transitions restrict families. Sections
    /// over `U` correspond to sheaf morphisms `M|U -> N|U`.
    pub fn function_sheaf(&self, cod: &Sheaf, caps: &Caps) -> Result<Sheaf, SheafError> {
        if self.base() != cod.base() {
            return Err(SheafError::BaseMismatch);
        }
        let base = self.base().clone();
        let n = base.len();
        let mut families: Vec<Vec<SheafMorphism>> = Vec::with_capacity(n);
        let mut work = 0usize;
        for p in 0..n {
            let fams = enumerate_natural_families(
                self,
                cod,
                base.minimal_open(p),
                caps.max_stalk,
                &mut work,
            )
            .map_err(|e| match e {
                SheafError::TooManySections(_) => SheafError::StalkCap {
                    point: base.name(p).to_string(),
                    count: caps.max_stalk + 1,
                    cap: caps.max_stalk,
                },
                other => other,
            })?;
            families.push(fams);
        }
        let stalks: Vec<Vec<StalkElem>> = families
            .iter()
            .map(|fams| {
                fams.iter()
                    .map(|f| StalkElem::Family(Arc::new(f.clone())))
                    .collect()
            })
            .collect();
        let mut trans = BTreeMap::new();
        for (i, j) in base.related_pairs() {
            if i == j {
                continue;
            }
            let uj = base.minimal_open(j);
            let f: Vec<u32> = families[i]
                .iter()
                .map(|fam| {
                    let restricted = fam.restrict(uj);
                    families[j]
                        .binary_search(&restricted)
                        .expect("restricted family in stalk") as u32
                })
                .collect();
            trans.insert((i, j), f);
        }
        Sheaf::from_parts(base, stalks, trans)
    }

    /// Power sheaf: the function sheaf into `Omega1`. Its global sections
    /// correspond bijectively to the subsheaves.
    pub fn power_sheaf(&self, caps: &Caps) -> Result<Sheaf, SheafError> {
        self.function_sheaf(&Sheaf::omega1(self.base().clone()), caps)
    }

    /// Extracts the sheaf-morphism view of a section of a function sheaf: the
    /// component at each point of the section's extent.
    pub fn morphism_of_section(&self, s: &Section) -> SheafMorphism {
        let mut components = BTreeMap::new();
        for p in s.extent.iter() {
            let fam = self.stalk(p)[s.values[p].unwrap() as usize]
                .as_family()
                .expect("function-sheaf stalk element");
            components.insert(p, fam.components[&p].clone());
        }
        SheafMorphism {
            domain: s.extent,
            components,
        }
    }

    /// Inverse of [`Sheaf::morphism_of_section`]: the section of the function
    /// sheaf determined by a morphism.
    pub fn section_of_morphism(&self, m: &SheafMorphism) -> Result<Section, SheafError> {
        let base = self.base();
        let n = base.len();
        let mut values = vec![None; n];
        for p in m.domain.iter() {
            let fam = m.restrict(base.minimal_open(p));
            let elem = StalkElem::Family(Arc::new(fam));
            values[p] =
                Some(
                    self.stalk_index(p, &elem)
                        .ok_or_else(|| SheafError::UnknownStalkElem {
                            point: base.name(p).to_string(),
                            elem: elem.render(base),
                        })?,
                );
        }
        self.section(m.domain, values)
    }

    /// All sheaf morphisms `M|u -> N|u`.
    pub fn morphisms_to(
        &self,
        cod: &Sheaf,
        u: OpenSet,
        cap: usize,
    ) -> Result<Vec<SheafMorphism>, SheafError> {
        if self.base() != cod.base() {
            return Err(SheafError::BaseMismatch);
        }
        let mut work = 0usize;
        enumerate_natural_families(self, cod, u, cap, &mut work)
    }

    /// Subfunctors: per-point stalk subsets closed under the transitions.
    /// These are exactly the subsheaves in the derived section view.
    pub fn subsheaves(&self, cap: usize) -> Result<Vec<Subsheaf>, SheafError> {
        let base = self.base();
        let n = base.len();
        let order = base.linear_extension(base.full());
        let mut out: Vec<Vec<u32>> = vec![vec![]];
        for (k, &p) in order.iter().enumerate() {
            if self.stalk(p).len() > 20 {
                return Err(SheafError::IsoTooLarge {
                    point: base.name(p).to_string(),
                    size: self.stalk(p).len(),
                    max: 20,
                });
            }
            let nsub = 1u32 << self.stalk(p).len();
            let mut next = Vec::new();
            for partial in &out {
                'subset: for sub in 0..nsub {
                    for (m, &q) in order.iter().enumerate().take(k) {
                        if base.leq(q, p) {
                            let chosen = partial[m];
                            for x in 0..self.stalk(q).len() {
                                if chosen & (1 << x) != 0 {
                                    let y = self.trans_apply(q, p, x as u32);
                                    if sub & (1 << y) == 0 {
                                        continue 'subset;
                                    }
                                }
                            }
                        }
                    }
                    let mut ext = partial.clone();
                    ext.push(sub);
                    next.push(ext);
                    if next.len() > cap {
                        return Err(SheafError::TooManySections(cap));
                    }
                }
            }
            out = next;
        }
        let mut subs: Vec<Subsheaf> = out
            .into_iter()
            .map(|choices| {
                let mut selected = vec![0u32; n];
                for (k, &p) in order.iter().enumerate() {
                    selected[p] = choices[k];
                }
                Subsheaf { selected }
            })
            .collect();
        subs.sort();
        Ok(subs)
    }

    /// The canonical global section of the power sheaf classifying a
    /// subsheaf: at each point, the family sending `x` to the open set of
    /// points above at which `x` lands in the subsheaf.
    pub fn classify_subsheaf(&self, power: &Sheaf, sub: &Subsheaf) -> Result<Section, SheafError> {
        let base = self.base();
        let omega = Sheaf::omega1(base.clone());
        let mut components = BTreeMap::new();
        for p in 0..base.len() {
            let up = base.minimal_open(p);
            let f: Vec<u32> = (0..self.stalk(p).len())
                .map(|x| {
                    let mut bits = 0u32;
                    for q in up.iter() {
                        let y = self.trans_apply(p, q, x as u32);
                        if sub.selected[q] & (1 << y) != 0 {
                            bits |= 1 << q;
                        }
                    }
                    omega
                        .stalk_index(p, &StalkElem::Open(OpenSet::from_names_unchecked(bits)))
                        .expect("open in omega1 stalk")
                })
                .collect();
            components.insert(p, f);
        }
        power.section_of_morphism(&SheafMorphism {
            domain: base.full(),
            components,
        })
    }

    /// Inverse direction of the subsheaf classification: reads the subsheaf
    /// off a global section of the power sheaf.
    pub fn subsheaf_of_classifier(&self, power: &Sheaf, s: &Section) -> Subsheaf {
        let base = self.base();
        let morphism = power.morphism_of_section(s);
        let omega = Sheaf::omega1(base.clone());
        let mut selected = vec![0u32; base.len()];
        for (p, slot) in selected.iter_mut().enumerate() {
            for x in 0..self.stalk(p).len() {
                let open = omega.stalk(p)[morphism.components[&p][x] as usize]
                    .as_open()
                    .expect("omega1 stalk element");
                if open.contains(p) {
                    *slot |= 1 << x;
                }
            }
        }
        Subsheaf { selected }
    }

    /// Searches for an isomorphism over the whole base; exhaustive, so a
    /// `None` answer is a proof of non-isomorphism at this scale.
    pub fn iso_check(&self, other: &Sheaf) -> Result<Option<SheafIso>, SheafError> {
        if self.base() != other.base() {
            return Err(SheafError::BaseMismatch);
        }
        let base = self.base();
        let n = base.len();
        for p in 0..n {
            if self.stalk(p).len() != other.stalk(p).len() {
                return Ok(None);
            }
            if self.stalk(p).len() > 9 {
                return Err(SheafError::IsoTooLarge {
                    point: base.name(p).to_string(),
                    size: self.stalk(p).len(),
                    max: 9,
                });
            }
        }
        let order = base.linear_extension(base.full());
        let mut chosen: Vec<Vec<u32>> = Vec::new();
        if search_iso(self, other, &order, &mut chosen) {
            let mut fwd = BTreeMap::new();
            let mut bwd = BTreeMap::new();
            for (k, &p) in order.iter().enumerate() {
                let f = chosen[k].clone();
                let mut g = vec![0u32; f.len()];
                for (x, &y) in f.iter().enumerate() {
                    g[y as usize] = x as u32;
                }
                fwd.insert(p, f);
                bwd.insert(p, g);
            }
            Ok(Some(SheafIso {
                forward: SheafMorphism {
                    domain: base.full(),
                    components: fwd,
                },
                backward: SheafMorphism {
                    domain: base.full(),
                    components: bwd,
                },
            }))
        } else {
            Ok(None)
        }
    }

    /// Rebases the sheaf onto the sub-poset induced by an open set; stalk
    /// elements carry over.
    pub fn rebase_to(&self, sub: &Poset, u: OpenSet) -> Result<Sheaf, SheafError> {
        let base = self.base();
        base.check_open(u)?;
        let mut stalks = vec![Vec::new(); sub.len()];
        for p in u.iter() {
            let sp = sub.index_of(base.name(p))?;
            stalks[sp] = self.stalk(p).to_vec();
        }
        let mut trans = BTreeMap::new();
        for p in u.iter() {
            for q in u.iter() {
                if p != q && base.leq(p, q) {
                    let sp = sub.index_of(base.name(p))?;
                    let sq = sub.index_of(base.name(q))?;
                    trans.insert((sp, sq), self.inner.trans[&(p, q)].clone());
                }
            }
        }
        Sheaf::from_parts(sub.clone(), stalks, trans)
    }
}

/// A subsheaf in subfunctor form: per-point bitmask of selected stalk
/// elements, closed under the transitions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Subsheaf {
    pub selected: Vec<u32>,
}

/// A two-sided isomorphism witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafIso {
    pub forward: SheafMorphism,
    pub backward: SheafMorphism,
}

fn search_iso(m: &Sheaf, n: &Sheaf, order: &[usize], chosen: &mut Vec<Vec<u32>>) -> bool {
    let k = chosen.len();
    if k == order.len() {
        return true;
    }
    let p = order[k];
    let size = m.stalk(p).len();
    let mut perm: Vec<u32> = (0..size as u32).collect();
    loop {
        let consistent = (0..k).all(|e| {
            let q = order[e];
            if !m.base().leq(q, p) {
                return true;
            }
            (0..m.stalk(q).len()).all(|x| {
                let lhs = perm[m.trans_apply(q, p, x as u32) as usize];
                let rhs = n.trans_apply(q, p, chosen[e][x]);
                lhs == rhs
            })
        });
        if consistent {
            chosen.push(perm.clone());
            if search_iso(m, n, order, chosen) {
                return true;
            }
            chosen.pop();
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [u32]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Enumerates natural families `dom|u -> cod|u`, sorted canonically.
fn enumerate_natural_families(
    dom: &Sheaf,
    cod: &Sheaf,
    u: OpenSet,
    cap: usize,
    work: &mut usize,
) -> Result<Vec<SheafMorphism>, SheafError> {
    let order = dom.base().linear_extension(u);
    let mut out: Vec<SheafMorphism> = Vec::new();
    let mut partial: Vec<Vec<u32>> = Vec::new();
    rec_families(dom, cod, u, &order, &mut partial, &mut out, cap, work)?;
    out.sort();
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn rec_families(
    dom: &Sheaf,
    cod: &Sheaf,
    u: OpenSet,
    order: &[usize],
    partial: &mut Vec<Vec<u32>>,
    out: &mut Vec<SheafMorphism>,
    cap: usize,
    work: &mut usize,
) -> Result<(), SheafError> {
    let k = partial.len();
    if k == order.len() {
        let components: BTreeMap<usize, Vec<u32>> = order
            .iter()
            .zip(partial.iter())
            .map(|(&p, f)| (p, f.clone()))
            .collect();
        out.push(SheafMorphism {
            domain: u,
            components,
        });
        if out.len() > cap {
            return Err(SheafError::TooManySections(cap));
        }
        return Ok(());
    }
    let p = order[k];
    let dsize = dom.stalk(p).len();
    let csize = cod.stalk(p).len();
    if dsize > 0 && csize == 0 {
        return Ok(()); // no function into an empty stalk
    }
    let mut f = vec![0u32; dsize];
    loop {
        *work += 1;
        if *work > WORK_BUDGET {
            return Err(SheafError::WorkBudget(WORK_BUDGET));
        }
        let consistent = (0..k).all(|e| {
            let q = order[e];
            if !dom.base().leq(q, p) {
                return true;
            }
            (0..dom.stalk(q).len()).all(|x| {
                f[dom.trans_apply(q, p, x as u32) as usize] == cod.trans_apply(q, p, partial[e][x])
            })
        });
        if consistent {
            partial.push(f.clone());
            rec_families(dom, cod, u, order, partial, out, cap, work)?;
            partial.pop();
        }
        // Odometer over functions stalk_dom(p) -> stalk_cod(p).
        let mut i = dsize;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            f[i] += 1;
            if (f[i] as usize) < csize {
                break;
            }
            f[i] = 0;
        }
    }
}

impl fmt::Display for Sheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sheaf over {} with stalks [", self.base())?;
        for p in 0..self.base().len() {
            if p > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.stalk(p).len())?;
        }
        write!(f, "]")
    }
}

/// Crate-internal constructor for data validated elsewhere.
pub(crate) fn section_from_raw(extent: OpenSet, values: Vec<Option<u32>>) -> Section {
    Section { extent, values }
}
