//! The truth-value assignment over a model, and the schema checkers built on
//! top of it.
//!
//! A model fixes a base poset, a sheaf for every ground sort (extended
//! canonically to compound sorts by product, function, and power sheaf
//! formation), named constant sections, and optionally a degree structure
//! for the reducibility atoms. Sentences get an open set of the base as
//! truth value: atomic clauses compare sections, connectives act through the
//! Heyting algebra of opens, and quantifiers range over all sections of the
//! sort's sheaf, including the empty section, whose `E`-guards make it
//! vacuous or neutral.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::caps::Caps;
use crate::lang::{Formula, Signature, Sort, SortError, Term};
use crate::muchnik::{muchnik_reals_sheaf, DegreeError, DegreeStructure, ValueSystem};
use crate::poset::{OpenSet, Poset, PosetError};
use crate::sheaf::{Section, Sheaf, SheafError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error("ground sort {0} has no sheaf in this model")]
    UnknownGround(String),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("constant {name}: {source}")]
    BadConstant {
        name: String,
        #[source]
        source: SheafError,
    },
    #[error("formula is not a sentence; free variables: {0:?}")]
    NotSentence(Vec<String>),
    #[error("quantifier over sort {sort} exceeds the cap: {source}")]
    QuantifierCap {
        sort: String,
        #[source]
        source: SheafError,
    },
    #[error("'<=T' used without a degree structure")]
    NoDegrees,
    #[error("schema template must not contain the variables {0:?}")]
    ReservedVars(Vec<String>),
}

/// Degree structure, value system, and optionally the designated ground
/// sort whose sheaf is the degree-bounded value sheaf. Models without a
/// designated sort can still drive the degree-lattice operations, but not
/// the `<=T` atoms.
#[derive(Debug, Clone)]
pub struct DegreeContext {
    pub ds: DegreeStructure,
    pub vs: ValueSystem,
    pub real_sort: Option<String>,
}

/// A sheaf model: the data the truth-value assignment runs against.
#[derive(Debug, Clone)]
pub struct Model {
    base: Poset,
    grounds: BTreeMap<String, Sheaf>,
    constants: BTreeMap<String, (Sort, Section)>,
    degrees: Option<DegreeContext>,
    caps: Caps,
    /// Short human-readable tag used in reports.
    pub label: String,
}

impl Model {
    /// Validated model construction. Ground sheaves must live over `base`;
    /// in Muchnik mode the base must be the degree poset and the designated
    /// real sort receives the degree-bounded value sheaf.
    pub fn new(
        base: Poset,
        mut grounds: BTreeMap<String, Sheaf>,
        constants: Vec<(String, Sort, Section)>,
        degrees: Option<(DegreeStructure, ValueSystem, Option<String>)>,
        caps: Caps,
    ) -> Result<Model, EvalError> {
        let degrees = match degrees {
            None => None,
            Some((ds, vs, real_sort)) => {
                if *ds.degrees() != base {
                    return Err(EvalError::Degree(DegreeError::BaseMismatch));
                }
                if let Some(real) = &real_sort {
                    let reals = muchnik_reals_sheaf(&ds, &vs)?;
                    grounds.insert(real.clone(), reals);
                }
                Some(DegreeContext { ds, vs, real_sort })
            }
        };
        for sheaf in grounds.values() {
            if sheaf.base() != &base {
                return Err(EvalError::Sheaf(SheafError::BaseMismatch));
            }
        }
        let mut model = Model {
            base,
            grounds,
            constants: BTreeMap::new(),
            degrees,
            caps,
            label: String::new(),
        };
        // Validate each constant section against its sort's derived sheaf.
        let mut checked = BTreeMap::new();
        {
            let mut ev = Evaluator::new(&model);
            for (name, sort, section) in constants {
                let sheaf = ev.sheaf_for_sort(&sort)?;
                sheaf
                    .section(
                        section.extent(),
                        (0..model.base.len()).map(|p| section.value_at(p)).collect(),
                    )
                    .map_err(|source| EvalError::BadConstant {
                        name: name.clone(),
                        source,
                    })?;
                checked.insert(name, (sort, section));
            }
        }
        model.constants = checked;
        Ok(model)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Model {
        self.label = label.into();
        self
    }

    pub fn base(&self) -> &Poset {
        &self.base
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn ground_sheaf(&self, name: &str) -> Option<&Sheaf> {
        self.grounds.get(name)
    }

    pub fn grounds(&self) -> &BTreeMap<String, Sheaf> {
        &self.grounds
    }

    pub fn constants(&self) -> &BTreeMap<String, (Sort, Section)> {
        &self.constants
    }

    pub fn constant(&self, name: &str) -> Option<&(Sort, Section)> {
        self.constants.get(name)
    }

    pub fn degree_context(&self) -> Option<&DegreeContext> {
        self.degrees.as_ref()
    }

    /// The checker signature induced by the model.
    pub fn signature(&self) -> Signature {
        Signature {
            grounds: self.grounds.keys().cloned().collect(),
            constants: self
                .constants
                .iter()
                .map(|(n, (s, _))| (n.clone(), s.clone()))
                .collect(),
            muchnik_sort: self.degrees.as_ref().and_then(|d| d.real_sort.clone()),
        }
    }

    /// The model over the sub-poset induced by an open set: ground sheaves
    /// rebased, constants restricted. Not available in Muchnik mode (the
    /// degree poset would lose its structure).
    pub fn restrict(&self, u: OpenSet) -> Result<Model, EvalError> {
        if self.degrees.is_some() {
            return Err(EvalError::NoDegrees);
        }
        let sub = self.base.restrict_to(u)?;
        let mut grounds = BTreeMap::new();
        for (name, sheaf) in &self.grounds {
            grounds.insert(name.clone(), sheaf.rebase_to(&sub, u)?);
        }
        let mut constants = Vec::new();
        for (name, (sort, section)) in &self.constants {
            let restricted = section.restrict(u);
            // Translate the section into the sub-poset index space.
            let mut values = vec![None; sub.len()];
            let mut extent_names = Vec::new();
            for p in restricted.extent().iter() {
                let sp = sub.index_of(self.base.name(p))?;
                values[sp] = restricted.value_at(p);
                extent_names.push(self.base.name(p).to_string());
            }
            let extent = sub.open_from_names(&extent_names)?;
            constants.push((
                name.clone(),
                sort.clone(),
                crate::sheaf::section_from_raw(extent, values),
            ));
        }
        Model::new(sub, grounds, constants, None, self.caps)
    }
}

/// The truth-value assignment. Holds per-model caches for derived sheaves
/// and their section enumerations; all results are deterministic.
pub struct Evaluator<'m> {
    model: &'m Model,
    sheaf_cache: BTreeMap<Sort, Sheaf>,
    sections_cache: BTreeMap<Sort, Vec<Section>>,
    sentence_cache: BTreeMap<Formula, OpenSet>,
}

type Env = Vec<(String, Sort, Section)>;

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Evaluator<'m> {
        Evaluator {
            model,
            sheaf_cache: BTreeMap::new(),
            sections_cache: BTreeMap::new(),
            sentence_cache: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// The sheaf interpreting a sort: ground sorts by assignment, compound
    /// sorts derived canonically.
    pub fn sheaf_for_sort(&mut self, sort: &Sort) -> Result<Sheaf, EvalError> {
        if let Some(s) = self.sheaf_cache.get(sort) {
            return Ok(s.clone());
        }
        let sheaf = match sort {
            Sort::Ground(g) => self
                .model
                .grounds
                .get(g)
                .cloned()
                .ok_or_else(|| EvalError::UnknownGround(g.clone()))?,
            Sort::Product(a, b) => {
                let sa = self.sheaf_for_sort(a)?;
                let sb = self.sheaf_for_sort(b)?;
                sa.product(&sb)?
            }
            Sort::Function(a, b) => {
                let sa = self.sheaf_for_sort(a)?;
                let sb = self.sheaf_for_sort(b)?;
                sa.function_sheaf(&sb, &self.model.caps)?
            }
            Sort::Power(a) => {
                let sa = self.sheaf_for_sort(a)?;
                sa.power_sheaf(&self.model.caps)?
            }
        };
        self.sheaf_cache.insert(sort.clone(), sheaf.clone());
        Ok(sheaf)
    }

    /// All sections of a sort's sheaf, cap-checked and cached.
    pub fn sections_for_sort(&mut self, sort: &Sort) -> Result<Vec<Section>, EvalError> {
        if let Some(s) = self.sections_cache.get(sort) {
            return Ok(s.clone());
        }
        let sheaf = self.sheaf_for_sort(sort)?;
        let sections = sheaf
            .all_sections(self.model.caps.max_quantifier_sections)
            .map_err(|source| EvalError::QuantifierCap {
                sort: sort.to_string(),
                source,
            })?;
        self.sections_cache.insert(sort.clone(), sections.clone());
        Ok(sections)
    }

    /// Evaluates a closed, checked term to its section (with its sort).
    pub fn eval_term(&mut self, t: &Term) -> Result<(Sort, Section), EvalError> {
        self.eval_term_in(t, &Vec::new())
    }

    fn eval_term_in(&mut self, t: &Term, env: &Env) -> Result<(Sort, Section), EvalError> {
        match t {
            Term::Var(x, _) => env
                .iter()
                .rev()
                .find(|(n, _, _)| n == x)
                .map(|(_, s, sec)| (s.clone(), sec.clone()))
                .ok_or_else(|| EvalError::NotSentence(vec![x.clone()])),
            Term::Const(c, _) => self
                .model
                .constants
                .get(c)
                .map(|(s, sec)| (s.clone(), sec.clone()))
                .ok_or_else(|| EvalError::UnknownConstant(c.clone())),
            Term::Pair(a, b) => {
                let (sa, seca) = self.eval_term_in(a, env)?;
                let (sb, secb) = self.eval_term_in(b, env)?;
                let sort = Sort::product(sa.clone(), sb.clone());
                let product = self.sheaf_for_sort(&sort)?;
                let left = self.sheaf_for_sort(&sa)?;
                let right = self.sheaf_for_sort(&sb)?;
                Ok((sort, product.pair_section(&left, &right, &seca, &secb)))
            }
            Term::Proj1(r) | Term::Proj2(r) => {
                let (sr, secr) = self.eval_term_in(r, env)?;
                let (sa, sb) = match &sr {
                    Sort::Product(a, b) => ((**a).clone(), (**b).clone()),
                    other => return Err(EvalError::Sort(SortError::ProjNotProduct(other.clone()))),
                };
                let product = self.sheaf_for_sort(&sr)?;
                let left = self.sheaf_for_sort(&sa)?;
                let right = self.sheaf_for_sort(&sb)?;
                let (pa, pb) = product.split_pair(&left, &right, &secr);
                Ok(if matches!(t, Term::Proj1(_)) {
                    (sa, pa)
                } else {
                    (sb, pb)
                })
            }
            Term::App(f, a) => {
                let (sf, secf) = self.eval_term_in(f, env)?;
                let (_, seca) = self.eval_term_in(a, env)?;
                let cod = match &sf {
                    Sort::Function(_, b) => (**b).clone(),
                    other => return Err(EvalError::Sort(SortError::AppNotFunction(other.clone()))),
                };
                let fsheaf = self.sheaf_for_sort(&sf)?;
                let phi = fsheaf.morphism_of_section(&secf);
                Ok((cod, phi.apply(&seca)))
            }
            Term::Hole(h) => Err(EvalError::Sort(SortError::Hole(h.clone()))),
        }
    }

    /// Sort-checks a formula against the model signature, requires it to be
    /// a sentence, and evaluates its truth value.
    pub fn eval_formula(&mut self, f: &Formula) -> Result<OpenSet, EvalError> {
        if let Some(v) = self.sentence_cache.get(f) {
            return Ok(*v);
        }
        let checked = self.model.signature().check_formula(f)?;
        let free: Vec<String> = checked.free_vars().into_iter().collect();
        if !free.is_empty() {
            return Err(EvalError::NotSentence(free));
        }
        let value = self.eval_in(&checked, &Vec::new())?;
        assert!(
            self.model.base.is_open(value),
            "evaluator produced a non-upward-closed truth value"
        );
        self.sentence_cache.insert(f.clone(), value);
        Ok(value)
    }

    /// Validity: the truth value is the whole base.
    pub fn models(&mut self, f: &Formula) -> Result<bool, EvalError> {
        Ok(self.eval_formula(f)? == self.model.base.full())
    }

    fn eval_in(&mut self, f: &Formula, env: &Env) -> Result<OpenSet, EvalError> {
        let base = self.model.base.clone();
        match f {
            Formula::Eq(r, s) => {
                let (_, a) = self.eval_term_in(r, env)?;
                let (_, b) = self.eval_term_in(s, env)?;
                Ok(section_agreement(&base, &a, &b))
            }
            Formula::Defined(t) => {
                let (_, a) = self.eval_term_in(t, env)?;
                Ok(a.extent())
            }
            Formula::Mem(s, t) => {
                let (_, a) = self.eval_term_in(s, env)?;
                let (st, sect) = self.eval_term_in(t, env)?;
                let inner = match &st {
                    Sort::Power(inner) => (**inner).clone(),
                    other => {
                        return Err(EvalError::Sort(SortError::MemMismatch {
                            left: other.clone(),
                            right: other.clone(),
                        }))
                    }
                };
                let power = self.sheaf_for_sort(&st)?;
                let _ = self.sheaf_for_sort(&inner)?;
                let omega = Sheaf::omega1(base.clone());
                let phi = power.morphism_of_section(&sect);
                let result = phi.apply(&a);
                let mut acc = OpenSet::EMPTY;
                for p in result.extent().iter() {
                    let open = omega.stalk(p)[result.value_at(p).unwrap() as usize]
                        .as_open()
                        .expect("omega1 stalk element");
                    acc = acc.union(open);
                }
                Ok(acc)
            }
            Formula::LeT(r, s) => {
                let (_, a) = self.eval_term_in(r, env)?;
                let (_, b) = self.eval_term_in(s, env)?;
                self.le_t_truth(&a, &b, None)
            }
            Formula::LeTPair(r, s, t) => {
                let (_, a) = self.eval_term_in(r, env)?;
                let (_, b) = self.eval_term_in(s, env)?;
                let (_, c) = self.eval_term_in(t, env)?;
                self.le_t_truth(&a, &b, Some(&c))
            }
            Formula::Not(g) => {
                let v = self.eval_in(g, env)?;
                Ok(base.neg(v))
            }
            Formula::And(a, b) => {
                let va = self.eval_in(a, env)?;
                let vb = self.eval_in(b, env)?;
                Ok(base.meet(va, vb))
            }
            Formula::Or(a, b) => {
                let va = self.eval_in(a, env)?;
                let vb = self.eval_in(b, env)?;
                Ok(base.join(va, vb))
            }
            Formula::Implies(a, b) => {
                let va = self.eval_in(a, env)?;
                let vb = self.eval_in(b, env)?;
                Ok(base.imp(va, vb))
            }
            Formula::Iff(a, b) => {
                let va = self.eval_in(a, env)?;
                let vb = self.eval_in(b, env)?;
                Ok(base.meet(base.imp(va, vb), base.imp(vb, va)))
            }
            Formula::Exists(x, sort, body) => {
                let sections = self.sections_for_sort(sort)?;
                let mut acc = OpenSet::EMPTY;
                let mut env2 = env.clone();
                for a in sections {
                    let extent = a.extent();
                    env2.push((x.clone(), sort.clone(), a));
                    let v = self.eval_in(body, &env2)?;
                    env2.pop();
                    acc = acc.union(extent.intersect(v));
                }
                Ok(acc)
            }
            Formula::Forall(x, sort, body) => {
                let sections = self.sections_for_sort(sort)?;
                // One interior after the finite intersection; equal to
                // intersecting the per-section implications because interior
                // distributes over intersections on Alexandrov spaces.
                let mut raw = base.full();
                #[cfg(debug_assertions)]
                let mut per_imp = base.full();
                let mut env2 = env.clone();
                for a in sections {
                    let extent = a.extent();
                    env2.push((x.clone(), sort.clone(), a));
                    let v = self.eval_in(body, &env2)?;
                    env2.pop();
                    raw = raw.intersect(base.complement(extent).union(v));
                    #[cfg(debug_assertions)]
                    {
                        per_imp = per_imp.intersect(base.imp(extent, v));
                    }
                }
                let value = base.interior(raw);
                #[cfg(debug_assertions)]
                debug_assert_eq!(value, base.interior(per_imp));
                Ok(value)
            }
            Formula::Hole(h, _) => Err(EvalError::Sort(SortError::Hole(h.clone()))),
        }
    }

    /// The reducibility atom: both sections nonempty and the left value's
    /// degree below the bound, in which case the truth value is the
    /// intersection of extents, otherwise empty. The three-argument form
    /// bounds by the supremum of the two right-hand degrees.
    fn le_t_truth(
        &mut self,
        a: &Section,
        b: &Section,
        c: Option<&Section>,
    ) -> Result<OpenSet, EvalError> {
        let ctx = self.model.degrees.as_ref().ok_or(EvalError::NoDegrees)?;
        let real = ctx.real_sort.as_ref().ok_or(EvalError::NoDegrees)?;
        let sheaf = self
            .model
            .grounds
            .get(real)
            .ok_or_else(|| EvalError::UnknownGround(real.clone()))?;
        let value_of = |s: &Section| -> Option<String> {
            let p = s.extent().iter().next()?;
            Some(
                sheaf.stalk(p)[s.value_at(p).unwrap() as usize]
                    .as_atom()
                    .expect("value stalk element")
                    .to_string(),
            )
        };
        let (Some(va), Some(vb)) = (value_of(a), value_of(b)) else {
            return Ok(OpenSet::EMPTY);
        };
        let mut extent = a.extent().intersect(b.extent());
        let da = ctx.vs.degree_of(&va).expect("value has a degree");
        let db = ctx.vs.degree_of(&vb).expect("value has a degree");
        let bound = match c {
            None => db,
            Some(csec) => {
                let Some(vc) = value_of(csec) else {
                    return Ok(OpenSet::EMPTY);
                };
                extent = extent.intersect(csec.extent());
                let dc = ctx.vs.degree_of(&vc).expect("value has a degree");
                ctx.ds
                    .degrees()
                    .binary_sup(db, dc)
                    .expect("degree poset has binary sups")
            }
        };
        if ctx.ds.degrees().leq(da, bound) {
            Ok(extent)
        } else {
            Ok(OpenSet::EMPTY)
        }
    }
}

/// The open set on which two sections of one sheaf agree: pointwise equality
/// on the intersection of extents, which is upward closed because sections
/// are matching families. Also computed as the union-of-opens clause as a
/// debug cross-check.
fn section_agreement(base: &Poset, a: &Section, b: &Section) -> OpenSet {
    let mut bits = 0u32;
    for p in a.extent().intersect(b.extent()).iter() {
        if a.value_at(p) == b.value_at(p) {
            bits |= 1 << p;
        }
    }
    let w = OpenSet::from_names_unchecked(bits);
    debug_assert!(base.is_open(w));
    #[cfg(debug_assertions)]
    {
        let mut union = OpenSet::EMPTY;
        for u in base.all_opens() {
            if u.is_subset(a.extent().intersect(b.extent())) && a.restrict(u) == b.restrict(u) {
                union = union.union(u);
            }
        }
        debug_assert_eq!(w, union);
    }
    w
}

// ---------------------------------------------------------------------------
// Schema construction and checking.
// ---------------------------------------------------------------------------

/// The checked schemas. `Ac`/`Gmp` are the poset-space principles; `Bp`,
/// `Acbp`, and `AcbpChoiceOnly` are the degree-bounded principles at the
/// designated real sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schema {
    Ac { sigma: Sort, tau: Sort },
    Gmp { sigma: Sort },
    Bp,
    Acbp,
    AcbpChoiceOnly,
}

impl Schema {
    pub fn name(&self) -> &'static str {
        match self {
            Schema::Ac { .. } => "AC",
            Schema::Gmp { .. } => "GMP",
            Schema::Bp => "BP",
            Schema::Acbp => "ACBP",
            Schema::AcbpChoiceOnly => "AC-real",
        }
    }
}

fn reserved_check(template: &Formula, reserved: &[&str]) -> Result<(), EvalError> {
    let free = template.free_vars();
    let bad: Vec<String> = reserved
        .iter()
        .filter(|r| free.contains(**r))
        .map(|r| r.to_string())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(EvalError::ReservedVars(bad))
    }
}

/// `(forall x exists y A(x,y)) => exists w forall x A(x, w x)`.
pub fn build_ac(sigma: &Sort, tau: &Sort, template: &Formula) -> Result<Formula, EvalError> {
    reserved_check(template, &["w"])?;
    let lhs = Formula::forall(
        "x",
        sigma.clone(),
        Formula::exists("y", tau.clone(), template.clone()),
    );
    let wx = Term::app(Term::var("w"), Term::var("x"));
    let rhs = Formula::exists(
        "w",
        Sort::function(sigma.clone(), tau.clone()),
        Formula::forall("x", sigma.clone(), template.substitute_var("y", &wx)),
    );
    Ok(Formula::implies(lhs, rhs))
}

/// `(forall x (A(x) \/ ~A(x)) /\ ~~exists x A(x)) => exists x A(x)`.
pub fn build_gmp(sigma: &Sort, template: &Formula) -> Result<Formula, EvalError> {
    let decidable = Formula::forall(
        "x",
        sigma.clone(),
        Formula::or(template.clone(), Formula::not(template.clone())),
    );
    let dn_exists = Formula::not(Formula::not(Formula::exists(
        "x",
        sigma.clone(),
        template.clone(),
    )));
    let concl = Formula::exists("x", sigma.clone(), template.clone());
    Ok(Formula::implies(Formula::and(decidable, dn_exists), concl))
}

/// `(forall x exists y A) => exists z forall x exists y (y <=T (x,z) /\ A)`.
pub fn build_bp(real: &Sort, template: &Formula) -> Result<Formula, EvalError> {
    reserved_check(template, &["z"])?;
    let lhs = Formula::forall(
        "x",
        real.clone(),
        Formula::exists("y", real.clone(), template.clone()),
    );
    let bound = Formula::LeTPair(Term::var("y"), Term::var("x"), Term::var("z"));
    let rhs = Formula::exists(
        "z",
        real.clone(),
        Formula::forall(
            "x",
            real.clone(),
            Formula::exists("y", real.clone(), Formula::and(bound, template.clone())),
        ),
    );
    Ok(Formula::implies(lhs, rhs))
}

/// `(forall x exists y A) => exists w exists z forall x (wx <=T (x,z) /\ A(x,wx))`.
pub fn build_acbp(real: &Sort, template: &Formula) -> Result<Formula, EvalError> {
    reserved_check(template, &["w", "z"])?;
    let lhs = Formula::forall(
        "x",
        real.clone(),
        Formula::exists("y", real.clone(), template.clone()),
    );
    let wx = Term::app(Term::var("w"), Term::var("x"));
    let bound = Formula::LeTPair(wx.clone(), Term::var("x"), Term::var("z"));
    let body = Formula::and(bound, template.substitute_var("y", &wx));
    let rhs = Formula::exists(
        "w",
        Sort::function(real.clone(), real.clone()),
        Formula::exists("z", real.clone(), Formula::forall("x", real.clone(), body)),
    );
    Ok(Formula::implies(lhs, rhs))
}

/// The bound-free variant: choice at the real sort.
pub fn build_acbp_choice_only(real: &Sort, template: &Formula) -> Result<Formula, EvalError> {
    build_ac(real, real, template)
}

/// Result of checking one schema instance.
#[derive(Debug, Clone)]
pub struct SchemaInstanceResult {
    pub schema: String,
    pub template: String,
    pub formula: Formula,
    pub lhs: OpenSet,
    pub rhs: OpenSet,
    pub truth: OpenSet,
    /// `lhs ⊆ rhs`, equivalently the implication is full-base.
    pub holds: bool,
}

/// Builds a schema instance from a template and evaluates it, reporting the
/// two sides and the implication truth value.
pub fn check_schema_instance(
    ev: &mut Evaluator<'_>,
    schema: &Schema,
    template: &Formula,
) -> Result<SchemaInstanceResult, EvalError> {
    let real = ev
        .model()
        .degree_context()
        .and_then(|c| c.real_sort.clone())
        .map(Sort::ground);
    let formula = match schema {
        Schema::Ac { sigma, tau } => build_ac(sigma, tau, template)?,
        Schema::Gmp { sigma } => build_gmp(sigma, template)?,
        Schema::Bp => build_bp(real.as_ref().ok_or(EvalError::NoDegrees)?, template)?,
        Schema::Acbp => build_acbp(real.as_ref().ok_or(EvalError::NoDegrees)?, template)?,
        Schema::AcbpChoiceOnly => {
            build_acbp_choice_only(real.as_ref().ok_or(EvalError::NoDegrees)?, template)?
        }
    };
    let (lhs_f, rhs_f) = match &formula {
        Formula::Implies(a, b) => ((**a).clone(), (**b).clone()),
        _ => unreachable!("schemas are implications"),
    };
    let lhs = ev.eval_formula(&lhs_f)?;
    let rhs = ev.eval_formula(&rhs_f)?;
    let truth = ev.eval_formula(&formula)?;
    let holds = lhs.is_subset(rhs) && truth == ev.model().base().full();
    Ok(SchemaInstanceResult {
        schema: schema.name().to_string(),
        template: template.to_string(),
        formula,
        lhs,
        rhs,
        truth,
        holds,
    })
}

/// The combined choice-and-bounding check: evaluates both sides of the
/// degree-bounded schema for a template with holes `x`, `y`.
pub struct AcbpOutcome {
    pub lhs: OpenSet,
    pub rhs: OpenSet,
    pub holds: bool,
}

pub fn acbp_check(ev: &mut Evaluator<'_>, template: &Formula) -> Result<AcbpOutcome, EvalError> {
    let r = check_schema_instance(ev, &Schema::Acbp, template)?;
    Ok(AcbpOutcome {
        lhs: r.lhs,
        rhs: r.rhs,
        holds: r.holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_formula;
    use crate::muchnik::DegreeStructure;
    use crate::sheaf::SheafMorphism;

    fn k2() -> Poset {
        Poset::new(&["bot", "top"], &[("bot", "top")]).unwrap()
    }

    fn vee() -> Poset {
        Poset::new(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).unwrap()
    }

    /// K2 base, sort s simple over {0,1}, constants: `a` defined only at the
    /// top, `zero`/`one` global.
    fn pem_model() -> Model {
        let base = k2();
        let s = Sheaf::simple(base.clone(), &["0", "1"]);
        let mut family = BTreeMap::new();
        family.insert("top".to_string(), "0".to_string());
        let a = s.section_from_names(&["top".to_string()], &family).unwrap();
        let zero = s.constant_section("0").unwrap();
        let one = s.constant_section("1").unwrap();
        let none = Section::empty(base.len());
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s);
        Model::new(
            base,
            grounds,
            vec![
                ("a".into(), Sort::ground("s"), a),
                ("zero".into(), Sort::ground("s"), zero),
                ("one".into(), Sort::ground("s"), one),
                ("nil".into(), Sort::ground("s"), none),
            ],
            None,
            Caps::default(),
        )
        .unwrap()
    }

    fn eval(m: &Model, text: &str) -> OpenSet {
        let f = parse_formula(text).unwrap();
        Evaluator::new(m).eval_formula(&f).unwrap()
    }

    fn names(m: &Model, u: OpenSet) -> Vec<String> {
        u.names(m.base())
    }

    #[test]
    fn pem_fixture_values() {
        let m = pem_model();
        assert_eq!(names(&m, eval(&m, "E a")), ["top"]);
        // The excluded-middle countermodel and its double negation.
        assert_eq!(names(&m, eval(&m, "E a \\/ ~ E a")), ["top"]);
        assert_eq!(eval(&m, "~ ~ (E a \\/ ~ E a)"), m.base().full());
        assert_eq!(eval(&m, "a = a <=> E a"), m.base().full());
        // Refutation is observable through `models`.
        let f = parse_formula("E a \\/ ~ E a").unwrap();
        assert!(!Evaluator::new(&m).models(&f).unwrap());
    }

    #[test]
    fn eval_term_examples() {
        let m = pem_model();
        let mut ev = Evaluator::new(&m);
        // A constant evaluates to its section.
        let (_, sec) = ev
            .eval_term(&Term::constant("a", Sort::ground("s")))
            .unwrap();
        assert_eq!(sec, m.constant("a").unwrap().1);

        // Pairing with the empty section gives an empty extent.
        let f = parse_formula("E <a, nil>").unwrap();
        assert!(Evaluator::new(&m).eval_formula(&f).unwrap().is_empty());

        // Pairing restricts both components to the common extent.
        assert_eq!(names(&m, eval(&m, "E <a, zero>")), ["top"]);

        // Disjoint nonempty extents on the V poset.
        let base = vee();
        let s = Sheaf::simple(base.clone(), &["0"]);
        let mut fb = BTreeMap::new();
        fb.insert("b".to_string(), "0".to_string());
        let sb = s.section_from_names(&["b".to_string()], &fb).unwrap();
        let mut fc = BTreeMap::new();
        fc.insert("c".to_string(), "0".to_string());
        let sc = s.section_from_names(&["c".to_string()], &fc).unwrap();
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s);
        let mv = Model::new(
            base,
            grounds,
            vec![
                ("pb".into(), Sort::ground("s"), sb),
                ("pc".into(), Sort::ground("s"), sc),
            ],
            None,
            Caps::default(),
        )
        .unwrap();
        assert!(eval(&mv, "E <pb, pc>").is_empty());
    }

    #[test]
    fn application_of_morphism_section() {
        // A model with a constant of function sort: the identity morphism.
        let base = k2();
        let s = Sheaf::simple(base.clone(), &["0", "1"]);
        let caps = Caps::default();
        let fsheaf = s.function_sheaf(&s, &caps).unwrap();
        let mut components = BTreeMap::new();
        for p in 0..base.len() {
            components.insert(p, vec![0, 1]);
        }
        let ident = fsheaf
            .section_of_morphism(&SheafMorphism {
                domain: base.full(),
                components,
            })
            .unwrap();
        let mut family = BTreeMap::new();
        family.insert("top".to_string(), "0".to_string());
        let a = s.section_from_names(&["top".to_string()], &family).unwrap();
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s);
        let m = Model::new(
            base,
            grounds,
            vec![
                (
                    "f".into(),
                    Sort::function(Sort::ground("s"), Sort::ground("s")),
                    ident,
                ),
                ("a".into(), Sort::ground("s"), a),
            ],
            None,
            Caps::default(),
        )
        .unwrap();
        // Applying the identity: f a = a everywhere a exists; extent E(a).
        assert_eq!(
            eval(&m, "f a = a"),
            m.base().open_from_names(&["top"]).unwrap()
        );
        assert_eq!(names(&m, eval(&m, "E (f a)")), ["top"]);
    }

    #[test]
    fn membership_via_classifier() {
        let m = pem_model();
        let s_sheaf = m.ground_sheaf("s").unwrap().clone();
        let power = s_sheaf.power_sheaf(m.caps()).unwrap();
        // The subsheaf selecting only the value 0 (index 0 at each point).
        let sub = crate::sheaf::Subsheaf {
            selected: vec![1, 1],
        };
        let classifier = s_sheaf.classify_subsheaf(&power, &sub).unwrap();
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s_sheaf);
        let m2 = Model::new(
            m.base().clone(),
            grounds,
            vec![
                (
                    "zero".into(),
                    Sort::ground("s"),
                    m.constant("zero").unwrap().1.clone(),
                ),
                (
                    "one".into(),
                    Sort::ground("s"),
                    m.constant("one").unwrap().1.clone(),
                ),
                ("S".into(), Sort::power(Sort::ground("s")), classifier),
            ],
            None,
            Caps::default(),
        )
        .unwrap();
        assert_eq!(eval(&m2, "zero in S"), m2.base().full());
        assert!(eval(&m2, "one in S").is_empty());
        // Membership interacts with quantifiers.
        assert_eq!(eval(&m2, "exists x:s. x in S"), m2.base().full());
    }

    #[test]
    fn quantifier_examples() {
        let m = pem_model();
        assert_eq!(eval(&m, "forall x:s. x = x"), m.base().full());
        assert_eq!(eval(&m, "exists x:s. E x"), m.base().full());
        assert_eq!(
            eval(&m, "exists x:s. x = a"),
            m.base().open_from_names(&["top"]).unwrap()
        );
        // Existential import fails for undefined terms.
        assert!(eval(&m, "exists x:s. ~ E x").is_empty());
    }

    #[test]
    fn substitution_theorem_instances() {
        let m = pem_model();
        // r = s implies A(r) <=> A(s), as a truth-value inclusion.
        for template in ["x = zero", "E x", "x = one /\\ E x", "~ E x"] {
            let a = parse_formula(template).unwrap();
            let ar = a.substitute_constant("x", "a", Sort::ground("s"));
            let as_ = a.substitute_constant("x", "zero", Sort::ground("s"));
            let mut ev = Evaluator::new(&m);
            let eq = ev
                .eval_formula(&parse_formula("a = zero").unwrap())
                .unwrap();
            let var = ev.eval_formula(&ar).unwrap();
            let vas = ev.eval_formula(&as_).unwrap();
            assert!(eq.intersect(var).is_subset(vas));
            let implication =
                Formula::implies(parse_formula("a = zero").unwrap(), Formula::iff(ar, as_));
            assert!(Evaluator::new(&m).models(&implication).unwrap());
        }
    }

    #[test]
    fn ac_and_gmp_examples() {
        // AC(s, t) with a simple source sheaf on K2.
        let base = k2();
        let s = Sheaf::simple(base.clone(), &["0", "1"]);
        let t = Sheaf::simple(base.clone(), &["x", "y"]);
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s.clone());
        grounds.insert("t".to_string(), t);
        let zero = s.constant_section("0").unwrap();
        let m = Model::new(
            base,
            grounds,
            vec![("c0".into(), Sort::ground("s"), zero)],
            None,
            Caps::default(),
        )
        .unwrap();
        let mut ev = Evaluator::new(&m);
        let template = parse_formula("E x /\\ E y").unwrap();
        let r = check_schema_instance(
            &mut ev,
            &Schema::Ac {
                sigma: Sort::ground("s"),
                tau: Sort::ground("t"),
            },
            &template,
        )
        .unwrap();
        assert!(r.holds);
        assert_eq!(r.truth, m.base().full());

        // GMP(s) with A(x) = (x = c0) on the 2-chain.
        let template = parse_formula("x = c0").unwrap();
        let r = check_schema_instance(
            &mut ev,
            &Schema::Gmp {
                sigma: Sort::ground("s"),
            },
            &template,
        )
        .unwrap();
        assert!(r.holds);
    }

    fn muchnik_model() -> Model {
        let ds = DegreeStructure::from_preorder(&["bot", "top"], &[("bot", "top")]).unwrap();
        let mut values = BTreeMap::new();
        values.insert("u".to_string(), "bot".to_string());
        values.insert("v".to_string(), "top".to_string());
        let vs = ValueSystem::new(&ds, &values).unwrap();
        let reals = muchnik_reals_sheaf(&ds, &vs).unwrap();
        let base = ds.degrees().clone();
        let uh = reals.constant_section("u").unwrap();
        let mut fam = BTreeMap::new();
        fam.insert("top".to_string(), "v".to_string());
        let vh = reals
            .section_from_names(&["top".to_string()], &fam)
            .unwrap();
        let nil = Section::empty(base.len());
        Model::new(
            base,
            BTreeMap::new(),
            vec![
                ("uh".into(), Sort::ground("r"), uh),
                ("vh".into(), Sort::ground("r"), vh),
                ("nil".into(), Sort::ground("r"), nil),
            ],
            Some((ds, vs, Some("r".to_string()))),
            Caps::default(),
        )
        .unwrap()
    }

    #[test]
    fn le_t_examples() {
        let m = muchnik_model();
        // Reflexivity on a nonempty section: the full extent.
        assert_eq!(eval(&m, "uh <=T uh"), m.base().full());
        // An empty section forces the empty truth value.
        assert!(eval(&m, "nil <=T uh").is_empty());
        assert!(eval(&m, "uh <=T nil").is_empty());
        // Bottom-degree value below top-degree value: intersection of extents.
        assert_eq!(names(&m, eval(&m, "uh <=T vh")), ["top"]);
        assert!(eval(&m, "vh <=T uh").is_empty());
        // Pair bound: sup(bot, top) = top.
        assert_eq!(names(&m, eval(&m, "vh <=T (uh, vh)")), ["top"]);
    }

    #[test]
    fn acbp_examples() {
        let m = muchnik_model();
        let mut ev = Evaluator::new(&m);
        let r = acbp_check(&mut ev, &parse_formula("E x /\\ E y").unwrap()).unwrap();
        assert_eq!(r.lhs, m.base().full());
        assert!(r.holds);

        // A template that empties the antecedent holds trivially.
        let r = acbp_check(&mut ev, &parse_formula("y = y /\\ ~ E x").unwrap()).unwrap();
        assert!(r.lhs.is_empty());
        assert!(r.holds);

        // The bound-free choice variant also holds.
        let r = check_schema_instance(
            &mut ev,
            &Schema::AcbpChoiceOnly,
            &parse_formula("E x /\\ E y").unwrap(),
        )
        .unwrap();
        assert!(r.holds);

        // Templates with reserved variables are rejected.
        assert!(matches!(
            acbp_check(&mut ev, &parse_formula("E w /\\ E y").unwrap()),
            Err(EvalError::ReservedVars(_))
        ));
    }

    #[test]
    fn locality_of_truth() {
        let base = vee();
        let s = Sheaf::simple(base.clone(), &["0", "1"]);
        let mut fam = BTreeMap::new();
        fam.insert("b".to_string(), "0".to_string());
        let part = s.section_from_names(&["b".to_string()], &fam).unwrap();
        let zero = s.constant_section("0").unwrap();
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s);
        let m = Model::new(
            base.clone(),
            grounds,
            vec![
                ("p".into(), Sort::ground("s"), part),
                ("zero".into(), Sort::ground("s"), zero),
            ],
            None,
            Caps::default(),
        )
        .unwrap();
        let sentences = [
            "E p \\/ ~ E p",
            "forall x:s. x = x",
            "exists x:s. x = p",
            "~ ~ E p",
            "p = zero => E p",
        ];
        for alpha in 0..base.len() {
            let ua = base.minimal_open(alpha);
            let restricted = m.restrict(ua).unwrap();
            for text in sentences {
                let global = eval(&m, text);
                let local = eval(&restricted, text);
                let expected: std::collections::BTreeSet<String> =
                    global.intersect(ua).names(&base).into_iter().collect();
                let got: std::collections::BTreeSet<String> =
                    local.names(restricted.base()).into_iter().collect();
                assert_eq!(expected, got, "locality failed for {text} at {alpha}");
            }
        }
    }

    #[test]
    fn determinism_and_caps() {
        let m = pem_model();
        let f = parse_formula("forall x:s. exists y:s. x = y").unwrap();
        let v1 = Evaluator::new(&m).eval_formula(&f).unwrap();
        let v2 = Evaluator::new(&m).eval_formula(&f).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(v1, m.base().full());

        // Quantifier cap: 5 sections of the simple sheaf exceed a cap of 2.
        let tiny = Caps {
            max_quantifier_sections: 2,
            ..Caps::default()
        };
        let base = k2();
        let s = Sheaf::simple(base.clone(), &["0", "1"]);
        let mut grounds = BTreeMap::new();
        grounds.insert("s".to_string(), s);
        let m2 = Model::new(base, grounds, vec![], None, tiny).unwrap();
        let err = Evaluator::new(&m2).eval_formula(&f).unwrap_err();
        assert!(matches!(err, EvalError::QuantifierCap { .. }));
    }
}
