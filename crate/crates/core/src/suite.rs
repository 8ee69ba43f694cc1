//! Test batteries: the validity corpus, schema sweeps, algebraic-law checks,
//! duality checks, sheaf-axiom checks, and the double-negation cross-check.
//! Suites run over an explicit model or over seeded generated families and
//! produce [`SuiteReport`]s with one record per instance.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::generate;
use crate::lang::{instantiate, parse_formula, Formula, HoleTemplate, Sort, Term};
use crate::modelfile::fixtures;
use crate::muchnik::DegreeStructure;
use crate::poset::{OpenSet, Poset};
use crate::report::{InstanceRecord, SuiteReport, Verdict};
use crate::semantics::{check_schema_instance, EvalError, Evaluator, Model, Schema};
use crate::sheaf::{compatible, Section, Sheaf};

/// Default validity battery, compiled in; `version 1`.
pub const IHOL_BATTERY: &str = include_str!("../suites/ihol.txt");
/// Default propositional corpus for the double-negation cross-check.
pub const GLIVENKO_CORPUS: &str = include_str!("../suites/glivenko.txt");

/// Choice-schema templates over holes `x` (source sort) and `y` (target sort).
pub const AC_TEMPLATES: [&str; 12] = [
    "E x /\\ E y",
    "y = y",
    "E y",
    "x = x /\\ y = y",
    "x = x => E y",
    "E x \\/ E y",
    "~ E x \\/ E y",
    "E x => E y",
    "~ ~ E y",
    "(E x /\\ E y) \\/ E y",
    "~ E x",
    "x = x <=> E y",
];

/// Markov-schema templates over the hole `x`; constant-mentioning templates
/// are added per model.
pub const GMP_TEMPLATES: [&str; 8] = [
    "E x",
    "x = x",
    "~ E x",
    "~ ~ E x",
    "E x \\/ ~ E x",
    "x = x /\\ E x",
    "~ E x => E x",
    "x = x \\/ E x",
];

/// Bounding-schema templates over holes `x`, `y` at the real sort.
pub const ACBP_TEMPLATES: [&str; 7] = [
    "E x /\\ E y",
    "y = y /\\ ~ E x",
    "y = y",
    "x <=T y",
    "y <=T x",
    "E y /\\ x = x",
    "x = y",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("battery parse error at line {line}: {msg}")]
    Battery { line: usize, msg: String },
    #[error("unknown suite {0}; expected one of ihol, ac-simple, gmp, acbp, heyting-laws, muchnik-duality, sheaf-axioms")]
    UnknownSuite(String),
    #[error("suite {0} needs a degree structure; use a Muchnik-mode model or --generate")]
    NeedsDegrees(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Ihol,
    AcSimple,
    Gmp,
    Acbp,
    HeytingLaws,
    MuchnikDuality,
    SheafAxioms,
}

impl std::str::FromStr for SuiteName {
    type Err = SuiteError;
    fn from_str(s: &str) -> Result<SuiteName, SuiteError> {
        Ok(match s {
            "ihol" => SuiteName::Ihol,
            "ac-simple" => SuiteName::AcSimple,
            "gmp" => SuiteName::Gmp,
            "acbp" => SuiteName::Acbp,
            "heyting-laws" => SuiteName::HeytingLaws,
            "muchnik-duality" => SuiteName::MuchnikDuality,
            "sheaf-axioms" => SuiteName::SheafAxioms,
            other => return Err(SuiteError::UnknownSuite(other.to_string())),
        })
    }
}

impl SuiteName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Ihol => "ihol",
            SuiteName::AcSimple => "ac-simple",
            SuiteName::Gmp => "gmp",
            SuiteName::Acbp => "acbp",
            SuiteName::HeytingLaws => "heyting-laws",
            SuiteName::MuchnikDuality => "muchnik-duality",
            SuiteName::SheafAxioms => "sheaf-axioms",
        }
    }
}

/// What a suite runs against.
pub enum SuiteSource {
    Model(Box<Model>),
    Generated { seed: u64, count: usize },
}

/// Default generated-family sizes per suite.
pub fn default_count(name: SuiteName) -> usize {
    match name {
        SuiteName::Ihol => 12,
        SuiteName::AcSimple => 12,
        SuiteName::Gmp => 12,
        SuiteName::Acbp => 2,
        SuiteName::HeytingLaws => 0, // exhaustive, not sampled
        SuiteName::MuchnikDuality => 50,
        SuiteName::SheafAxioms => 200,
    }
}

pub fn run_suite(
    name: SuiteName,
    source: SuiteSource,
    battery: Option<&str>,
) -> Result<SuiteReport, SuiteError> {
    match name {
        SuiteName::Ihol => {
            let (models, seed) = models_from(source);
            run_ihol(&models, seed, battery.unwrap_or(IHOL_BATTERY))
        }
        SuiteName::AcSimple => {
            let (models, seed) = models_from(source);
            Ok(run_ac_simple(&models, seed))
        }
        SuiteName::Gmp => {
            let (models, seed) = models_from(source);
            Ok(run_gmp(&models, seed))
        }
        SuiteName::Acbp => {
            let (models, seed) = match source {
                SuiteSource::Model(m) => (vec![*m], None),
                SuiteSource::Generated { seed, .. } => (
                    vec![fixtures::muchnik_k2(), fixtures::muchnik_chain3()],
                    Some(seed),
                ),
            };
            for m in &models {
                if m.degree_context()
                    .and_then(|c| c.real_sort.as_ref())
                    .is_none()
                {
                    return Err(SuiteError::NeedsDegrees("acbp".to_string()));
                }
            }
            Ok(run_acbp(&models, seed))
        }
        SuiteName::HeytingLaws => match source {
            SuiteSource::Model(m) => Ok(run_heyting(&[(m.label.clone(), m.base().clone())], None)),
            SuiteSource::Generated { seed, .. } => {
                let posets: Vec<(String, Poset)> = enumerate_posets_up_to(4)
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| (format!("poset-{i}"), p))
                    .collect();
                Ok(run_heyting(&posets, Some(seed)))
            }
        },
        SuiteName::MuchnikDuality => {
            let (structures, seed) = match source {
                SuiteSource::Model(m) => {
                    let ctx = m
                        .degree_context()
                        .ok_or_else(|| SuiteError::NeedsDegrees("muchnik-duality".to_string()))?;
                    (vec![("model".to_string(), ctx.ds.clone())], None)
                }
                SuiteSource::Generated { seed, count } => {
                    let mut rng = generate::rng_for(seed);
                    let list = (0..count)
                        .map(|i| {
                            (
                                format!("preorder-{i}"),
                                generate::random_degree_structure(&mut rng, 5),
                            )
                        })
                        .collect();
                    (list, Some(seed))
                }
            };
            Ok(run_duality(&structures, seed))
        }
        SuiteName::SheafAxioms => {
            let (sheaves, seed) = match source {
                SuiteSource::Model(m) => {
                    let list: Vec<(String, Sheaf)> = m
                        .grounds()
                        .iter()
                        .map(|(n, s)| (format!("sort-{n}"), s.clone()))
                        .collect();
                    (list, None)
                }
                SuiteSource::Generated { seed, count } => {
                    let mut rng = generate::rng_for(seed);
                    let list = (0..count)
                        .map(|i| {
                            let base = generate::random_poset(&mut rng, 4);
                            (
                                format!("sheaf-{i}"),
                                generate::random_sheaf(&mut rng, &base, 3),
                            )
                        })
                        .collect();
                    (list, Some(seed))
                }
            };
            Ok(run_sheaf_axioms(&sheaves, seed))
        }
    }
}

fn models_from(source: SuiteSource) -> (Vec<Model>, Option<u64>) {
    match source {
        SuiteSource::Model(m) => (vec![*m], None),
        SuiteSource::Generated { seed, count } => {
            (generate::generate_models(seed, count), Some(seed))
        }
    }
}

// ---------------------------------------------------------------------------
// Battery parsing and instantiation.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Valid,
    Classical,
}

#[derive(Debug, Clone)]
pub struct BatteryItem {
    pub name: String,
    pub expectation: Expectation,
    pub schema: Formula,
}

pub fn parse_battery(text: &str) -> Result<Vec<BatteryItem>, SuiteError> {
    let mut items = Vec::new();
    let mut saw_version = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_version {
            let rest = line.strip_prefix("version").ok_or(SuiteError::Battery {
                line: lineno + 1,
                msg: "expected a `version N` header".to_string(),
            })?;
            if rest.trim() != "1" {
                return Err(SuiteError::Battery {
                    line: lineno + 1,
                    msg: format!("unsupported battery version {}", rest.trim()),
                });
            }
            saw_version = true;
            continue;
        }
        let (kind, rest) = line.split_once(' ').ok_or(SuiteError::Battery {
            line: lineno + 1,
            msg: "expected `kind name: formula`".to_string(),
        })?;
        let expectation = match kind {
            "valid" | "taut" => Expectation::Valid,
            "classical" | "nontaut" => Expectation::Classical,
            other => {
                return Err(SuiteError::Battery {
                    line: lineno + 1,
                    msg: format!("unknown item kind {other}"),
                })
            }
        };
        let (name, formula_text) = rest.split_once(':').ok_or(SuiteError::Battery {
            line: lineno + 1,
            msg: "expected `name: formula`".to_string(),
        })?;
        let schema = parse_formula(formula_text.trim()).map_err(|e| SuiteError::Battery {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        items.push(BatteryItem {
            name: name.trim().to_string(),
            expectation,
            schema,
        });
    }
    Ok(items)
}

/// Term holes occurring in a formula.
fn term_holes(f: &Formula) -> Vec<String> {
    fn of_term(t: &Term, acc: &mut Vec<String>) {
        match t {
            Term::Hole(h) => {
                if !acc.contains(h) {
                    acc.push(h.clone());
                }
            }
            Term::Pair(a, b) | Term::App(a, b) => {
                of_term(a, acc);
                of_term(b, acc);
            }
            Term::Proj1(a) | Term::Proj2(a) => of_term(a, acc),
            Term::Var(_, _) | Term::Const(_, _) => {}
        }
    }
    fn walk(f: &Formula, acc: &mut Vec<String>) {
        match f {
            Formula::Eq(a, b) | Formula::Mem(a, b) | Formula::LeT(a, b) => {
                of_term(a, acc);
                of_term(b, acc);
            }
            Formula::LeTPair(a, b, c) => {
                of_term(a, acc);
                of_term(b, acc);
                of_term(c, acc);
            }
            Formula::Defined(t) => of_term(t, acc),
            Formula::Not(g) | Formula::Forall(_, _, g) | Formula::Exists(_, _, g) => walk(g, acc),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                walk(a, acc);
                walk(b, acc);
            }
            Formula::Hole(_, args) => {
                for t in args {
                    of_term(t, acc);
                }
            }
        }
    }
    let mut acc = Vec::new();
    walk(f, &mut acc);
    acc
}

/// Sort placeholders (`?s`-style ground names) in binder sorts.
fn sort_holes(f: &Formula) -> Vec<String> {
    fn of_sort(s: &Sort, acc: &mut Vec<String>) {
        match s {
            Sort::Ground(g) => {
                if g.starts_with('?') && !acc.contains(g) {
                    acc.push(g.clone());
                }
            }
            Sort::Product(a, b) | Sort::Function(a, b) => {
                of_sort(a, acc);
                of_sort(b, acc);
            }
            Sort::Power(a) => of_sort(a, acc),
        }
    }
    fn walk(f: &Formula, acc: &mut Vec<String>) {
        match f {
            Formula::Forall(_, s, g) | Formula::Exists(_, s, g) => {
                of_sort(s, acc);
                walk(g, acc);
            }
            Formula::Not(g) => walk(g, acc),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                walk(a, acc);
                walk(b, acc);
            }
            _ => {}
        }
    }
    let mut acc = Vec::new();
    walk(f, &mut acc);
    acc
}

/// Atomic sentences over the model's constants, for zero-arity holes.
fn sentence_pool(model: &Model) -> Vec<Formula> {
    let mut pool = Vec::new();
    for (name, (sort, _)) in model.constants().iter().take(4) {
        pool.push(Formula::Defined(Term::constant(name, sort.clone())));
    }
    let consts: Vec<(&String, &Sort)> =
        model.constants().iter().map(|(n, (s, _))| (n, s)).collect();
    'outer: for (i, (n1, s1)) in consts.iter().enumerate() {
        for (n2, s2) in consts.iter().skip(i + 1) {
            if s1 == s2 {
                pool.push(Formula::Eq(
                    Term::constant(*n1, (*s1).clone()),
                    Term::constant(*n2, (*s2).clone()),
                ));
                break 'outer;
            }
        }
    }
    if pool.is_empty() {
        // Constant-free fallback so prop schemas still instantiate.
        if let Some(g) = model.grounds().keys().next() {
            let s = Sort::ground(g.clone());
            pool.push(Formula::exists("q", s, Formula::Defined(Term::var("q"))));
        }
    }
    pool
}

/// Unary templates over the parameter `x` of the given sort.
fn unary_pool(model: &Model, sigma: &Sort) -> Vec<HoleTemplate> {
    let mut bodies = vec![
        Formula::Defined(Term::var("x")),
        Formula::Eq(Term::var("x"), Term::var("x")),
    ];
    if let Some((name, (sort, _))) = model.constants().iter().find(|(_, (s, _))| s == sigma) {
        bodies.push(Formula::Eq(
            Term::var("x"),
            Term::constant(name, sort.clone()),
        ));
        bodies.push(Formula::and(
            Formula::Defined(Term::var("x")),
            Formula::Defined(Term::constant(name, sort.clone())),
        ));
    }
    bodies
        .into_iter()
        .map(|body| HoleTemplate {
            params: vec!["x".to_string()],
            body,
        })
        .collect()
}

/// Instantiates one battery schema on one model: a bounded, deterministic
/// sweep over sort assignments, term-hole constants, and hole templates.
fn instantiate_item(model: &Model, schema: &Formula) -> Vec<Formula> {
    let grounds: Vec<String> = model.grounds().keys().cloned().collect();
    if grounds.is_empty() {
        return Vec::new();
    }
    let sholes = sort_holes(schema);
    let tholes = term_holes(schema);
    let fholes = schema.holes();

    let mut sort_contexts: Vec<(BTreeMap<String, Sort>, Sort)> = Vec::new();
    let rotations = grounds.len().min(2);
    for base_idx in 0..rotations {
        let mut map = BTreeMap::new();
        for (k, sh) in sholes.iter().enumerate() {
            map.insert(
                sh.clone(),
                Sort::ground(grounds[(base_idx + k) % grounds.len()].clone()),
            );
        }
        let primary = match sholes.first() {
            Some(sh) => map[sh].clone(),
            None => Sort::ground(grounds[base_idx].clone()),
        };
        sort_contexts.push((map, primary));
        if sholes.is_empty() && tholes.is_empty() && fholes.values().all(|&a| a == 0) {
            break; // purely propositional: one context suffices
        }
    }

    let mut out = Vec::new();
    for (sort_map, primary) in sort_contexts {
        let schema = schema.substitute_sorts(&sort_map);
        // Constants of the primary sort drive the term holes.
        let consts: Vec<(String, Sort)> = model
            .constants()
            .iter()
            .filter(|(_, (s, _))| *s == primary)
            .map(|(n, (s, _))| (n.clone(), s.clone()))
            .collect();
        if !tholes.is_empty() && consts.is_empty() {
            continue;
        }
        let term_rotations = if tholes.is_empty() {
            1
        } else {
            consts.len().min(2)
        };
        let pool0 = sentence_pool(model);
        let pool1 = unary_pool(model, &primary);
        let fh_rotations = if fholes.is_empty() {
            1
        } else if fholes.values().all(|&a| a == 0) {
            pool0.len().min(3)
        } else {
            pool1.len().min(2)
        };
        for tr in 0..term_rotations {
            let mut term_map = BTreeMap::new();
            for (k, th) in tholes.iter().enumerate() {
                let (name, sort) = &consts[(tr + k) % consts.len()];
                term_map.insert(th.clone(), Term::constant(name, sort.clone()));
            }
            for fr in 0..fh_rotations {
                let mut formula_map = BTreeMap::new();
                for (k, (name, arity)) in fholes.iter().enumerate() {
                    if *arity == 0 {
                        if pool0.is_empty() {
                            continue;
                        }
                        formula_map.insert(
                            name.clone(),
                            HoleTemplate {
                                params: vec![],
                                body: pool0[(fr + k) % pool0.len()].clone(),
                            },
                        );
                    } else {
                        formula_map.insert(name.clone(), pool1[(fr + k) % pool1.len()].clone());
                    }
                }
                if formula_map.len() != fholes.len() {
                    continue;
                }
                if let Ok(inst) = instantiate(&schema, &formula_map, &term_map) {
                    if !out.contains(&inst) {
                        out.push(inst);
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Suite runners.
// ---------------------------------------------------------------------------

fn record_eval(
    ev: &mut Evaluator<'_>,
    label: &str,
    schema_name: &str,
    expectation: &Expectation,
    instance: &Formula,
) -> InstanceRecord {
    let base = ev.model().base().clone();
    match ev.eval_formula(instance) {
        Ok(value) => {
            let valid = value == base.full();
            let verdict = match (expectation, valid) {
                (Expectation::Valid, true) => Verdict::Pass,
                (Expectation::Valid, false) => Verdict::Fail,
                (Expectation::Classical, false) => Verdict::Countermodel,
                (Expectation::Classical, true) => Verdict::HoldsHere,
            };
            InstanceRecord {
                schema: schema_name.to_string(),
                instance: instance.to_string(),
                model: label.to_string(),
                truth_value: Some(value.names(&base)),
                verdict,
                detail: None,
            }
        }
        Err(EvalError::QuantifierCap { sort, source }) => InstanceRecord {
            schema: schema_name.to_string(),
            instance: instance.to_string(),
            model: label.to_string(),
            truth_value: None,
            verdict: Verdict::CapSkipped,
            detail: Some(format!("quantifier over {sort}: {source}")),
        },
        Err(e) => InstanceRecord {
            schema: schema_name.to_string(),
            instance: instance.to_string(),
            model: label.to_string(),
            truth_value: None,
            verdict: Verdict::Error,
            detail: Some(e.to_string()),
        },
    }
}

pub fn run_ihol(
    models: &[Model],
    seed: Option<u64>,
    battery: &str,
) -> Result<SuiteReport, SuiteError> {
    let items = parse_battery(battery)?;
    let caps = models.first().map(|m| *m.caps()).unwrap_or_default();
    let mut records = Vec::new();
    for model in models {
        let mut ev = Evaluator::new(model);
        for item in &items {
            for instance in instantiate_item(model, &item.schema) {
                records.push(record_eval(
                    &mut ev,
                    &model.label,
                    &item.name,
                    &item.expectation,
                    &instance,
                ));
            }
        }
    }
    Ok(SuiteReport {
        suite: "ihol".to_string(),
        seed,
        caps,
        models: models.len(),
        items: records,
    })
}

fn schema_sweep(
    models: &[Model],
    seed: Option<u64>,
    suite: &str,
    plans: impl Fn(&Model) -> Vec<(Schema, Formula)>,
) -> SuiteReport {
    let caps = models.first().map(|m| *m.caps()).unwrap_or_default();
    let mut records = Vec::new();
    for model in models {
        let mut ev = Evaluator::new(model);
        for (schema, template) in plans(model) {
            let name = schema.name().to_string();
            match check_schema_instance(&mut ev, &schema, &template) {
                Ok(result) => {
                    let verdict = if result.holds {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    };
                    records.push(InstanceRecord {
                        schema: format!("{name}{}", schema_sorts_suffix(&schema)),
                        instance: template.to_string(),
                        model: model.label.clone(),
                        truth_value: Some(result.truth.names(model.base())),
                        verdict,
                        detail: None,
                    });
                }
                Err(EvalError::QuantifierCap { sort, source }) => {
                    records.push(InstanceRecord {
                        schema: name,
                        instance: template.to_string(),
                        model: model.label.clone(),
                        truth_value: None,
                        verdict: Verdict::CapSkipped,
                        detail: Some(format!("quantifier over {sort}: {source}")),
                    });
                }
                Err(e) => {
                    records.push(InstanceRecord {
                        schema: name,
                        instance: template.to_string(),
                        model: model.label.clone(),
                        truth_value: None,
                        verdict: Verdict::Error,
                        detail: Some(e.to_string()),
                    });
                }
            }
        }
    }
    SuiteReport {
        suite: suite.to_string(),
        seed,
        caps,
        models: models.len(),
        items: records,
    }
}

fn schema_sorts_suffix(schema: &Schema) -> String {
    match schema {
        Schema::Ac { sigma, tau } => format!("({sigma},{tau})"),
        Schema::Gmp { sigma } => format!("({sigma})"),
        _ => String::new(),
    }
}

pub fn run_ac_simple(models: &[Model], seed: Option<u64>) -> SuiteReport {
    schema_sweep(models, seed, "ac-simple", |model| {
        let grounds: Vec<String> = model.grounds().keys().cloned().collect();
        let mut plans = Vec::new();
        for (i, g) in grounds.iter().enumerate() {
            let sigma = Sort::ground(g.clone());
            let tau = Sort::ground(grounds[(i + 1) % grounds.len()].clone());
            for t in AC_TEMPLATES {
                plans.push((
                    Schema::Ac {
                        sigma: sigma.clone(),
                        tau: tau.clone(),
                    },
                    parse_formula(t).expect("template parses"),
                ));
            }
        }
        plans
    })
}

pub fn run_gmp(models: &[Model], seed: Option<u64>) -> SuiteReport {
    schema_sweep(models, seed, "gmp", |model| {
        let mut plans = Vec::new();
        for g in model.grounds().keys() {
            let sigma = Sort::ground(g.clone());
            let mut templates: Vec<Formula> = GMP_TEMPLATES
                .iter()
                .map(|t| parse_formula(t).expect("template parses"))
                .collect();
            for (name, (sort, _)) in model.constants() {
                if *sort == sigma && templates.len() < GMP_TEMPLATES.len() + 3 {
                    let c = Term::constant(name, sort.clone());
                    templates.push(Formula::Eq(Term::var("x"), c.clone()));
                    templates.push(Formula::or(
                        Formula::Eq(Term::var("x"), c.clone()),
                        Formula::not(Formula::Defined(Term::var("x"))),
                    ));
                }
            }
            for t in templates {
                plans.push((
                    Schema::Gmp {
                        sigma: sigma.clone(),
                    },
                    t,
                ));
            }
        }
        plans
    })
}

pub fn run_acbp(models: &[Model], seed: Option<u64>) -> SuiteReport {
    schema_sweep(models, seed, "acbp", |_model| {
        let mut plans = Vec::new();
        for t in ACBP_TEMPLATES {
            let template = parse_formula(t).expect("template parses");
            plans.push((Schema::Acbp, template.clone()));
            plans.push((Schema::Bp, template.clone()));
            plans.push((Schema::AcbpChoiceOnly, template));
        }
        plans
    })
}

// ---------------------------------------------------------------------------
// Heyting laws.
// ---------------------------------------------------------------------------

fn law_record(name: &str, label: &str, detail: String, ok: bool) -> InstanceRecord {
    InstanceRecord {
        schema: name.to_string(),
        instance: detail,
        model: label.to_string(),
        truth_value: None,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail: None,
    }
}

pub fn run_heyting(posets: &[(String, Poset)], seed: Option<u64>) -> SuiteReport {
    let mut records = Vec::new();
    for (label, p) in posets {
        let opens = p.all_opens();
        let mut adjunction = true;
        let mut distributive = true;
        let mut imp_identity = true;
        let mut extremes = true;
        let mut interior_laws = true;
        for &u in &opens {
            if p.imp(u, u) != p.full() {
                imp_identity = false;
            }
            for &v in &opens {
                let i = p.imp(u, v);
                for &w in &opens {
                    if w.intersect(u).is_subset(v) != w.is_subset(i) {
                        adjunction = false;
                    }
                    if u.intersect(v.union(w)) != u.intersect(v).union(u.intersect(w)) {
                        distributive = false;
                    }
                    if u.union(v.intersect(w)) != u.union(v).intersect(u.union(w)) {
                        distributive = false;
                    }
                }
            }
        }
        if p.neg(p.full()) != OpenSet::EMPTY || p.neg(OpenSet::EMPTY) != p.full() {
            extremes = false;
        }
        // Interior: monotone, idempotent, deflationary, distributes over
        // finite intersections, fixes opens.
        let n = p.len();
        for s_bits in 0u32..(1 << n) {
            let s = OpenSet::from_names_unchecked(s_bits);
            let is = p.interior(s);
            if !is.is_subset(s) || p.interior(is) != is || (p.is_open(s) && is != s) {
                interior_laws = false;
            }
            for t_bits in 0u32..(1 << n) {
                let t = OpenSet::from_names_unchecked(t_bits);
                if p.interior(s.intersect(t)) != p.interior(s).intersect(p.interior(t)) {
                    interior_laws = false;
                }
                if s.is_subset(t) && !p.interior(s).is_subset(p.interior(t)) {
                    interior_laws = false;
                }
            }
        }
        let detail = format!("{p} ({} opens)", opens.len());
        records.push(law_record("residuation", label, detail.clone(), adjunction));
        records.push(law_record(
            "distributivity",
            label,
            detail.clone(),
            distributive,
        ));
        records.push(law_record(
            "imp-identity",
            label,
            detail.clone(),
            imp_identity,
        ));
        records.push(law_record("neg-extremes", label, detail.clone(), extremes));
        records.push(law_record("interior-laws", label, detail, interior_laws));
    }
    SuiteReport {
        suite: "heyting-laws".to_string(),
        seed,
        caps: crate::caps::Caps::default(),
        models: posets.len(),
        items: records,
    }
}

/// All posets on 1..=n labeled points (antisymmetric transitive reflexive
/// relations), built from closures of acyclic edge sets.
pub fn enumerate_posets_up_to(n: usize) -> Vec<Poset> {
    let mut out = Vec::new();
    for size in 1..=n {
        let names: Vec<String> = (0..size).map(|i| format!("p{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .collect();
        let m = pairs.len();
        'rel: for mask in 0u32..(1 << m) {
            // Build the relation and check transitivity and antisymmetry.
            let mut leq = vec![vec![false; size]; size];
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    leq[i][j] = true;
                }
            }
            for (i, row) in leq.iter().enumerate() {
                for (j, &ij) in row.iter().enumerate() {
                    if ij && leq[j][i] {
                        continue 'rel; // antisymmetry
                    }
                    if ij {
                        for (k, &jk) in leq[j].iter().enumerate() {
                            if jk && !leq[i][k] {
                                continue 'rel; // transitivity
                            }
                        }
                    }
                }
            }
            let edge_list: Vec<(String, String)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &(i, j))| (names[i].clone(), names[j].clone()))
                .collect();
            out.push(Poset::new(&names, &edge_list).expect("validated relation"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Muchnik duality.
// ---------------------------------------------------------------------------

pub fn run_duality(structures: &[(String, DegreeStructure)], seed: Option<u64>) -> SuiteReport {
    let mut records = Vec::new();
    for (label, ds) in structures {
        let problems = ds.all_mass_problems();
        let wdegs = ds.all_weak_degrees();

        // Bijection between up-sets and weak degrees, with order reversal
        // against the raw mass-problem order.
        let mut bijection = true;
        for u in ds.degrees().all_opens() {
            if ds.psi_inv(ds.problem_of_upset(u)) != u {
                bijection = false;
            }
        }
        let mut reversal = true;
        for &p in &problems {
            for &q in &problems {
                if ds.weak_reduces(p, q) != ds.psi_inv(q).is_subset(ds.psi_inv(p)) {
                    reversal = false;
                }
            }
        }

        // Binary lattice formulas against brute-force bounds.
        let mut formulas = true;
        for &a in &wdegs {
            for &b in &wdegs {
                let sup = ds.wdeg_sup(a, b);
                let inf = ds.wdeg_inf(a, b);
                if Some(sup) != brute_sup(ds, &wdegs, a, b) {
                    formulas = false;
                }
                if Some(inf) != brute_inf(ds, &wdegs, a, b) {
                    formulas = false;
                }
            }
        }
        // Top and bottom.
        if ds.top_degree() != ds.weak_degree(crate::muchnik::MassProblem::EMPTY) {
            formulas = false;
        }
        let all_oracles: Vec<&str> = ds.oracles().iter().map(|s| s.as_str()).collect();
        if ds.bottom_degree() != ds.weak_degree(ds.problem_from_names(&all_oracles).unwrap()) {
            formulas = false;
        }

        // Implication: enumeration route equals the Heyting route.
        let mut imp_agreement = true;
        for &a in &wdegs {
            for &b in &wdegs {
                if ds.wdeg_imp(a, b) != ds.wdeg_imp_brute(a, b) {
                    imp_agreement = false;
                }
            }
        }

        // Arbitrary joins/meets on all triples.
        let mut complete_ops = true;
        for &a in &wdegs {
            for &b in &wdegs {
                for &c in &wdegs {
                    let fam = [a, b, c];
                    let sup = ds.wdeg_sup_all(&fam);
                    let inf = ds.wdeg_inf_all(&fam);
                    if fam.iter().any(|d| !ds.wdeg_leq(*d, sup))
                        || fam.iter().any(|d| !ds.wdeg_leq(inf, *d))
                    {
                        complete_ops = false;
                    }
                    for &d in &wdegs {
                        if fam.iter().all(|x| ds.wdeg_leq(*x, d)) && !ds.wdeg_leq(sup, d) {
                            complete_ops = false;
                        }
                        if fam.iter().all(|x| ds.wdeg_leq(d, *x)) && !ds.wdeg_leq(d, inf) {
                            complete_ops = false;
                        }
                    }
                }
            }
        }

        let detail = format!(
            "{} oracles, {} degrees, {} weak degrees",
            ds.oracles().len(),
            ds.degrees().len(),
            wdegs.len()
        );
        records.push(law_record(
            "psi-bijection",
            label,
            detail.clone(),
            bijection,
        ));
        records.push(law_record(
            "psi-order-reversal",
            label,
            detail.clone(),
            reversal,
        ));
        records.push(law_record(
            "lattice-formulas",
            label,
            detail.clone(),
            formulas,
        ));
        records.push(law_record(
            "imp-agreement",
            label,
            detail.clone(),
            imp_agreement,
        ));
        records.push(law_record("complete-lattice", label, detail, complete_ops));
    }
    SuiteReport {
        suite: "muchnik-duality".to_string(),
        seed,
        caps: crate::caps::Caps::default(),
        models: structures.len(),
        items: records,
    }
}

fn brute_sup(
    ds: &DegreeStructure,
    all: &[crate::muchnik::WeakDegree],
    a: crate::muchnik::WeakDegree,
    b: crate::muchnik::WeakDegree,
) -> Option<crate::muchnik::WeakDegree> {
    let uppers: Vec<_> = all
        .iter()
        .copied()
        .filter(|&c| ds.wdeg_leq(a, c) && ds.wdeg_leq(b, c))
        .collect();
    uppers
        .iter()
        .copied()
        .find(|&c| uppers.iter().all(|&d| ds.wdeg_leq(c, d)))
}

fn brute_inf(
    ds: &DegreeStructure,
    all: &[crate::muchnik::WeakDegree],
    a: crate::muchnik::WeakDegree,
    b: crate::muchnik::WeakDegree,
) -> Option<crate::muchnik::WeakDegree> {
    let lowers: Vec<_> = all
        .iter()
        .copied()
        .filter(|&c| ds.wdeg_leq(c, a) && ds.wdeg_leq(c, b))
        .collect();
    lowers
        .iter()
        .copied()
        .find(|&c| lowers.iter().all(|&d| ds.wdeg_leq(d, c)))
}

// ---------------------------------------------------------------------------
// Sheaf axioms.
// ---------------------------------------------------------------------------

/// At most this many sections enter the quadratic axiom checks; beyond it, a
/// deterministic stride subsample is used.
const AXIOM_SAMPLE: usize = 60;

fn sample<T: Clone>(items: &[T], cap: usize) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let stride = items.len().div_ceil(cap);
    items.iter().step_by(stride).cloned().collect()
}

pub fn run_sheaf_axioms(sheaves: &[(String, Sheaf)], seed: Option<u64>) -> SuiteReport {
    let mut records = Vec::new();
    for (label, sheaf) in sheaves {
        match check_sheaf_axioms(sheaf) {
            Ok(checks) => {
                for (name, ok) in checks {
                    records.push(law_record(name, label, sheaf.to_string(), ok));
                }
            }
            Err(e) => {
                records.push(InstanceRecord {
                    schema: "sheaf-axioms".to_string(),
                    instance: sheaf.to_string(),
                    model: label.clone(),
                    truth_value: None,
                    verdict: Verdict::CapSkipped,
                    detail: Some(e.to_string()),
                });
            }
        }
    }
    SuiteReport {
        suite: "sheaf-axioms".to_string(),
        seed,
        caps: crate::caps::Caps::default(),
        models: sheaves.len(),
        items: records,
    }
}

/// The extent/restriction axioms and the section-order lemmas, checked on
/// the derived sections of a sheaf.
pub fn check_sheaf_axioms(
    sheaf: &Sheaf,
) -> Result<Vec<(&'static str, bool)>, crate::sheaf::SheafError> {
    let base = sheaf.base();
    let all = sheaf.all_sections(100_000)?;
    let opens = base.all_opens();
    let secs = sample(&all, AXIOM_SAMPLE);
    let mut restriction_axioms = true;
    for a in &secs {
        if a.restrict(a.extent()) != *a {
            restriction_axioms = false;
        }
        for &u in &opens {
            let r = a.restrict(u);
            if r.extent() != a.extent().intersect(u) {
                restriction_axioms = false;
            }
            if sheaf
                .section(r.extent(), (0..base.len()).map(|p| r.value_at(p)).collect())
                .is_err()
            {
                restriction_axioms = false;
            }
            for &v in &opens {
                if a.restrict(u).restrict(v) != a.restrict(u.intersect(v)) {
                    restriction_axioms = false;
                }
            }
        }
    }

    // The section order is a partial order and extent is monotone.
    let mut order_axiom = true;
    let mut extent_monotone = true;
    for a in &secs {
        if !a.leq(a) {
            order_axiom = false;
        }
        for b in &secs {
            if a.leq(b) && b.leq(a) && a != b {
                order_axiom = false;
            }
            if a.leq(b) && !a.extent().is_subset(b.extent()) {
                extent_monotone = false;
            }
            for c in &secs {
                if a.leq(b) && b.leq(c) && !a.leq(c) {
                    order_axiom = false;
                }
            }
        }
    }

    // Compatible pairs have least upper bounds with the union extent.
    let mut sup_axiom = true;
    for a in &secs {
        for b in &secs {
            if !compatible(a, b) {
                continue;
            }
            let Ok(sup) = sheaf.sup_sections(&[a.clone(), b.clone()]) else {
                sup_axiom = false;
                continue;
            };
            if sup.extent() != a.extent().union(b.extent()) || !a.leq(&sup) || !b.leq(&sup) {
                sup_axiom = false;
            }
            for d in &secs {
                if a.leq(d) && b.leq(d) && !sup.leq(d) {
                    sup_axiom = false;
                }
            }
        }
    }

    // Restriction families glue back: sup of restrictions over a family of
    // opens is the restriction to the union.
    let mut glue_axiom = true;
    for c in &secs {
        let family: Vec<Section> = opens.iter().map(|&u| c.restrict(u)).collect();
        for x in &family {
            for y in &family {
                if !compatible(x, y) {
                    glue_axiom = false;
                }
            }
        }
        let Ok(sup) = sheaf.sup_sections(&family) else {
            glue_axiom = false;
            continue;
        };
        if sup != *c {
            glue_axiom = false;
        }
    }

    // Bounded sets are compatible and have a least upper bound.
    let mut bounded_axiom = true;
    for d in &secs {
        let below: Vec<Section> = secs.iter().filter(|a| a.leq(d)).cloned().collect();
        for x in &below {
            for y in &below {
                if !compatible(x, y) {
                    bounded_axiom = false;
                }
            }
        }
        let Ok(sup) = sheaf.sup_sections(&below) else {
            bounded_axiom = false;
            continue;
        };
        if !sup.leq(d) {
            bounded_axiom = false;
        }
        for a in &below {
            if !a.leq(&sup) {
                bounded_axiom = false;
            }
        }
    }

    // Exactly one empty section.
    let empty_count = all.iter().filter(|s| s.extent().is_empty()).count();

    Ok(vec![
        ("restriction-axioms", restriction_axioms),
        ("section-order", order_axiom),
        ("extent-monotone", extent_monotone),
        ("compatible-sup", sup_axiom),
        ("glue-restrictions", glue_axiom),
        ("bounded-sup", bounded_axiom),
        ("unique-empty-section", empty_count == 1),
    ])
}

// ---------------------------------------------------------------------------
// Double-negation cross-check.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GlivenkoOutcome {
    pub name: String,
    pub formula: String,
    pub tautology: bool,
    pub labeled_tautology: bool,
    pub dn_valid_everywhere: bool,
}

/// Truth-table evaluation of a propositional schema whose atoms are holes.
pub fn classical_tautology(f: &Formula) -> Option<bool> {
    fn atoms(f: &Formula, acc: &mut Vec<String>) {
        match f {
            Formula::Hole(h, args) if args.is_empty() => {
                if !acc.contains(h) {
                    acc.push(h.clone());
                }
            }
            Formula::Not(g) => atoms(g, acc),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                atoms(a, acc);
                atoms(b, acc);
            }
            _ => {}
        }
    }
    fn eval(f: &Formula, v: &BTreeMap<&str, bool>) -> Option<bool> {
        Some(match f {
            Formula::Hole(h, args) if args.is_empty() => *v.get(h.as_str())?,
            Formula::Not(g) => !eval(g, v)?,
            Formula::And(a, b) => eval(a, v)? && eval(b, v)?,
            Formula::Or(a, b) => eval(a, v)? || eval(b, v)?,
            Formula::Implies(a, b) => !eval(a, v)? || eval(b, v)?,
            Formula::Iff(a, b) => eval(a, v)? == eval(b, v)?,
            _ => return None,
        })
    }
    let mut names = Vec::new();
    atoms(f, &mut names);
    for mask in 0u32..(1 << names.len()) {
        let assignment: BTreeMap<&str, bool> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), mask & (1 << i) != 0))
            .collect();
        if !eval(f, &assignment)? {
            return Some(false);
        }
    }
    Some(true)
}

/// Checks the corpus: for each propositional formula, the double negation is
/// valid on every model under every atom instantiation by `E`-sentences iff
/// the formula is a classical tautology.
pub fn glivenko_check(models: &[Model], corpus: &str) -> Result<Vec<GlivenkoOutcome>, SuiteError> {
    let items = parse_battery(corpus)?;
    let mut out = Vec::new();
    for item in &items {
        let taut = classical_tautology(&item.schema).ok_or(SuiteError::Battery {
            line: 0,
            msg: format!("{} is not a propositional schema", item.name),
        })?;
        let mut dn_valid = true;
        for model in models {
            let consts: Vec<(String, Sort)> = model
                .constants()
                .iter()
                .take(3)
                .map(|(n, (s, _))| (n.clone(), s.clone()))
                .collect();
            if consts.is_empty() {
                continue;
            }
            let hole_names: Vec<String> = item.schema.holes().keys().cloned().collect();
            let k = hole_names.len() as u32;
            let mut ev = Evaluator::new(model);
            let combos = (consts.len() as u64).pow(k);
            for combo in 0..combos {
                let mut map = BTreeMap::new();
                let mut c = combo;
                for h in &hole_names {
                    let (name, sort) = &consts[(c % consts.len() as u64) as usize];
                    c /= consts.len() as u64;
                    map.insert(
                        h.clone(),
                        HoleTemplate {
                            params: vec![],
                            body: Formula::Defined(Term::constant(name, sort.clone())),
                        },
                    );
                }
                let inst =
                    instantiate(&item.schema, &map, &BTreeMap::new()).expect("atoms instantiate");
                let dn = Formula::not(Formula::not(inst));
                if !ev.eval_formula(&dn).map(|v| v == model.base().full())? {
                    dn_valid = false;
                }
            }
        }
        out.push(GlivenkoOutcome {
            name: item.name.clone(),
            formula: item.schema.to_string(),
            tautology: taut,
            labeled_tautology: item.expectation == Expectation::Valid,
            dn_valid_everywhere: dn_valid,
        });
    }
    Ok(out)
}
