//! Acceptance battery: one test per criterion, each printing a pass line
//! with the checked counts. Run with
//! `cargo test -p sheaflab-core --test acceptance -- --nocapture`.

use std::time::Instant;

use sheaflab_core::generate;
use sheaflab_core::lang::{parse_formula, Formula};
use sheaflab_core::modelfile::fixtures;
use sheaflab_core::muchnik::DegreeStructure;
use sheaflab_core::poset::Poset;
use sheaflab_core::semantics::Evaluator;
use sheaflab_core::sheaf::{Sheaf, StalkElem};
use sheaflab_core::suite;

fn pass(n: usize, name: &str, detail: String) {
    println!("criterion {n:2} {name}: PASS ({detail})");
}

/// Criterion 1: extent/restriction axioms and the section-order lemmas hold
/// exactly on at least 200 seeded random sheaves; under 60 s.
#[test]
fn criterion_01_sheaf_axioms() {
    let start = Instant::now();
    let mut rng = generate::rng_for(101);
    let sheaves: Vec<(String, Sheaf)> = (0..200)
        .map(|i| {
            let base = generate::random_poset(&mut rng, 4);
            (
                format!("sheaf-{i}"),
                generate::random_sheaf(&mut rng, &base, 3),
            )
        })
        .collect();
    let report = suite::run_sheaf_axioms(&sheaves, Some(101));
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    assert_eq!(report.skipped(), 0, "random sheaves stay in cap");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    pass(
        1,
        "sheaf-axioms",
        format!("200 sheaves, {} checks, {elapsed:.2?}", report.items.len()),
    );
}

/// Criterion 2: the open-set algebra of every poset up to 4 points satisfies
/// residuation and distributivity exactly; under 30 s.
#[test]
fn criterion_02_heyting_laws() {
    let start = Instant::now();
    let posets: Vec<(String, Poset)> = suite::enumerate_posets_up_to(4)
        .into_iter()
        .enumerate()
        .map(|(i, p)| (format!("poset-{i}"), p))
        .collect();
    assert_eq!(
        posets.len(),
        1 + 3 + 19 + 219,
        "labeled posets on <=4 points"
    );
    let report = suite::run_heyting(&posets, None);
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    pass(
        2,
        "heyting-laws",
        format!("{} posets exhaustively, {elapsed:.2?}", posets.len()),
    );
}

/// Criterion 3: the default validity battery (including substitution
/// instances and the double negation of excluded middle) evaluates to the
/// full base on every generated model; at least 30 instances, zero failures,
/// under 5 min.
#[test]
fn criterion_03_ihol_battery() {
    let start = Instant::now();
    let models = generate::generate_models(103, suite::default_count(suite::SuiteName::Ihol));
    let report = suite::run_ihol(&models, Some(103), suite::IHOL_BATTERY).unwrap();
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    let valid_instances = report.passed();
    assert!(valid_instances >= 30, "only {valid_instances} instances");
    // The battery covers the substitution schema and the double negation of
    // the excluded middle, and they pass on every model.
    for needed in ["subst", "dn-pem"] {
        assert!(
            report
                .items
                .iter()
                .any(|i| i.schema == needed && i.verdict == sheaflab_core::report::Verdict::Pass),
            "battery item {needed} missing or failing"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    pass(
        3,
        "ihol-battery",
        format!(
            "{} models, {valid_instances} valid instances, {elapsed:.2?}",
            models.len()
        ),
    );
}

/// Criterion 4: the shipped fixture refutes excluded middle exactly at the
/// bottom point while its double negation is fully valid.
#[test]
fn criterion_04_pem_refutation() {
    let model = fixtures::pem_k2();
    let mut ev = Evaluator::new(&model);
    let pem = parse_formula("E a \\/ ~ E a").unwrap();
    let value = ev.eval_formula(&pem).unwrap();
    assert_eq!(value.names(model.base()), vec!["top".to_string()]);
    assert_ne!(value, model.base().full());
    let dn = parse_formula("~ ~ (E a \\/ ~ E a)").unwrap();
    assert_eq!(ev.eval_formula(&dn).unwrap(), model.base().full());
    pass(
        4,
        "pem-refutation",
        "value {top} on the K2 fixture".to_string(),
    );
}

/// Criterion 5: over the generated model family, the double negation of a
/// propositional formula is valid everywhere iff the formula is a classical
/// tautology; exact agreement on a corpus of at least 20 formulas.
#[test]
fn criterion_05_glivenko_crosscheck() {
    let models = generate::generate_models(105, 8);
    let outcomes = suite::glivenko_check(&models, suite::GLIVENKO_CORPUS).unwrap();
    assert!(outcomes.len() >= 20, "corpus too small: {}", outcomes.len());
    for o in &outcomes {
        assert_eq!(o.tautology, o.labeled_tautology, "{} mislabeled", o.name);
        assert_eq!(
            o.tautology, o.dn_valid_everywhere,
            "disagreement on {}",
            o.name
        );
    }
    pass(
        5,
        "glivenko-crosscheck",
        format!("{} formulas, exact agreement", outcomes.len()),
    );
}

/// Criterion 6: the choice schema with a simple source sheaf holds (both as
/// inclusion and as full-base implication) for every template on every
/// generated model; zero failures.
#[test]
fn criterion_06_choice_over_posets() {
    let models = generate::generate_models(106, suite::default_count(suite::SuiteName::AcSimple));
    let report = suite::run_ac_simple(&models, Some(106));
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    assert!(suite::AC_TEMPLATES.len() >= 10);
    assert!(report.passed() > 0);
    pass(
        6,
        "choice-over-posets",
        format!(
            "{} models x {} templates, {} checked, {} cap-skipped",
            models.len(),
            suite::AC_TEMPLATES.len(),
            report.passed(),
            report.skipped()
        ),
    );
}

/// Criterion 7: the generalized Markov principle with a simple sheaf, same
/// regime; zero failures.
#[test]
fn criterion_07_gmp() {
    let models = generate::generate_models(107, suite::default_count(suite::SuiteName::Gmp));
    let report = suite::run_gmp(&models, Some(107));
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    assert!(report.passed() >= 10);
    pass(
        7,
        "gmp",
        format!("{} models, {} instances", models.len(), report.passed()),
    );
}

/// Criterion 8: on every directed generated poset, every section of every
/// simple sheaf is constant on its extent.
#[test]
fn criterion_08_directed_collapse() {
    let mut rng = generate::rng_for(108);
    let mut directed_checked = 0usize;
    let mut sections_checked = 0usize;
    for _ in 0..300 {
        let base = generate::random_poset(&mut rng, 4);
        if !base.is_directed() {
            continue;
        }
        directed_checked += 1;
        for k in 1..=3usize {
            let values: Vec<String> = (0..k).map(|i| i.to_string()).collect();
            let sheaf = Sheaf::simple(base.clone(), &values);
            for section in sheaf.all_sections(100_000).unwrap() {
                let mut seen: Option<u32> = None;
                for p in section.extent().iter() {
                    let v = section.value_at(p).unwrap();
                    match seen {
                        None => seen = Some(v),
                        Some(prev) => {
                            assert_eq!(prev, v, "non-constant section on directed base {base}")
                        }
                    }
                }
                sections_checked += 1;
            }
        }
    }
    assert!(
        directed_checked >= 50,
        "only {directed_checked} directed posets"
    );
    pass(
        8,
        "directed-collapse",
        format!("{directed_checked} directed posets, {sections_checked} sections"),
    );
}

/// Criterion 9: the function sheaf of simple sheaves is isomorphic to the
/// simple sheaf over the function set (sizes 2 and 2) on the 2-chain and the
/// V poset, with invertible witnesses.
#[test]
fn criterion_09_currying_iso() {
    let caps = sheaflab_core::Caps::default();
    let mut checked = 0;
    for (name, base) in [
        (
            "K2",
            Poset::new(&["bot", "top"], &[("bot", "top")]).unwrap(),
        ),
        (
            "V",
            Poset::new(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).unwrap(),
        ),
    ] {
        let x = Sheaf::simple(base.clone(), &["0", "1"]);
        let y = Sheaf::simple(base.clone(), &["0", "1"]);
        let fun = y.function_sheaf(&x, &caps).unwrap();
        let simple4 = Sheaf::simple(base.clone(), &["f0", "f1", "f2", "f3"]);
        let iso = fun
            .iso_check(&simple4)
            .unwrap()
            .unwrap_or_else(|| panic!("no isomorphism on {name}"));
        assert!(iso.forward.is_natural(&fun, &simple4));
        assert!(iso.backward.is_natural(&simple4, &fun));
        for p in 0..base.len() {
            for v in 0..4u32 {
                let w = iso.forward.components[&p][v as usize];
                assert_eq!(iso.backward.components[&p][w as usize], v);
                let w2 = iso.backward.components[&p][v as usize];
                assert_eq!(iso.forward.components[&p][w2 as usize], v);
            }
        }
        checked += 1;
    }
    pass(
        9,
        "currying-iso",
        format!("{checked} bases, witnesses invertible"),
    );
}

/// Criterion 10: the number of global sections of the power sheaf equals the
/// exhaustively counted number of subsheaves, for at least 20 small sheaves;
/// the canonical correspondence is a bijection.
#[test]
fn criterion_10_power_sheaf() {
    let caps = sheaflab_core::Caps::default();
    let k2 = Poset::new(&["bot", "top"], &[("bot", "top")]).unwrap();
    let vee = Poset::new(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).unwrap();
    let mut sheaves: Vec<Sheaf> = vec![
        Sheaf::terminal(k2.clone()),
        Sheaf::empty_sheaf(k2.clone()),
        Sheaf::simple(k2.clone(), &["0", "1"]),
        Sheaf::simple(vee.clone(), &["0", "1"]),
        Sheaf::terminal(vee),
    ];
    let mut rng = generate::rng_for(110);
    while sheaves.len() < 24 {
        let base = generate::random_poset(&mut rng, 3);
        sheaves.push(generate::random_sheaf(&mut rng, &base, 2));
    }
    let mut checked = 0;
    for m in &sheaves {
        let Ok(power) = m.power_sheaf(&caps) else {
            continue; // cap-bound blowup; skip and keep counting
        };
        let globals = power.sections(m.base().full(), 100_000).unwrap();
        let subs = m.subsheaves(100_000).unwrap();
        assert_eq!(globals.len(), subs.len(), "count mismatch on {m}");
        for sub in &subs {
            let classified = m.classify_subsheaf(&power, sub).unwrap();
            assert!(globals.contains(&classified));
            assert_eq!(m.subsheaf_of_classifier(&power, &classified), *sub);
        }
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} sheaves checked");
    pass(
        10,
        "power-sheaf",
        format!("{checked} sheaves, counts equal"),
    );
}

/// Criterion 11: duality between weak degrees and up-sets of degrees on at
/// least 50 seeded oracle preorders, with all lattice formulas matching the
/// brute-force definitions; under 60 s.
#[test]
fn criterion_11_muchnik_duality() {
    let start = Instant::now();
    let mut rng = generate::rng_for(111);
    let structures: Vec<(String, DegreeStructure)> = (0..50)
        .map(|i| {
            (
                format!("preorder-{i}"),
                generate::random_degree_structure(&mut rng, 5),
            )
        })
        .collect();
    let report = suite::run_duality(&structures, Some(111));
    assert_eq!(report.failed(), 0, "{}", report.render_text());
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    pass(
        11,
        "muchnik-duality",
        format!("50 preorders, {} checks, {elapsed:.2?}", report.items.len()),
    );
}

/// Criterion 12: the enumeration route and the Heyting route for weak-degree
/// implication agree on every pair, for every fixture structure.
#[test]
fn criterion_12_implication_agreement() {
    let mut structures: Vec<DegreeStructure> = vec![
        fixtures::vee_preorder()
            .degree_context()
            .unwrap()
            .ds
            .clone(),
        fixtures::muchnik_k2().degree_context().unwrap().ds.clone(),
        fixtures::muchnik_chain3()
            .degree_context()
            .unwrap()
            .ds
            .clone(),
    ];
    let mut rng = generate::rng_for(112);
    for _ in 0..25 {
        structures.push(generate::random_degree_structure(&mut rng, 5));
    }
    let mut pairs = 0usize;
    for ds in &structures {
        for a in ds.all_weak_degrees() {
            for b in ds.all_weak_degrees() {
                assert_eq!(
                    ds.wdeg_imp(a, b),
                    ds.wdeg_imp_brute(a, b),
                    "imp mismatch on {}",
                    ds.degrees()
                );
                pairs += 1;
            }
        }
    }
    pass(
        12,
        "implication-agreement",
        format!("{} structures, {pairs} pairs", structures.len()),
    );
}

/// Criterion 13: the connective-to-lattice correspondence on Muchnik-mode
/// fixtures: conjunction to sup, disjunction to inf, implication to imp,
/// negation to imp into the top degree; at least 10 sentence pairs.
#[test]
fn criterion_13_topos_correspondence() {
    let sentence_texts = [
        "E uh",
        "E vh",
        "uh = vh",
        "uh <=T vh",
        "vh <=T uh",
        "~ E vh",
        "E nil",
    ];
    let mut pairs_checked = 0usize;
    for model in [fixtures::muchnik_k2(), fixtures::muchnik_chain3()] {
        let ds = model.degree_context().unwrap().ds.clone();
        let mut ev = Evaluator::new(&model);
        let sentences: Vec<Formula> = sentence_texts
            .iter()
            .map(|t| parse_formula(t).unwrap())
            .collect();
        for a in &sentences {
            for b in &sentences {
                let va = ev.eval_formula(a).unwrap();
                let vb = ev.eval_formula(b).unwrap();
                let da = ds.psi(va).unwrap();
                let db = ds.psi(vb).unwrap();
                let v_and = ev
                    .eval_formula(&Formula::and(a.clone(), b.clone()))
                    .unwrap();
                assert_eq!(ds.psi(v_and).unwrap(), ds.wdeg_sup(da, db));
                let v_or = ev.eval_formula(&Formula::or(a.clone(), b.clone())).unwrap();
                assert_eq!(ds.psi(v_or).unwrap(), ds.wdeg_inf(da, db));
                let v_imp = ev
                    .eval_formula(&Formula::implies(a.clone(), b.clone()))
                    .unwrap();
                assert_eq!(ds.psi(v_imp).unwrap(), ds.wdeg_imp(da, db));
                pairs_checked += 1;
            }
            let v_not = ev.eval_formula(&Formula::not(a.clone())).unwrap();
            let da = ds.psi(ev.eval_formula(a).unwrap()).unwrap();
            assert_eq!(ds.psi(v_not).unwrap(), ds.wdeg_neg(da));
        }
    }
    assert!(pairs_checked >= 10);
    pass(
        13,
        "topos-correspondence",
        format!("{pairs_checked} sentence pairs on 2 fixtures"),
    );
}

/// Criterion 14: the combined choice-and-bounding schema and its bound-free
/// variant hold (left side included in right side) for every template on
/// the 2-chain and 3-chain fixtures; each instance under 60 s.
#[test]
fn criterion_14_acbp() {
    let models = [fixtures::muchnik_k2(), fixtures::muchnik_chain3()];
    assert!(suite::ACBP_TEMPLATES.len() >= 5);
    let mut instances = 0usize;
    for model in &models {
        let mut ev = Evaluator::new(model);
        for template_text in suite::ACBP_TEMPLATES {
            let template = parse_formula(template_text).unwrap();
            for schema in [
                sheaflab_core::semantics::Schema::Acbp,
                sheaflab_core::semantics::Schema::Bp,
                sheaflab_core::semantics::Schema::AcbpChoiceOnly,
            ] {
                let start = Instant::now();
                let result =
                    sheaflab_core::semantics::check_schema_instance(&mut ev, &schema, &template)
                        .unwrap();
                assert!(
                    result.lhs.is_subset(result.rhs),
                    "{} fails on {} with {}",
                    schema.name(),
                    model.label,
                    template_text
                );
                assert!(result.holds);
                let elapsed = start.elapsed();
                assert!(elapsed.as_secs() < 60, "instance took {elapsed:?}");
                instances += 1;
            }
        }
    }
    pass(
        14,
        "acbp",
        format!("{instances} instances on 2 fixtures, zero failures"),
    );
}

/// Criterion 15: disjoint refinement on 1000 seeded cone collections
/// (branching <= 3, depth <= 5): union preservation, subordination, pairwise
/// disjointness, and idempotence, verified by brute-force membership.
#[test]
fn criterion_15_disjoint_refinement() {
    use rand::Rng;
    use sheaflab_core::baire::{refine_disjoint, PrefixCone};

    fn members(cones: &[PrefixCone], b: u8, d: u8) -> std::collections::BTreeSet<Vec<u8>> {
        let mut out = std::collections::BTreeSet::new();
        let total = (b as u64).pow(d as u32);
        for code in 0..total {
            let mut seq = Vec::with_capacity(d as usize);
            let mut c = code;
            for _ in 0..d {
                seq.push((c % b as u64) as u8);
                c /= b as u64;
            }
            if cones
                .iter()
                .any(|cone| seq[..cone.prefix.len()] == cone.prefix[..])
            {
                out.insert(seq);
            }
        }
        out
    }

    let mut rng = generate::rng_for(115);
    for trial in 0..1000 {
        let b = rng.gen_range(1..=3u8);
        let d = rng.gen_range(1..=5u8);
        let k = rng.gen_range(0..=6usize);
        let input: Vec<PrefixCone> = (0..k)
            .map(|_| {
                let len = rng.gen_range(0..=d) as usize;
                PrefixCone::new((0..len).map(|_| rng.gen_range(0..b)).collect())
            })
            .collect();
        let output = refine_disjoint(&input, b, d).unwrap();
        assert_eq!(
            members(&output, b, d),
            members(&input, b, d),
            "union broken in trial {trial}"
        );
        for c in &output {
            let cm = members(std::slice::from_ref(c), b, d);
            assert!(
                input
                    .iter()
                    .any(|u| cm.is_subset(&members(std::slice::from_ref(u), b, d))),
                "subordination broken in trial {trial}"
            );
        }
        for (i, c1) in output.iter().enumerate() {
            for c2 in output.iter().skip(i + 1) {
                let m1 = members(std::slice::from_ref(c1), b, d);
                let m2 = members(std::slice::from_ref(c2), b, d);
                assert!(m1.is_disjoint(&m2), "overlap in trial {trial}");
            }
        }
        assert_eq!(
            refine_disjoint(&output, b, d).unwrap(),
            output,
            "not idempotent in trial {trial}"
        );
    }
    pass(
        15,
        "disjoint-refinement",
        "1000 collections verified".to_string(),
    );
}

/// The degree-bounded value sheaf of each Muchnik fixture passes the same
/// axiom battery as every other sheaf (supporting check for criteria 13/14).
#[test]
fn supporting_reals_sheaf_satisfies_axioms() {
    for model in [fixtures::muchnik_k2(), fixtures::muchnik_chain3()] {
        let ctx = model.degree_context().unwrap();
        let real = ctx.real_sort.clone().unwrap();
        let sheaf = model.ground_sheaf(&real).unwrap();
        for (check, ok) in suite::check_sheaf_axioms(sheaf).unwrap() {
            assert!(ok, "{check} fails on the {} value sheaf", model.label);
        }
    }
}

/// The simple sheaf is the locally constant one: sections over any open are
/// per-component constants (supporting check for criterion 8's mechanism).
#[test]
fn supporting_simple_sheaf_is_locally_constant() {
    let mut rng = generate::rng_for(120);
    for _ in 0..50 {
        let base = generate::random_poset(&mut rng, 4);
        let sheaf = Sheaf::simple(base.clone(), &["0", "1"]);
        for u in base.all_opens() {
            let comps = base.connected_components(u);
            let expected = 2usize.pow(comps.len() as u32);
            assert_eq!(sheaf.sections(u, 100_000).unwrap().len(), expected);
            for s in sheaf.sections(u, 100_000).unwrap() {
                for comp in &comps {
                    let mut vals = comp.iter().map(|p| s.value_at(p).unwrap());
                    let first = vals.next().unwrap();
                    assert!(vals.all(|v| v == first));
                }
            }
        }
        // Every value has a global section.
        for v in ["0", "1"] {
            assert!(sheaf.constant_section(v).is_some());
        }
        let _ = StalkElem::atom("0");
    }
}
