//! Seeded random generation of posets, sheaves, models, and oracle
//! preorders. Seeds fully determine the output; enumeration orders are
//! canonical, so reports are reproducible.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::Caps;
use crate::muchnik::DegreeStructure;
use crate::poset::Poset;
use crate::semantics::Model;
use crate::sheaf::{Section, Sheaf, StalkElem};

pub type SeededRng = ChaCha8Rng;

pub fn rng_for(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random poset on up to `max_points` points named `p0..`, built by
/// closing a random set of upward edges.
pub fn random_poset(rng: &mut SeededRng, max_points: usize) -> Poset {
    let n = rng.gen_range(1..=max_points.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(1.0 / 3.0) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Poset::new(&names, &pairs).expect("upward edges cannot create cycles")
}

/// A random functor-form sheaf over the poset: stalk sizes up to
/// `max_stalk_size` with a downward-closed empty region, random cover
/// transitions retried until functorial, with a constant-map fallback.
pub fn random_sheaf(rng: &mut SeededRng, base: &Poset, max_stalk_size: usize) -> Sheaf {
    let n = base.len();
    // Empty stalks must be downward closed (maps out of a nonempty stalk
    // into an empty one cannot exist).
    let mut empty = vec![false; n];
    for slot in empty.iter_mut() {
        if rng.gen_bool(0.15) {
            *slot = true;
        }
    }
    for p in 0..n {
        for q in 0..n {
            if base.leq(p, q) && empty[q] {
                empty[p] = true;
            }
        }
    }
    let sizes: Vec<usize> = (0..n)
        .map(|p| {
            if empty[p] {
                0
            } else {
                rng.gen_range(1..=max_stalk_size.max(1))
            }
        })
        .collect();
    let stalks: Vec<Vec<StalkElem>> = sizes
        .iter()
        .map(|&k| (0..k).map(|i| StalkElem::atom(format!("e{i}"))).collect())
        .collect();
    let covers: Vec<(usize, usize)> = base
        .related_pairs()
        .into_iter()
        .filter(|&(i, j)| i != j && base.covers(i, j))
        .collect();
    for _attempt in 0..40 {
        let mut trans = BTreeMap::new();
        for &(i, j) in &covers {
            let f: Vec<u32> = (0..sizes[i])
                .map(|_| rng.gen_range(0..sizes[j].max(1)) as u32)
                .collect();
            trans.insert((i, j), f);
        }
        if let Ok(sheaf) = Sheaf::from_parts(base.clone(), stalks.clone(), trans) {
            return sheaf;
        }
    }
    // Fallback: everything collapses to the first element; trivially
    // functorial.
    let mut trans = BTreeMap::new();
    for (i, j) in base.related_pairs() {
        if i != j {
            trans.insert((i, j), vec![0u32; sizes[i]]);
        }
    }
    Sheaf::from_parts(base.clone(), stalks, trans).expect("constant maps are functorial")
}

const VALUES: [&str; 3] = ["0", "1", "2"];

/// A random model: a poset of up to 4 points, simple sheaves over value
/// sets of size up to 3 for ground sorts `s` and `t`, and per sort a global
/// constant, a random partial section, and an empty section.
pub fn random_model(rng: &mut SeededRng, label: &str) -> Model {
    let base = random_poset(rng, 4);
    let mut grounds = BTreeMap::new();
    let mut constants = Vec::new();
    let caps = Caps::default();
    for sort_name in ["s", "t"] {
        let k = rng.gen_range(1..=3usize);
        let sheaf = Sheaf::simple(base.clone(), &VALUES[..k]);
        // A global section always exists for a simple sheaf.
        let global = sheaf.constant_section(VALUES[0]).expect("global constant");
        let all = sheaf
            .all_sections(caps.max_quantifier_sections)
            .expect("simple sheaves are small");
        let partial = all[rng.gen_range(0..all.len())].clone();
        let sort = crate::lang::Sort::ground(sort_name);
        constants.push((format!("{sort_name}0"), sort.clone(), global));
        constants.push((format!("{sort_name}1"), sort.clone(), partial));
        constants.push((
            format!("{sort_name}2"),
            sort.clone(),
            Section::empty(base.len()),
        ));
        grounds.insert(sort_name.to_string(), sheaf);
    }
    Model::new(base, grounds, constants, None, caps)
        .expect("generated models validate")
        .with_label(label)
}

/// The fixed two-valued model: a singleton base with a globally defined and
/// an undefined constant, so `E`-atoms collapse to the two classical truth
/// values.
pub fn boolean_model() -> Model {
    let base = Poset::new(&["pt"], &[]).unwrap();
    let s = Sheaf::simple(base.clone(), &["0"]);
    let tt = s.constant_section("0").unwrap();
    let ff = Section::empty(1);
    let mut grounds = BTreeMap::new();
    grounds.insert("s".to_string(), s.clone());
    grounds.insert("t".to_string(), s);
    let sort = crate::lang::Sort::ground("s");
    let sort_t = crate::lang::Sort::ground("t");
    Model::new(
        base,
        grounds,
        vec![
            ("s0".into(), sort.clone(), tt.clone()),
            ("s1".into(), sort.clone(), tt.clone()),
            ("s2".into(), sort, ff.clone()),
            ("t0".into(), sort_t.clone(), tt),
            ("t2".into(), sort_t, ff),
        ],
        None,
        Caps::default(),
    )
    .unwrap()
    .with_label("boolean")
}

/// The model family driven by `--generate`: the fixed boolean model
/// followed by seeded random models.
pub fn generate_models(seed: u64, count: usize) -> Vec<Model> {
    let mut rng = rng_for(seed);
    let mut out = vec![boolean_model()];
    for i in 0..count.saturating_sub(1) {
        out.push(random_model(&mut rng, &format!("gen-{i}")));
    }
    out
}

/// A random oracle preorder on up to `max_oracles` oracles, quotiented to a
/// degree structure.
pub fn random_degree_structure(rng: &mut SeededRng, max_oracles: usize) -> DegreeStructure {
    let n = rng.gen_range(1..=max_oracles.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.25) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    DegreeStructure::from_preorder(&names, &pairs).expect("any preorder quotients")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = generate_models(7, 5);
        let b = generate_models(7, 5);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.base(), y.base());
            assert_eq!(x.constants().len(), y.constants().len());
            for (name, (sort, sec)) in x.constants() {
                let (sort2, sec2) = &y.constants()[name];
                assert_eq!(sort, sort2);
                assert_eq!(sec, sec2);
            }
        }
        let mut r1 = rng_for(3);
        let mut r2 = rng_for(3);
        for _ in 0..20 {
            let p1 = random_poset(&mut r1, 4);
            let p2 = random_poset(&mut r2, 4);
            assert_eq!(p1, p2);
            assert_eq!(random_sheaf(&mut r1, &p1, 3), random_sheaf(&mut r2, &p2, 3));
        }
    }

    #[test]
    fn random_sheaves_validate() {
        let mut rng = rng_for(42);
        for _ in 0..50 {
            let base = random_poset(&mut rng, 4);
            let sheaf = random_sheaf(&mut rng, &base, 3);
            // Construction validated functoriality; sections enumerate.
            let _ = sheaf.all_sections(100_000).unwrap();
        }
    }

    #[test]
    fn boolean_model_collapses() {
        use crate::lang::parse_formula;
        use crate::semantics::Evaluator;
        let m = boolean_model();
        let mut ev = Evaluator::new(&m);
        assert!(ev.models(&parse_formula("E s0").unwrap()).unwrap());
        assert!(!ev.models(&parse_formula("E s2").unwrap()).unwrap());
        assert!(ev
            .eval_formula(&parse_formula("E s2").unwrap())
            .unwrap()
            .is_empty());
    }
}
