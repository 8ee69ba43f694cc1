//! JSON model files (`"schema": 1`) and the shipped fixtures.
//!
//! A model file carries a poset block, a sorts block mapping ground-sort
//! names to sheaf specifications, a constants block of named sections, an
//! optional degree-structure block, and an optional caps block. Sheaf
//! specifications are `{"kind":"simple","values":[..]}`,
//! `{"kind":"functor","stalks":{..},"transitions":{..}}`, or
//! `{"kind":"muchnik-reals"}` (at most one, and only with a degrees block).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caps::Caps;
use crate::lang::parse_sort;
use crate::muchnik::{DegreeStructure, ValueSystem};
use crate::poset::Poset;
use crate::semantics::{EvalError, Evaluator, Model};
use crate::sheaf::{Section, Sheaf};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (this build reads version 1)")]
    SchemaVersion(u32),
    #[error(transparent)]
    Poset(#[from] crate::poset::PosetError),
    #[error(transparent)]
    Sheaf(#[from] crate::sheaf::SheafError),
    #[error(transparent)]
    Degree(#[from] crate::muchnik::DegreeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("constant {name}: invalid sort text: {source}")]
    ConstantSort {
        name: String,
        source: crate::lang::ParseError,
    },
    #[error("sort {0}: kind \"muchnik-reals\" requires a degrees block")]
    RealsWithoutDegrees(String),
    #[error("more than one sort with kind \"muchnik-reals\": {0} and {1}")]
    TwoRealSorts(String, String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn schema_version_default() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetBlock {
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SheafSpec {
    Simple {
        values: Vec<String>,
    },
    Functor {
        stalks: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        transitions: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
    },
    MuchnikReals,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionBlock {
    #[serde(default)]
    pub extent: Vec<String>,
    #[serde(default)]
    pub family: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantBlock {
    pub sort: String,
    pub section: SectionBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreesBlock {
    pub degrees: PosetBlock,
    pub oracles: Vec<String>,
    #[serde(default)]
    pub oracle_leq: Vec<(String, String)>,
    pub deg: BTreeMap<String, String>,
    #[serde(default)]
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default = "schema_version_default")]
    pub schema: u32,
    pub poset: PosetBlock,
    #[serde(default)]
    pub sorts: BTreeMap<String, SheafSpec>,
    #[serde(default)]
    pub constants: BTreeMap<String, ConstantBlock>,
    #[serde(default)]
    pub degrees: Option<DegreesBlock>,
    #[serde(default)]
    pub caps: Option<Caps>,
}

impl PosetBlock {
    pub fn build(&self, caps: &Caps) -> Result<Poset, ModelFileError> {
        let pairs: Vec<(&str, &str)> = self
            .leq
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let elems: Vec<&str> = self.elements.iter().map(|s| s.as_str()).collect();
        Ok(Poset::with_cap(&elems, &pairs, caps.max_points)?)
    }
}

/// Loads and validates a model from JSON text.
pub fn load_model_str(json: &str) -> Result<Model, ModelFileError> {
    let file: ModelFile = serde_json::from_str(json)?;
    build_model(&file)
}

/// Loads a model from a file path.
pub fn load_model_path(path: &str) -> Result<Model, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.to_string(),
        source,
    })?;
    load_model_str(&text)
}

pub fn build_model(file: &ModelFile) -> Result<Model, ModelFileError> {
    if file.schema != 1 {
        return Err(ModelFileError::SchemaVersion(file.schema));
    }
    let caps = file.caps.unwrap_or_default();
    let base = file.poset.build(&caps)?;

    let degrees = match &file.degrees {
        None => None,
        Some(block) => {
            let degrees_poset = block.degrees.build(&caps)?;
            let oracles: Vec<&str> = block.oracles.iter().map(|s| s.as_str()).collect();
            let pairs: Vec<(&str, &str)> = block
                .oracle_leq
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect();
            let ds = DegreeStructure::new(degrees_poset, &oracles, &pairs, &block.deg)?;
            let vs = ValueSystem::new(&ds, &block.values)?;
            Some((ds, vs))
        }
    };

    let mut real_sort: Option<String> = None;
    let mut grounds: BTreeMap<String, Sheaf> = BTreeMap::new();
    for (name, spec) in &file.sorts {
        match spec {
            SheafSpec::Simple { values } => {
                grounds.insert(name.clone(), Sheaf::simple(base.clone(), values));
            }
            SheafSpec::Functor {
                stalks,
                transitions,
            } => {
                grounds.insert(
                    name.clone(),
                    Sheaf::from_named_parts(base.clone(), stalks, transitions)?,
                );
            }
            SheafSpec::MuchnikReals => {
                if degrees.is_none() {
                    return Err(ModelFileError::RealsWithoutDegrees(name.clone()));
                }
                if let Some(prev) = &real_sort {
                    return Err(ModelFileError::TwoRealSorts(prev.clone(), name.clone()));
                }
                real_sort = Some(name.clone());
            }
        }
    }

    // A first pass without constants derives the sheaves the constants need.
    let skeleton = Model::new(
        base.clone(),
        grounds.clone(),
        Vec::new(),
        degrees.clone().map(|(ds, vs)| (ds, vs, real_sort.clone())),
        caps,
    )?;
    let mut constants: Vec<(String, crate::lang::Sort, Section)> = Vec::new();
    {
        let mut ev = Evaluator::new(&skeleton);
        for (name, block) in &file.constants {
            let sort = parse_sort(&block.sort).map_err(|source| ModelFileError::ConstantSort {
                name: name.clone(),
                source,
            })?;
            let sheaf = ev.sheaf_for_sort(&sort)?;
            let section = sheaf.section_from_names(&block.section.extent, &block.section.family)?;
            constants.push((name.clone(), sort, section));
        }
    }
    Ok(Model::new(
        base,
        grounds,
        constants,
        degrees.map(|(ds, vs)| (ds, vs, real_sort)),
        caps,
    )?)
}

/// A plain-text description of a model: poset, sorts with stalk sizes and
/// section counts, constants, and the degree structure if present.
pub fn describe(model: &Model) -> String {
    let mut out = String::new();
    let base = model.base();
    out.push_str(&format!("base: {base}\n"));
    out.push_str(&format!("opens: {}\n", base.all_opens().len()));
    out.push_str(&format!("caps: {}\n", model.caps()));
    for (name, sheaf) in model.grounds() {
        let sections = sheaf
            .all_sections(model.caps().max_quantifier_sections)
            .map(|s| s.len().to_string())
            .unwrap_or_else(|_| "over cap".to_string());
        let sizes: Vec<String> = (0..base.len())
            .map(|p| sheaf.stalk(p).len().to_string())
            .collect();
        out.push_str(&format!(
            "sort {name}: stalks [{}], sections {sections}\n",
            sizes.join(",")
        ));
        for p in 0..base.len() {
            let elems: Vec<String> = sheaf.stalk(p).iter().map(|e| e.render(base)).collect();
            out.push_str(&format!(
                "  stalk {}: {{{}}}\n",
                base.name(p),
                elems.join(",")
            ));
        }
    }
    for (name, (sort, section)) in model.constants() {
        let sheaf_render = if section.extent().is_empty() {
            "<>".to_string()
        } else {
            let points: Vec<String> = section.extent().names(base);
            format!("extent {{{}}}", points.join(","))
        };
        out.push_str(&format!("constant {name}: {sort}, {sheaf_render}\n"));
    }
    if let Some(ctx) = model.degree_context() {
        out.push_str(&format!(
            "degrees: {} over oracles [{}]\n",
            ctx.ds.degrees(),
            ctx.ds.oracles().join(",")
        ));
        if let Some(real) = &ctx.real_sort {
            out.push_str(&format!("muchnik-real sort: {real}\n"));
        }
        for (v, d) in &ctx.vs.vdeg {
            out.push_str(&format!(
                "  value {v} at degree {}\n",
                ctx.ds.degrees().name(*d)
            ));
        }
    }
    out
}

/// Shipped fixture files, compiled in so suites and tests run without paths.
pub mod fixtures {
    use super::*;

    pub const PEM_K2: &str = include_str!("../fixtures/pem_k2.json");
    pub const MUCHNIK_K2: &str = include_str!("../fixtures/muchnik_k2.json");
    pub const MUCHNIK_CHAIN3: &str = include_str!("../fixtures/muchnik_chain3.json");
    pub const VEE_PREORDER: &str = include_str!("../fixtures/vee_preorder.json");

    pub fn pem_k2() -> Model {
        load_model_str(PEM_K2)
            .expect("shipped fixture parses")
            .with_label("pem-k2")
    }

    pub fn muchnik_k2() -> Model {
        load_model_str(MUCHNIK_K2)
            .expect("shipped fixture parses")
            .with_label("muchnik-k2")
    }

    pub fn muchnik_chain3() -> Model {
        load_model_str(MUCHNIK_CHAIN3)
            .expect("shipped fixture parses")
            .with_label("muchnik-chain3")
    }

    pub fn vee_preorder() -> Model {
        load_model_str(VEE_PREORDER)
            .expect("shipped fixture parses")
            .with_label("vee-preorder")
    }
}
