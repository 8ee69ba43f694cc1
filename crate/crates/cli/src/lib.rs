//! Command implementations for the `sheaflab` binary.
//!
//! Exit codes: 0 success (for `eval`: the sentence is valid), 2 refutation or
//! suite failure, 1 usage or evaluation error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use sheaflab_core::baire::{refine_disjoint, PrefixCone};
use sheaflab_core::lang::parse_formula;
use sheaflab_core::modelfile::{self, ModelFile};
use sheaflab_core::muchnik::{MassProblem, WdegOp};
use sheaflab_core::semantics::{Evaluator, Model};
use sheaflab_core::suite::{run_suite, SuiteName, SuiteSource};
use sheaflab_core::Caps;

#[derive(Parser, Debug)]
#[command(
    name = "sheaflab",
    version,
    about = "Finite sheaf models over poset spaces: evaluate sentences, run validity batteries, compute weak-degree lattice operations, refine prefix cones"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate a sentence against a model; exit 0 if valid, 2 if refuted.
    Eval {
        /// Path to a JSON model file (schema 1).
        #[arg(long)]
        model: PathBuf,
        /// Sentence text, e.g. "E a \/ ~ E a".
        #[arg(long)]
        formula: String,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Cap overrides, e.g. --cap max-stalk=512 --cap max-quantifier=4096.
        #[arg(long = "cap")]
        caps: Vec<String>,
    },
    /// Run a named battery over a model or a seeded generated family.
    Suite {
        /// One of: ihol, ac-simple, gmp, acbp, heyting-laws,
        /// muchnik-duality, sheaf-axioms.
        name: String,
        #[arg(long, conflicts_with = "generate")]
        model: Option<PathBuf>,
        /// Run over generated fixtures instead of a model file.
        #[arg(long)]
        generate: bool,
        /// Seed for the generated family.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of generated models / structures (suite-specific default).
        #[arg(long)]
        models: Option<usize>,
        /// Replacement battery file for the ihol suite.
        #[arg(long)]
        battery: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long = "cap")]
        caps: Vec<String>,
    },
    /// Weak-degree lattice operations over a model's degree structure.
    /// Operands are mass problems: comma-separated oracle lists ("-" for the
    /// empty problem).
    Lattice {
        #[arg(long)]
        model: PathBuf,
        /// One of: sup, inf, imp, neg.
        op: String,
        /// One operand for neg, two otherwise.
        operands: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Disjoint refinement of prefix cones; cones are comma-separated digit
    /// tuples ("e" for the root).
    Refine {
        #[arg(short, long)]
        branching: u8,
        #[arg(short, long)]
        depth: u8,
        cones: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Print a summary of a model file: poset, sheaves, constants, degrees.
    ShowModel {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn ok(stdout: String) -> Outcome {
    Outcome {
        exit_code: 0,
        stdout,
        stderr: String::new(),
    }
}

fn fail(code: i32, stderr: String) -> Outcome {
    Outcome {
        exit_code: code,
        stdout: String::new(),
        stderr,
    }
}

fn apply_cap_overrides(caps: &mut Caps, overrides: &[String]) -> Result<(), String> {
    for spec in overrides {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("cap override {spec:?} is not of the form name=value"))?;
        let value: usize = value
            .parse()
            .map_err(|_| format!("cap value {value:?} is not a number"))?;
        if value == 0 {
            return Err(format!("cap {key} must be positive"));
        }
        match key {
            "max-points" => caps.max_points = value,
            "max-stalk" => caps.max_stalk = value,
            "max-quantifier" | "max-quantifier-sections" => caps.max_quantifier_sections = value,
            other => return Err(format!("unknown cap {other:?}")),
        }
    }
    Ok(())
}

fn load_model(path: &PathBuf, cap_overrides: &[String]) -> Result<Model, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut file: ModelFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut caps = file.caps.unwrap_or_default();
    apply_cap_overrides(&mut caps, cap_overrides)?;
    file.caps = Some(caps);
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "model".to_string());
    Ok(modelfile::build_model(&file)
        .map_err(|e| e.to_string())?
        .with_label(label))
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Eval {
            model,
            formula,
            json,
            caps,
        } => cmd_eval(&model, &formula, json, &caps),
        Command::Suite {
            name,
            model,
            generate,
            seed,
            models,
            battery,
            json,
            caps,
        } => cmd_suite(&name, model, generate, seed, models, battery, json, &caps),
        Command::Lattice {
            model,
            op,
            operands,
            json,
        } => cmd_lattice(&model, &op, &operands, json),
        Command::Refine {
            branching,
            depth,
            cones,
            json,
        } => cmd_refine(branching, depth, &cones, json),
        Command::ShowModel { model, json } => cmd_show_model(&model, json),
    }
}

fn cmd_eval(path: &PathBuf, formula_text: &str, json: bool, caps: &[String]) -> Outcome {
    let model = match load_model(path, caps) {
        Ok(m) => m,
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    let formula = match parse_formula(formula_text) {
        Ok(f) => f,
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    let mut ev = Evaluator::new(&model);
    match ev.eval_formula(&formula) {
        Ok(value) => {
            let valid = value == model.base().full();
            let points = value.names(model.base());
            let stdout = if json {
                serde_json::json!({
                    "formula": formula.to_string(),
                    "value": points,
                    "valid": valid,
                })
                .to_string()
                    + "\n"
            } else {
                format!("value: {{{}}}\nvalid: {}\n", points.join(","), valid)
            };
            Outcome {
                exit_code: if valid { 0 } else { 2 },
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => fail(1, format!("error: {e}\n")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_suite(
    name: &str,
    model: Option<PathBuf>,
    generate: bool,
    seed: u64,
    models: Option<usize>,
    battery: Option<PathBuf>,
    json: bool,
    caps: &[String],
) -> Outcome {
    let suite_name: SuiteName = match name.parse() {
        Ok(n) => n,
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    let source = match (&model, generate) {
        (Some(path), false) => match load_model(path, caps) {
            Ok(m) => SuiteSource::Model(Box::new(m)),
            Err(e) => return fail(1, format!("error: {e}\n")),
        },
        (None, _) => SuiteSource::Generated {
            seed,
            count: models.unwrap_or_else(|| sheaflab_core::suite::default_count(suite_name)),
        },
        (Some(_), true) => {
            return fail(1, "error: pass either --model or --generate\n".to_string())
        }
    };
    let battery_text = match battery {
        None => None,
        Some(path) => match std::fs::read_to_string(&path) {
            Ok(text) => Some(text),
            Err(e) => return fail(1, format!("error: cannot read {}: {e}\n", path.display())),
        },
    };
    match run_suite(suite_name, source, battery_text.as_deref()) {
        Ok(report) => {
            let stdout = if json {
                report.render_json_lines()
            } else {
                report.render_text()
            };
            Outcome {
                exit_code: if report.ok() { 0 } else { 2 },
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => fail(1, format!("error: {e}\n")),
    }
}

fn cmd_lattice(path: &PathBuf, op: &str, operands: &[String], json: bool) -> Outcome {
    let model = match load_model(path, &[]) {
        Ok(m) => m,
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    let Some(ctx) = model.degree_context() else {
        return fail(1, "error: the model has no degree structure\n".to_string());
    };
    let ds = &ctx.ds;
    let op = match op {
        "sup" => WdegOp::Sup,
        "inf" => WdegOp::Inf,
        "imp" => WdegOp::Imp,
        "neg" => WdegOp::Neg,
        other => return fail(1, format!("error: unknown operation {other:?}\n")),
    };
    let arity = if op == WdegOp::Neg { 1 } else { 2 };
    if operands.len() != arity {
        return fail(
            1,
            format!(
                "error: operation takes {arity} operand(s), got {}\n",
                operands.len()
            ),
        );
    }
    let parse_problem = |text: &str| -> Result<MassProblem, String> {
        if text == "-" {
            return Ok(MassProblem::EMPTY);
        }
        let names: Vec<&str> = text.split(',').map(|s| s.trim()).collect();
        ds.problem_from_names(&names).map_err(|e| e.to_string())
    };
    let a = match parse_problem(&operands[0]) {
        Ok(p) => ds.weak_degree(p),
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    let b = if arity == 2 {
        match parse_problem(&operands[1]) {
            Ok(p) => ds.weak_degree(p),
            Err(e) => return fail(1, format!("error: {e}\n")),
        }
    } else {
        ds.top_degree()
    };
    let result = ds.wdeg_op(op, a, b);
    let upset = result.rep.names(ds.degrees());
    let mut notes = Vec::new();
    if result == ds.bottom_degree() {
        notes.push("bottom");
    }
    if result == ds.top_degree() {
        notes.push("top");
    }
    let stdout = if json {
        serde_json::json!({
            "upset": upset,
            "notes": notes,
        })
        .to_string()
            + "\n"
    } else {
        let suffix = if notes.is_empty() {
            String::new()
        } else {
            format!(" ({})", notes.join(","))
        };
        format!("upset: {{{}}}{suffix}\n", upset.join(","))
    };
    ok(stdout)
}

fn cmd_refine(branching: u8, depth: u8, cones: &[String], json: bool) -> Outcome {
    let mut parsed = Vec::new();
    for text in cones {
        match PrefixCone::parse(text) {
            Ok(c) => parsed.push(c),
            Err(e) => return fail(1, format!("error: bad cone {text:?}: {e}\n")),
        }
    }
    match refine_disjoint(&parsed, branching, depth) {
        Ok(out) => {
            let rendered: Vec<String> = out.iter().map(|c| c.render()).collect();
            let stdout = if json {
                serde_json::json!({ "cones": rendered }).to_string() + "\n"
            } else if rendered.is_empty() {
                "(empty)\n".to_string()
            } else {
                rendered.join("\n") + "\n"
            };
            ok(stdout)
        }
        Err(e) => fail(1, format!("error: {e}\n")),
    }
}

fn cmd_show_model(path: &PathBuf, json: bool) -> Outcome {
    let model = match load_model(path, &[]) {
        Ok(m) => m,
        Err(e) => return fail(1, format!("error: {e}\n")),
    };
    if json {
        let grounds: Vec<serde_json::Value> = model
            .grounds()
            .iter()
            .map(|(name, sheaf)| {
                let sizes: Vec<usize> = (0..model.base().len())
                    .map(|p| sheaf.stalk(p).len())
                    .collect();
                serde_json::json!({ "sort": name, "stalks": sizes })
            })
            .collect();
        let constants: Vec<serde_json::Value> = model
            .constants()
            .iter()
            .map(|(name, (sort, section))| {
                serde_json::json!({
                    "name": name,
                    "sort": sort.to_string(),
                    "extent": section.extent().names(model.base()),
                })
            })
            .collect();
        ok(serde_json::json!({
            "points": model.base().names(),
            "opens": model.base().all_opens().len(),
            "sorts": grounds,
            "constants": constants,
            "muchnik": model.degree_context().is_some(),
        })
        .to_string()
            + "\n")
    } else {
        ok(modelfile::describe(&model))
    }
}
