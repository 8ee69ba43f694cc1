//! The many-sorted higher-order object language: sorts, terms, formulas, a
//! concrete grammar with parser, and a sort checker.
//!
//! Sorts are generated from ground sorts by product, function, and power
//! formation. Terms are variables, constants (sections named by a model),
//! pairing, projections, and application. Atomic formulas are equality,
//! membership, the existence predicate `E`, and in Muchnik mode the
//! reducibility atoms `r <=T s` and `r <=T (s,t)`. Schema files may also use
//! metavariable holes `?A`, `?A(x,..)`, `?t`; holes never reach the sort
//! checker or the evaluator.

mod check;
mod parse;

pub use check::{Signature, SortError};
pub use parse::{parse_formula, parse_sort, parse_term, ParseError};

use std::collections::BTreeSet;
use std::fmt;

/// A sort expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Ground(String),
    Product(Box<Sort>, Box<Sort>),
    Function(Box<Sort>, Box<Sort>),
    Power(Box<Sort>),
}

impl Sort {
    pub fn ground<S: Into<String>>(name: S) -> Sort {
        Sort::Ground(name.into())
    }

    pub fn product(a: Sort, b: Sort) -> Sort {
        Sort::Product(Box::new(a), Box::new(b))
    }

    pub fn function(a: Sort, b: Sort) -> Sort {
        Sort::Function(Box::new(a), Box::new(b))
    }

    pub fn power(a: Sort) -> Sort {
        Sort::Power(Box::new(a))
    }

    /// Replaces ground-sort names per the map (used for `?s`-style sort
    /// placeholders in schema files).
    pub fn substitute_grounds(&self, map: &std::collections::BTreeMap<String, Sort>) -> Sort {
        match self {
            Sort::Ground(g) => map.get(g).cloned().unwrap_or_else(|| self.clone()),
            Sort::Product(a, b) => {
                Sort::product(a.substitute_grounds(map), b.substitute_grounds(map))
            }
            Sort::Function(a, b) => {
                Sort::function(a.substitute_grounds(map), b.substitute_grounds(map))
            }
            Sort::Power(a) => Sort::power(a.substitute_grounds(map)),
        }
    }
}

/// A term. `Var` covers both parsed identifiers and checked bound variables;
/// the sort checker rewrites identifiers that name model constants to
/// `Const`. Sort slots are `None` until checking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Var(String, Option<Sort>),
    Const(String, Option<Sort>),
    Pair(Box<Term>, Box<Term>),
    Proj1(Box<Term>),
    Proj2(Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Schema metavariable standing for a term.
    Hole(String),
}

impl Term {
    pub fn var<S: Into<String>>(name: S) -> Term {
        Term::Var(name.into(), None)
    }

    pub fn constant<S: Into<String>>(name: S, sort: Sort) -> Term {
        Term::Const(name.into(), Some(sort))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// The sort of a checked term; `None` when the term has unchecked leaves.
    pub fn sort(&self) -> Option<Sort> {
        match self {
            Term::Var(_, s) | Term::Const(_, s) => s.clone(),
            Term::Pair(a, b) => Some(Sort::product(a.sort()?, b.sort()?)),
            Term::Proj1(t) => match t.sort()? {
                Sort::Product(a, _) => Some(*a),
                _ => None,
            },
            Term::Proj2(t) => match t.sort()? {
                Sort::Product(_, b) => Some(*b),
                _ => None,
            },
            Term::App(f, _) => match f.sort()? {
                Sort::Function(_, b) => Some(*b),
                _ => None,
            },
            Term::Hole(_) => None,
        }
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match self {
            Term::Var(x, _) => {
                if !bound.iter().any(|b| b == x) {
                    acc.insert(x.clone());
                }
            }
            Term::Const(_, _) | Term::Hole(_) => {}
            Term::Pair(a, b) | Term::App(a, b) => {
                a.free_vars_into(bound, acc);
                b.free_vars_into(bound, acc);
            }
            Term::Proj1(t) | Term::Proj2(t) => t.free_vars_into(bound, acc),
        }
    }

    fn substitute(&self, var: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(x, _) if x == var => replacement.clone(),
            Term::Var(_, _) | Term::Const(_, _) | Term::Hole(_) => self.clone(),
            Term::Pair(a, b) => Term::Pair(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
            Term::Proj1(t) => Term::Proj1(Box::new(t.substitute(var, replacement))),
            Term::Proj2(t) => Term::Proj2(Box::new(t.substitute(var, replacement))),
            Term::App(f, a) => Term::App(
                Box::new(f.substitute(var, replacement)),
                Box::new(a.substitute(var, replacement)),
            ),
        }
    }
}

/// A formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Mem(Term, Term),
    /// The existence predicate `E t`.
    Defined(Term),
    /// `r <=T s` (Muchnik mode only).
    LeT(Term, Term),
    /// `r <=T (s, t)` (Muchnik mode only).
    LeTPair(Term, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    /// Schema metavariable with instantiation arguments.
    Hole(String, Vec<Term>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn forall<S: Into<String>>(x: S, s: Sort, f: Formula) -> Formula {
        Formula::Forall(x.into(), s, Box::new(f))
    }
    pub fn exists<S: Into<String>>(x: S, s: Sort, f: Formula) -> Formula {
        Formula::Exists(x.into(), s, Box::new(f))
    }

    /// Number of connective and quantifier occurrences.
    pub fn complexity(&self) -> usize {
        match self {
            Formula::Eq(_, _)
            | Formula::Mem(_, _)
            | Formula::Defined(_)
            | Formula::LeT(_, _)
            | Formula::LeTPair(_, _, _)
            | Formula::Hole(_, _) => 0,
            Formula::Not(f) => 1 + f.complexity(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.complexity() + b.complexity(),
            Formula::Forall(_, _, f) | Formula::Exists(_, _, f) => 1 + f.complexity(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut acc = BTreeSet::new();
        let mut bound = Vec::new();
        self.free_vars_into(&mut bound, &mut acc);
        acc
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(a, b) | Formula::Mem(a, b) | Formula::LeT(a, b) => {
                a.free_vars_into(bound, acc);
                b.free_vars_into(bound, acc);
            }
            Formula::LeTPair(a, b, c) => {
                a.free_vars_into(bound, acc);
                b.free_vars_into(bound, acc);
                c.free_vars_into(bound, acc);
            }
            Formula::Defined(t) => t.free_vars_into(bound, acc),
            Formula::Not(f) => f.free_vars_into(bound, acc),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.free_vars_into(bound, acc);
                b.free_vars_into(bound, acc);
            }
            Formula::Forall(x, _, f) | Formula::Exists(x, _, f) => {
                bound.push(x.clone());
                f.free_vars_into(bound, acc);
                bound.pop();
            }
            Formula::Hole(_, args) => {
                for t in args {
                    t.free_vars_into(bound, acc);
                }
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Substitutes a term for the free occurrences of a variable. Binders for
    /// the same name shadow as usual; the substituted terms used in this
    /// crate are closed, so capture cannot occur.
    pub fn substitute_var(&self, var: &str, replacement: &Term) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
            Formula::Mem(a, b) => Formula::Mem(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
            Formula::LeT(a, b) => Formula::LeT(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
            Formula::LeTPair(a, b, c) => Formula::LeTPair(
                a.substitute(var, replacement),
                b.substitute(var, replacement),
                c.substitute(var, replacement),
            ),
            Formula::Defined(t) => Formula::Defined(t.substitute(var, replacement)),
            Formula::Not(f) => Formula::not(f.substitute_var(var, replacement)),
            Formula::And(a, b) => Formula::and(
                a.substitute_var(var, replacement),
                b.substitute_var(var, replacement),
            ),
            Formula::Or(a, b) => Formula::or(
                a.substitute_var(var, replacement),
                b.substitute_var(var, replacement),
            ),
            Formula::Implies(a, b) => Formula::implies(
                a.substitute_var(var, replacement),
                b.substitute_var(var, replacement),
            ),
            Formula::Iff(a, b) => Formula::iff(
                a.substitute_var(var, replacement),
                b.substitute_var(var, replacement),
            ),
            Formula::Forall(x, s, f) if x != var => {
                Formula::forall(x.clone(), s.clone(), f.substitute_var(var, replacement))
            }
            Formula::Exists(x, s, f) if x != var => {
                Formula::exists(x.clone(), s.clone(), f.substitute_var(var, replacement))
            }
            Formula::Forall(_, _, _) | Formula::Exists(_, _, _) => self.clone(),
            Formula::Hole(h, args) => Formula::Hole(
                h.clone(),
                args.iter()
                    .map(|t| t.substitute(var, replacement))
                    .collect(),
            ),
        }
    }

    /// Substitutes a named constant for a variable (the quantifier-clause
    /// form of substitution).
    pub fn substitute_constant(&self, var: &str, name: &str, sort: Sort) -> Formula {
        self.substitute_var(var, &Term::constant(name, sort))
    }

    /// Replaces sort placeholders throughout.
    pub fn substitute_sorts(&self, map: &std::collections::BTreeMap<String, Sort>) -> Formula {
        let on_term = |t: &Term| substitute_term_sorts(t, map);
        match self {
            Formula::Eq(a, b) => Formula::Eq(on_term(a), on_term(b)),
            Formula::Mem(a, b) => Formula::Mem(on_term(a), on_term(b)),
            Formula::LeT(a, b) => Formula::LeT(on_term(a), on_term(b)),
            Formula::LeTPair(a, b, c) => Formula::LeTPair(on_term(a), on_term(b), on_term(c)),
            Formula::Defined(t) => Formula::Defined(on_term(t)),
            Formula::Not(f) => Formula::not(f.substitute_sorts(map)),
            Formula::And(a, b) => Formula::and(a.substitute_sorts(map), b.substitute_sorts(map)),
            Formula::Or(a, b) => Formula::or(a.substitute_sorts(map), b.substitute_sorts(map)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute_sorts(map), b.substitute_sorts(map))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute_sorts(map), b.substitute_sorts(map)),
            Formula::Forall(x, s, f) => Formula::forall(
                x.clone(),
                s.substitute_grounds(map),
                f.substitute_sorts(map),
            ),
            Formula::Exists(x, s, f) => Formula::exists(
                x.clone(),
                s.substitute_grounds(map),
                f.substitute_sorts(map),
            ),
            Formula::Hole(h, args) => Formula::Hole(h.clone(), args.iter().map(on_term).collect()),
        }
    }

    /// Names of formula holes, with their arities.
    pub fn holes(&self) -> std::collections::BTreeMap<String, usize> {
        let mut acc = std::collections::BTreeMap::new();
        self.holes_into(&mut acc);
        acc
    }

    fn holes_into(&self, acc: &mut std::collections::BTreeMap<String, usize>) {
        match self {
            Formula::Hole(h, args) => {
                acc.insert(h.clone(), args.len());
            }
            Formula::Not(f) | Formula::Forall(_, _, f) | Formula::Exists(_, _, f) => {
                f.holes_into(acc)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.holes_into(acc);
                b.holes_into(acc);
            }
            _ => {}
        }
    }
}

fn substitute_term_sorts(t: &Term, map: &std::collections::BTreeMap<String, Sort>) -> Term {
    match t {
        Term::Var(x, s) => Term::Var(x.clone(), s.as_ref().map(|s| s.substitute_grounds(map))),
        Term::Const(c, s) => Term::Const(c.clone(), s.as_ref().map(|s| s.substitute_grounds(map))),
        Term::Pair(a, b) => Term::Pair(
            Box::new(substitute_term_sorts(a, map)),
            Box::new(substitute_term_sorts(b, map)),
        ),
        Term::Proj1(a) => Term::Proj1(Box::new(substitute_term_sorts(a, map))),
        Term::Proj2(a) => Term::Proj2(Box::new(substitute_term_sorts(a, map))),
        Term::App(f, a) => Term::App(
            Box::new(substitute_term_sorts(f, map)),
            Box::new(substitute_term_sorts(a, map)),
        ),
        Term::Hole(_) => t.clone(),
    }
}

/// A formula template with named parameters, for hole instantiation.
#[derive(Debug, Clone)]
pub struct HoleTemplate {
    pub params: Vec<String>,
    pub body: Formula,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HoleError {
    #[error("no template provided for hole ?{0}")]
    Missing(String),
    #[error("hole ?{name} applied to {got} arguments but its template takes {want}")]
    Arity {
        name: String,
        got: usize,
        want: usize,
    },
}

/// Instantiates formula holes from templates and term holes from terms.
pub fn instantiate(
    f: &Formula,
    formula_holes: &std::collections::BTreeMap<String, HoleTemplate>,
    term_holes: &std::collections::BTreeMap<String, Term>,
) -> Result<Formula, HoleError> {
    let on_term = |t: &Term| instantiate_term(t, term_holes);
    Ok(match f {
        Formula::Hole(h, args) => {
            let tpl = formula_holes
                .get(h)
                .ok_or_else(|| HoleError::Missing(h.clone()))?;
            if tpl.params.len() != args.len() {
                return Err(HoleError::Arity {
                    name: h.clone(),
                    got: args.len(),
                    want: tpl.params.len(),
                });
            }
            let mut body = tpl.body.clone();
            for (param, arg) in tpl.params.iter().zip(args) {
                body = body.substitute_var(param, &on_term(arg)?);
            }
            body
        }
        Formula::Eq(a, b) => Formula::Eq(on_term(a)?, on_term(b)?),
        Formula::Mem(a, b) => Formula::Mem(on_term(a)?, on_term(b)?),
        Formula::LeT(a, b) => Formula::LeT(on_term(a)?, on_term(b)?),
        Formula::LeTPair(a, b, c) => Formula::LeTPair(on_term(a)?, on_term(b)?, on_term(c)?),
        Formula::Defined(t) => Formula::Defined(on_term(t)?),
        Formula::Not(g) => Formula::not(instantiate(g, formula_holes, term_holes)?),
        Formula::And(a, b) => Formula::and(
            instantiate(a, formula_holes, term_holes)?,
            instantiate(b, formula_holes, term_holes)?,
        ),
        Formula::Or(a, b) => Formula::or(
            instantiate(a, formula_holes, term_holes)?,
            instantiate(b, formula_holes, term_holes)?,
        ),
        Formula::Implies(a, b) => Formula::implies(
            instantiate(a, formula_holes, term_holes)?,
            instantiate(b, formula_holes, term_holes)?,
        ),
        Formula::Iff(a, b) => Formula::iff(
            instantiate(a, formula_holes, term_holes)?,
            instantiate(b, formula_holes, term_holes)?,
        ),
        Formula::Forall(x, s, g) => Formula::forall(
            x.clone(),
            s.clone(),
            instantiate(g, formula_holes, term_holes)?,
        ),
        Formula::Exists(x, s, g) => Formula::exists(
            x.clone(),
            s.clone(),
            instantiate(g, formula_holes, term_holes)?,
        ),
    })
}

fn instantiate_term(
    t: &Term,
    term_holes: &std::collections::BTreeMap<String, Term>,
) -> Result<Term, HoleError> {
    Ok(match t {
        Term::Hole(h) => term_holes
            .get(h)
            .ok_or_else(|| HoleError::Missing(h.clone()))?
            .clone(),
        Term::Var(_, _) | Term::Const(_, _) => t.clone(),
        Term::Pair(a, b) => Term::Pair(
            Box::new(instantiate_term(a, term_holes)?),
            Box::new(instantiate_term(b, term_holes)?),
        ),
        Term::Proj1(a) => Term::Proj1(Box::new(instantiate_term(a, term_holes)?)),
        Term::Proj2(a) => Term::Proj2(Box::new(instantiate_term(a, term_holes)?)),
        Term::App(f, a) => Term::App(
            Box::new(instantiate_term(f, term_holes)?),
            Box::new(instantiate_term(a, term_holes)?),
        ),
    })
}

// ---------------------------------------------------------------------------
// Canonical printing. The printer emits the minimal-paren form accepted by
// the parser; quantifier bodies extend maximally right, so quantified
// subformulas are parenthesized whenever they are proper operands.
// ---------------------------------------------------------------------------

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Sort {
    // prec: 0 = any (function level), 1 = product operand, 2 = power operand.
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Sort::Ground(g) => write!(f, "{g}"),
            Sort::Function(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Sort::Product(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 2)?; // '*' is left-associative
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Sort::Power(a) => {
                write!(f, "P ")?;
                a.fmt_prec(f, 2)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Term {
    // prec: 0 = application chain allowed, 1 = operand position (atmodels).
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Term::Var(x, _) => write!(f, "{x}"),
            Term::Const(c, _) => write!(f, "{c}"),
            Term::Hole(h) => write!(f, "?{h}"),
            Term::Pair(a, b) => write!(f, "<{a}, {b}>"),
            Term::Proj1(t) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                write!(f, "fst ")?;
                t.fmt_prec(f, 1)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::Proj2(t) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                write!(f, "snd ")?;
                t.fmt_prec(f, 1)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::App(g, a) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                g.fmt_prec(f, 0)?;
                write!(f, " ")?;
                a.fmt_prec(f, 1)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Formula {
    // prec levels: 0 top/quant-body, 1 iff, 2 implies, 3 or, 4 and, 5 not.
    fn prec(&self) -> u8 {
        match self {
            Formula::Forall(_, _, _) | Formula::Exists(_, _, _) => 0,
            Formula::Iff(_, _) => 1,
            Formula::Implies(_, _) => 2,
            Formula::Or(_, _) => 3,
            Formula::And(_, _) => 4,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let mine = self.prec();
        let parens = mine < prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Mem(a, b) => write!(f, "{a} in {b}")?,
            Formula::Defined(t) => {
                write!(f, "E ")?;
                t.fmt_prec(f, 1)?;
            }
            Formula::LeT(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " <=T ")?;
                b.fmt_prec(f, 1)?;
            }
            Formula::LeTPair(a, b, c) => {
                a.fmt_prec(f, 1)?;
                write!(f, " <=T ({b}, {c})")?;
            }
            Formula::Not(g) => {
                write!(f, "~ ")?;
                g.fmt_prec(f, 5)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, " /\\ ")?;
                b.fmt_prec(f, 5)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " \\/ ")?;
                b.fmt_prec(f, 4)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " => ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Iff(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " <=> ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Forall(x, s, g) => {
                write!(f, "forall {x}:{s}. ")?;
                g.fmt_prec(f, 0)?;
            }
            Formula::Exists(x, s, g) => {
                write!(f, "exists {x}:{s}. ")?;
                g.fmt_prec(f, 0)?;
            }
            Formula::Hole(h, args) => {
                write!(f, "?{h}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (k, t) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{t}")?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig() -> Signature {
        let mut grounds = std::collections::BTreeSet::new();
        grounds.insert("s".to_string());
        grounds.insert("t".to_string());
        grounds.insert("r".to_string());
        let mut constants = std::collections::BTreeMap::new();
        constants.insert("a".to_string(), Sort::ground("s"));
        constants.insert("b".to_string(), Sort::ground("s"));
        constants.insert("c".to_string(), Sort::ground("t"));
        constants.insert(
            "f".to_string(),
            Sort::function(Sort::ground("s"), Sort::ground("t")),
        );
        constants.insert("S".to_string(), Sort::power(Sort::ground("s")));
        constants.insert("u".to_string(), Sort::ground("r"));
        constants.insert("v".to_string(), Sort::ground("r"));
        Signature {
            grounds,
            constants,
            muchnik_sort: Some("r".to_string()),
        }
    }

    #[test]
    fn parse_sort_examples() {
        assert_eq!(
            parse_sort("P (s * t)").unwrap(),
            Sort::power(Sort::product(Sort::ground("s"), Sort::ground("t")))
        );
        // '*' binds tighter than '->', '->' is right-associative.
        assert_eq!(
            parse_sort("s * t -> s -> t").unwrap(),
            Sort::function(
                Sort::product(Sort::ground("s"), Sort::ground("t")),
                Sort::function(Sort::ground("s"), Sort::ground("t"))
            )
        );
        // 'P' binds tightest.
        assert_eq!(
            parse_sort("P s -> t").unwrap(),
            Sort::function(Sort::power(Sort::ground("s")), Sort::ground("t"))
        );
    }

    #[test]
    fn parse_formula_examples() {
        let f = parse_formula("forall x:s. exists y:t. E <x, y>").unwrap();
        match f {
            Formula::Forall(x, s, body) => {
                assert_eq!(x, "x");
                assert_eq!(s, Sort::ground("s"));
                assert!(matches!(*body, Formula::Exists(_, _, _)));
            }
            other => panic!("unexpected {other:?}"),
        }

        // Comparison chaining is forbidden.
        let err = parse_formula("x = y in z").unwrap_err();
        assert!(err.msg.contains("chaining"));
        let err = parse_formula("x = y = z").unwrap_err();
        assert!(err.msg.contains("chaining"));

        // Quantifier scope extends maximally right.
        let f = parse_formula("forall x:s. x = x /\\ E x").unwrap();
        match f {
            Formula::Forall(_, _, body) => assert!(matches!(*body, Formula::And(_, _))),
            other => panic!("unexpected {other:?}"),
        }

        // Precedence: ~ > /\ > \/ > => (right assoc) > <=>.
        let f = parse_formula("~ E a /\\ E b \\/ E c => E a <=> E b").unwrap();
        assert!(matches!(f, Formula::Iff(_, _)));
        let g = parse_formula("E a => E b => E c").unwrap();
        match g {
            Formula::Implies(_, rhs) => assert!(matches!(*rhs, Formula::Implies(_, _))),
            other => panic!("unexpected {other:?}"),
        }

        // Application is left-associative; fst/snd are prefix.
        let t = parse_term("f x y").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y"))
        );
        let t = parse_term("fst <a, b>").unwrap();
        assert!(matches!(t, Term::Proj1(_)));

        // Muchnik atoms, both forms.
        assert!(matches!(
            parse_formula("u <=T v").unwrap(),
            Formula::LeT(_, _)
        ));
        assert!(matches!(
            parse_formula("u <=T (v, u)").unwrap(),
            Formula::LeTPair(_, _, _)
        ));
        // Parenthesized plain bound.
        assert!(matches!(
            parse_formula("u <=T (v)").unwrap(),
            Formula::LeT(_, _)
        ));

        // Position information.
        let err = parse_formula("E a /\\\n  %").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col >= 3);
    }

    #[test]
    fn parse_hole_forms() {
        assert_eq!(
            parse_formula("?A").unwrap(),
            Formula::Hole("A".into(), vec![])
        );
        let f = parse_formula("?A(x, y) => ?B").unwrap();
        match f {
            Formula::Implies(lhs, rhs) => {
                assert_eq!(
                    *lhs,
                    Formula::Hole("A".into(), vec![Term::var("x"), Term::var("y")])
                );
                assert_eq!(*rhs, Formula::Hole("B".into(), vec![]));
            }
            other => panic!("unexpected {other:?}"),
        }
        // A bare hole followed by a comparison is a term hole.
        assert!(matches!(
            parse_formula("?r = a").unwrap(),
            Formula::Eq(Term::Hole(_), _)
        ));
    }

    #[test]
    fn sort_check_examples() {
        let sig = sig();
        let ok = sig.check_formula(&parse_formula("a = b").unwrap()).unwrap();
        match ok {
            Formula::Eq(Term::Const(_, Some(s)), _) => assert_eq!(s, Sort::ground("s")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            sig.check_formula(&parse_formula("a = c").unwrap()),
            Err(SortError::EqMismatch { .. })
        ));
        assert!(sig.check_formula(&parse_formula("a in S").unwrap()).is_ok());
        assert!(matches!(
            sig.check_formula(&parse_formula("a in b").unwrap()),
            Err(SortError::MemMismatch { .. })
        ));
        let (t, s) = sig.check_term(&parse_term("f a").unwrap()).unwrap();
        assert_eq!(s, Sort::ground("t"));
        assert!(matches!(t, Term::App(_, _)));
        assert!(matches!(
            sig.check_term(&parse_term("f c").unwrap()),
            Err(SortError::AppArgMismatch { .. })
        ));
        assert!(matches!(
            sig.check_term(&parse_term("a q").unwrap()),
            Err(SortError::UnknownIdent(_))
        ));
        assert!(matches!(
            sig.check_formula(&parse_formula("fst a = a").unwrap()),
            Err(SortError::ProjNotProduct(_))
        ));

        // <=T is sort-gated to the designated Muchnik sort.
        assert!(sig
            .check_formula(&parse_formula("u <=T v").unwrap())
            .is_ok());
        assert!(matches!(
            sig.check_formula(&parse_formula("a <=T b").unwrap()),
            Err(SortError::LeTWrongSort(_))
        ));
        let mut no_muchnik = sig.clone();
        no_muchnik.muchnik_sort = None;
        assert!(matches!(
            no_muchnik.check_formula(&parse_formula("u <=T v").unwrap()),
            Err(SortError::NoMuchnikSort)
        ));

        // Bound variables shadow constants.
        let f = parse_formula("forall a:t. a = c").unwrap();
        assert!(sig.check_formula(&f).is_ok());

        // Annotations must agree with the binder.
        let f = parse_formula("forall x:s. x:t = x").unwrap();
        assert!(matches!(
            sig.check_formula(&f),
            Err(SortError::AnnotationMismatch { .. })
        ));
    }

    #[test]
    fn substitution_and_complexity() {
        let f = parse_formula("x = x").unwrap();
        let g = f.substitute_constant("x", "a", Sort::ground("s"));
        assert_eq!(g.to_string(), "a = a");

        let f = parse_formula("forall x:s. x = y").unwrap();
        assert_eq!(
            f.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["y".to_string()]
        );
        assert!(!f.is_sentence());

        // complexity counts connective and quantifier occurrences.
        let f = parse_formula("~ (E a /\\ E b)").unwrap();
        assert_eq!(f.complexity(), 2);
        let f = parse_formula("forall x:s. ~ x = x").unwrap();
        assert_eq!(f.complexity(), 2);

        // Shadowed binders stop substitution.
        let f = parse_formula("E x /\\ (forall x:s. E x)").unwrap();
        let g = f.substitute_constant("x", "a", Sort::ground("s"));
        assert_eq!(g.to_string(), "E a /\\ (forall x:s. E x)");
    }

    #[test]
    fn hole_instantiation() {
        let schema = parse_formula("(forall x:?s. ?A(x)) /\\ E ?t => ?A(?t)").unwrap();
        let mut sorts = std::collections::BTreeMap::new();
        sorts.insert("?s".to_string(), Sort::ground("s"));
        let schema = schema.substitute_sorts(&sorts);
        let mut formula_holes = std::collections::BTreeMap::new();
        formula_holes.insert(
            "A".to_string(),
            HoleTemplate {
                params: vec!["x".to_string()],
                body: parse_formula("x = a").unwrap(),
            },
        );
        let mut term_holes = std::collections::BTreeMap::new();
        term_holes.insert("t".to_string(), Term::var("b"));
        let inst = instantiate(&schema, &formula_holes, &term_holes).unwrap();
        assert_eq!(inst.to_string(), "(forall x:s. x = a) /\\ E b => b = a");
        assert!(sig().check_formula(&inst).is_ok());

        // complexity is preserved under constant substitution.
        let f = parse_formula("forall y:s. y = x \\/ ~ E y").unwrap();
        let g = f.substitute_constant("x", "a", Sort::ground("s"));
        assert_eq!(f.complexity(), g.complexity());
    }

    // ---- round-trip property tests ---------------------------------------

    fn arb_sort() -> impl Strategy<Value = Sort> {
        let leaf = prop_oneof![
            Just(Sort::ground("s")),
            Just(Sort::ground("t")),
            Just(Sort::ground("r")),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Sort::product(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Sort::function(a, b)),
                inner.prop_map(Sort::power),
            ]
        })
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::var("x")),
            Just(Term::var("y")),
            Just(Term::var("a")),
            Just(Term::Hole("t".to_string())),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::Pair(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Term::Proj1(Box::new(a))),
                inner.clone().prop_map(|a| Term::Proj2(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(a, b)),
            ]
        })
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::Eq(a, b)),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::Mem(a, b)),
            arb_term().prop_map(Formula::Defined),
            (arb_term(), arb_term()).prop_map(|(a, b)| Formula::LeT(a, b)),
            (arb_term(), arb_term(), arb_term()).prop_map(|(a, b, c)| Formula::LeTPair(a, b, c)),
            Just(Formula::Hole("A".to_string(), vec![])),
        ];
        atom.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
                (arb_sort(), inner.clone()).prop_map(|(s, f)| Formula::forall("x", s, f)),
                (arb_sort(), inner.clone()).prop_map(|(s, f)| Formula::exists("y", s, f)),
            ]
        })
    }

    proptest! {
        #[test]
        fn sort_roundtrip(s in arb_sort()) {
            prop_assert_eq!(parse_sort(&s.to_string()).unwrap(), s);
        }

        #[test]
        fn term_roundtrip(t in arb_term()) {
            prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }

        #[test]
        fn formula_roundtrip(f in arb_formula()) {
            let printed = f.to_string();
            prop_assert_eq!(parse_formula(&printed).unwrap(), f);
        }

        #[test]
        fn canonical_print_is_stable(f in arb_formula()) {
            let printed = f.to_string();
            let reparsed = parse_formula(&printed).unwrap();
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
