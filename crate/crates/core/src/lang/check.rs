//! Sort checking against a model signature.
//!
//! Checking annotates every leaf with its sort and reclassifies identifiers
//! that name model constants as `Const`. Each well-formed term has exactly
//! one sort, so checking is deterministic and principal.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Formula, Sort, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("unknown ground sort {0}")]
    UnknownGround(String),
    #[error("unknown variable or constant {0}")]
    UnknownIdent(String),
    #[error("{name} is annotated {annotated} but has sort {actual}")]
    AnnotationMismatch {
        name: String,
        annotated: Sort,
        actual: Sort,
    },
    #[error("equality operands have different sorts: {left} vs {right}")]
    EqMismatch { left: Sort, right: Sort },
    #[error("membership needs a right operand of sort P {left}, found {right}")]
    MemMismatch { left: Sort, right: Sort },
    #[error("projection applied to a term of non-product sort {0}")]
    ProjNotProduct(Sort),
    #[error("application head has non-function sort {0}")]
    AppNotFunction(Sort),
    #[error("function expects an argument of sort {expected}, found {found}")]
    AppArgMismatch { expected: Sort, found: Sort },
    #[error("'<=T' is only valid at the designated Muchnik-real sort, found operand of sort {0}")]
    LeTWrongSort(Sort),
    #[error("the model has no degree structure, so '<=T' is unavailable")]
    NoMuchnikSort,
    #[error("schema hole ?{0} must be instantiated before sort checking")]
    Hole(String),
}

/// Ground sorts and constant declarations visible to the checker.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub grounds: BTreeSet<String>,
    pub constants: BTreeMap<String, Sort>,
    /// The ground sort at which `<=T` atoms are admitted, when the model has
    /// a degree structure.
    pub muchnik_sort: Option<String>,
}

impl Signature {
    pub fn validate_sort(&self, s: &Sort) -> Result<(), SortError> {
        match s {
            Sort::Ground(g) => {
                if self.grounds.contains(g) {
                    Ok(())
                } else {
                    Err(SortError::UnknownGround(g.clone()))
                }
            }
            Sort::Product(a, b) | Sort::Function(a, b) => {
                self.validate_sort(a)?;
                self.validate_sort(b)
            }
            Sort::Power(a) => self.validate_sort(a),
        }
    }

    /// Checks and annotates a term; returns the rewritten term and its sort.
    pub fn check_term(&self, t: &Term) -> Result<(Term, Sort), SortError> {
        self.check_term_in(&mut Vec::new(), t)
    }

    fn check_term_in(
        &self,
        env: &mut Vec<(String, Sort)>,
        t: &Term,
    ) -> Result<(Term, Sort), SortError> {
        match t {
            Term::Var(x, ann) => {
                let bound = env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == x)
                    .map(|(_, s)| s.clone());
                let (rewritten, sort) = match bound {
                    Some(s) => (Term::Var(x.clone(), Some(s.clone())), s),
                    None => match self.constants.get(x) {
                        Some(s) => (Term::Const(x.clone(), Some(s.clone())), s.clone()),
                        None => return Err(SortError::UnknownIdent(x.clone())),
                    },
                };
                if let Some(a) = ann {
                    self.validate_sort(a)?;
                    if *a != sort {
                        return Err(SortError::AnnotationMismatch {
                            name: x.clone(),
                            annotated: a.clone(),
                            actual: sort,
                        });
                    }
                }
                Ok((rewritten, sort))
            }
            Term::Const(c, _) => match self.constants.get(c) {
                Some(s) => Ok((Term::Const(c.clone(), Some(s.clone())), s.clone())),
                None => Err(SortError::UnknownIdent(c.clone())),
            },
            Term::Pair(a, b) => {
                let (ta, sa) = self.check_term_in(env, a)?;
                let (tb, sb) = self.check_term_in(env, b)?;
                let sort = Sort::product(sa, sb);
                Ok((Term::Pair(Box::new(ta), Box::new(tb)), sort))
            }
            Term::Proj1(r) => {
                let (tr, sr) = self.check_term_in(env, r)?;
                match sr {
                    Sort::Product(a, _) => Ok((Term::Proj1(Box::new(tr)), *a)),
                    other => Err(SortError::ProjNotProduct(other)),
                }
            }
            Term::Proj2(r) => {
                let (tr, sr) = self.check_term_in(env, r)?;
                match sr {
                    Sort::Product(_, b) => Ok((Term::Proj2(Box::new(tr)), *b)),
                    other => Err(SortError::ProjNotProduct(other)),
                }
            }
            Term::App(f, a) => {
                let (tf, sf) = self.check_term_in(env, f)?;
                let (ta, sa) = self.check_term_in(env, a)?;
                match sf {
                    Sort::Function(dom, cod) => {
                        if *dom != sa {
                            return Err(SortError::AppArgMismatch {
                                expected: *dom,
                                found: sa,
                            });
                        }
                        Ok((Term::App(Box::new(tf), Box::new(ta)), *cod))
                    }
                    other => Err(SortError::AppNotFunction(other)),
                }
            }
            Term::Hole(h) => Err(SortError::Hole(h.clone())),
        }
    }

    /// Checks and annotates a formula. Free variables must be bound by
    /// quantifiers or resolvable as constants.
    pub fn check_formula(&self, f: &Formula) -> Result<Formula, SortError> {
        self.check_formula_in(&mut Vec::new(), f)
    }

    fn muchnik_operand(&self, sort: &Sort) -> Result<(), SortError> {
        match &self.muchnik_sort {
            None => Err(SortError::NoMuchnikSort),
            Some(m) => {
                if *sort == Sort::ground(m.clone()) {
                    Ok(())
                } else {
                    Err(SortError::LeTWrongSort(sort.clone()))
                }
            }
        }
    }

    fn check_formula_in(
        &self,
        env: &mut Vec<(String, Sort)>,
        f: &Formula,
    ) -> Result<Formula, SortError> {
        match f {
            Formula::Eq(a, b) => {
                let (ta, sa) = self.check_term_in(env, a)?;
                let (tb, sb) = self.check_term_in(env, b)?;
                if sa != sb {
                    return Err(SortError::EqMismatch {
                        left: sa,
                        right: sb,
                    });
                }
                Ok(Formula::Eq(ta, tb))
            }
            Formula::Mem(a, b) => {
                let (ta, sa) = self.check_term_in(env, a)?;
                let (tb, sb) = self.check_term_in(env, b)?;
                if sb != Sort::power(sa.clone()) {
                    return Err(SortError::MemMismatch {
                        left: sa,
                        right: sb,
                    });
                }
                Ok(Formula::Mem(ta, tb))
            }
            Formula::Defined(t) => {
                let (tt, _) = self.check_term_in(env, t)?;
                Ok(Formula::Defined(tt))
            }
            Formula::LeT(a, b) => {
                let (ta, sa) = self.check_term_in(env, a)?;
                let (tb, sb) = self.check_term_in(env, b)?;
                self.muchnik_operand(&sa)?;
                self.muchnik_operand(&sb)?;
                Ok(Formula::LeT(ta, tb))
            }
            Formula::LeTPair(a, b, c) => {
                let (ta, sa) = self.check_term_in(env, a)?;
                let (tb, sb) = self.check_term_in(env, b)?;
                let (tc, sc) = self.check_term_in(env, c)?;
                self.muchnik_operand(&sa)?;
                self.muchnik_operand(&sb)?;
                self.muchnik_operand(&sc)?;
                Ok(Formula::LeTPair(ta, tb, tc))
            }
            Formula::Not(g) => Ok(Formula::not(self.check_formula_in(env, g)?)),
            Formula::And(a, b) => Ok(Formula::and(
                self.check_formula_in(env, a)?,
                self.check_formula_in(env, b)?,
            )),
            Formula::Or(a, b) => Ok(Formula::or(
                self.check_formula_in(env, a)?,
                self.check_formula_in(env, b)?,
            )),
            Formula::Implies(a, b) => Ok(Formula::implies(
                self.check_formula_in(env, a)?,
                self.check_formula_in(env, b)?,
            )),
            Formula::Iff(a, b) => Ok(Formula::iff(
                self.check_formula_in(env, a)?,
                self.check_formula_in(env, b)?,
            )),
            Formula::Forall(x, s, g) => {
                self.validate_sort(s)?;
                env.push((x.clone(), s.clone()));
                let body = self.check_formula_in(env, g);
                env.pop();
                Ok(Formula::forall(x.clone(), s.clone(), body?))
            }
            Formula::Exists(x, s, g) => {
                self.validate_sort(s)?;
                env.push((x.clone(), s.clone()));
                let body = self.check_formula_in(env, g);
                env.pop();
                Ok(Formula::exists(x.clone(), s.clone(), body?))
            }
            Formula::Hole(h, _) => Err(SortError::Hole(h.clone())),
        }
    }
}
