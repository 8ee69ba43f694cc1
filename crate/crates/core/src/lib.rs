//! Finite-model laboratory for sheaf semantics over poset spaces.
//!
//! The crate computes truth values of sentences of a many-sorted
//! higher-order language in sheaf models over finite posets carrying the
//! Alexandrov topology, where the algebra of upward-closed sets plays the
//! role of the Heyting algebra of truth values.  On top of the evaluator it
//! provides schema checkers for choice and bounding principles, a
//! Muchnik-degree lattice calculus over finite oracle preorders, and the
//! disjoint-refinement procedure for bounded prefix cones.
//!
//! Entry points:
//! - [`poset::Poset`] and [`poset::OpenSet`]: finite posets and their open
//!   (upward-closed) sets.
//! - [`sheaf::Sheaf`] and [`sheaf::Section`]: finite sheaves in functor form
//!   with derived section structure.
//! - [`lang`]: parser and sort checker for the object language.
//! - [`semantics::Model`] and [`semantics::Evaluator`]: the truth-value
//!   assignment and schema checking.
//! - [`muchnik`]: mass problems, weak degrees, and the degree-lattice
//!   operations.
//! - [`baire`]: bounded prefix cones and disjoint refinement.
//! - [`modelfile`], [`generate`], [`suite`]: JSON model files, seeded random
//!   model generation, and the test batteries used by the CLI.

pub mod baire;
pub mod caps;
pub mod generate;
pub mod lang;
pub mod modelfile;
pub mod muchnik;
pub mod poset;
pub mod report;
pub mod semantics;
pub mod sheaf;
pub mod suite;

pub use caps::Caps;
pub use poset::{OpenSet, Poset};
