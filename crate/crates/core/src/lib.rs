//! Satisfiability toolkit for a two-sorted quantified fragment of set
//! theory, interpreted over hereditarily finite sets.
//!
//! The language has set variables (`x`, `y`, ...) and map variables
//! (`@f`, `@g`, ..., denoting sets of ordered pairs), membership and
//! equality atoms, and quantifiers restricted to members of a variable
//! (`forall x in y`, `forall [x,y] in @f`). The crate provides:
//!
//! * [`hf`] — canonical hereditarily finite sets and pairing functions;
//! * [`ast`] — syntax, parser, printer and well-formedness diagnostics;
//! * [`semantics`] — pair-aware interpretations and the truth evaluator;
//! * [`normalize`] — reduction of arbitrary formulas to streams of
//!   normalized conjunctions of universal prenex formulas;
//! * [`reduction`] — the `tau` translation into a set-variables-only
//!   language with `nonpairs` terms, and constructive model transfer in
//!   both directions;
//! * [`solver`] — bounded model search plus an exhaustive enumeration
//!   oracle for small instances;
//! * [`constructs`] — a macro library of derived set/map constructs with
//!   an independent semantic oracle;
//! * [`encoders`] — propositional, domino-tiling and Peano-system
//!   encodings used by the hardness experiments.
//!
//! A `Sat` answer always carries a model that the evaluator re-verifies.
//! The absence of a model only ever holds relative to the search bound:
//! the tool never claims unsatisfiability outright.

pub mod ast;
pub mod constructs;
pub mod encoders;
pub mod hf;
pub mod normalize;
pub mod prop;
pub mod reduction;
pub mod semantics;
pub mod solver;

pub use ast::{Formula, NormalizedConjunction, Sort, Variable};
pub use hf::{HFSet, PairingSpec};
pub use semantics::Interpretation;
// pub use solver::{SatResult, SearchBound};
