//! A compiler workbench for a small imperative language with an
//! interaction-tree semantics: bounded bisimulation checkers, validated
//! front-end passes, exact probabilistic interpretation, and game-based
//! security experiments.
//!
//! The runnable examples are the best entry point, one per capability:
//!
//! ```text
//! cargo run -p itc --example itree_basics          trees, combinators, observation
//! cargo run -p itc --example run_program           seeded program runs
//! cargo run -p itc --example distributions         exact result distributions
//! cargo run -p itc --example compile_and_validate  validated pass pipeline
//! cargo run -p itc --example alpha_equivalence     register-renaming checker
//! cargo run -p itc --example rhl_rules             rule-soundness harness
//! cargo run -p itc --example kem_experiment        IND-CCA advantages
//! cargo run -p itc --example preservation          advantage preservation
//! ```
//!
//! Sample `.itc` programs (including two toy KEMs) live in
//! `examples/programs/`. The same functionality is scriptable through the
//! thin `itc` binary; see [`cli`].
//!
//! Module map: [`itree`] is the semantic core; [`lang`] the surface
//! language; [`sem`] ties them together; [`equiv`] checks tree
//! equivalences; [`rhl`] checks relational tuples and hosts the checker
//! framework; [`passes`] transforms and validates programs; [`prob`]
//! interprets trees as exact distributions; [`crypto`] runs security
//! experiments; [`gen`] provides the seeded generators behind the
//! harnesses.

pub mod cli;
pub mod crypto;
pub mod equiv;
pub mod gen;
pub mod itree;
pub mod lang;
pub mod passes;
pub mod prob;
pub mod rhl;
pub mod sem;
