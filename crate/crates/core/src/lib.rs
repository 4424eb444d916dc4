//! Termination proofs for linear loop programs.
//!
//! A loop relation is checked against a pool of linear ranking templates.
//! For each template the `∃∀` inclusion condition is turned into an
//! existential nonlinear constraint via Motzkin's transposition theorem,
//! handed to an external SMT solver, and a satisfying assignment is turned
//! into an ordinal-valued ranking function that is then certified on a grid.

pub mod constraint;
pub mod loop_ir;
pub mod model;
pub mod motzkin;
pub mod oracle;
pub mod prover;
pub mod ranking;
pub mod rational;
pub mod solver;
pub mod template;

pub use model::Model;
pub use rational::Rational;
