//! Syntax-guided synthesis for linear integer arithmetic with booleans.
//!
//! Two engines are provided: counterexample-guided quantifier instantiation
//! for single-invocation conjectures, and enumerative search over grammar
//! datatypes with symmetry breaking. The driver in [`frontend`] picks between
//! them based on [`classify`].

pub mod cegqi;
pub mod classify;
pub mod enumerate;
pub mod frontend;
pub mod rewrite;
pub mod solver;
pub mod term;

#[cfg(test)]
mod testutil;
