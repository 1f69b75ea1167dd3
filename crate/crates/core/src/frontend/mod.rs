//! Problem input, solution output, and the strategy driver.

mod driver;
mod parse;
mod sexpr;

use std::fmt::Write as _;

use crate::term::Solution;

pub use driver::{solve, verify_solution, Mode, SolveOutput, SolverConfig, Stats, Strategy};
pub use parse::{parse_problem, InputError};
pub use sexpr::{parse_sexps, ParseError, Pos, Sexp};

/// One `define-fun` line per function.
pub fn print_solution(s: &Solution) -> String {
    let mut out = String::new();
    for (name, lam) in s.iter() {
        let params: Vec<String> = lam.params.iter().map(|p| format!("({} {})", p.name, p.sort)).collect();
        let ret = lam.body.sort_of().map_or_else(|_| "Int".to_string(), |s| s.to_string());
        let _ = writeln!(out, "(define-fun {name} ({}) {ret} {})", params.join(" "), lam.body);
    }
    out
}
