//! Counterexample-guided quantifier instantiation for single-invocation
//! conjectures, solution extraction, and grammar-directed reconstruction.

mod reconstruct;
mod select;

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::classify::FirstOrderForm;
use crate::rewrite::normalize;
use crate::solver::{check_sat_with, SatResult, SolverError, SolverOptions, DEFAULT_LIMIT};
use crate::term::{substitute, Assignment, Lambda, Op, Solution, Symbol, Term};

pub use reconstruct::{reconstruct, reconstruct_term, ReconstructError, ReconstructOptions};

/// Instantiation terms in the order they were chosen, with the instances of
/// the negated body they produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstanceTrace {
    /// One tuple per iteration, one term per function.
    pub instances: Vec<Vec<Term>>,
    /// `¬P[t̄ᵢ, x̄]` for each tuple.
    pub gamma: Vec<Term>,
}

impl InstanceTrace {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaveUpReason {
    IterationCap,
    /// The body could not be put in a form the selection handles.
    BodyNotSupported,
    /// The negated conjecture has a model no instance can refute.
    Unrealizable,
    Timeout,
    Solver(SolverError),
}

impl fmt::Display for GaveUpReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaveUpReason::IterationCap => f.write_str("iteration-cap"),
            GaveUpReason::BodyNotSupported => f.write_str("body-not-supported"),
            GaveUpReason::Unrealizable => f.write_str("unrealizable"),
            GaveUpReason::Timeout => f.write_str("timeout"),
            GaveUpReason::Solver(e) => write!(f, "solver: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CegqiResult {
    Solved { trace: InstanceTrace, solution: Solution },
    GaveUp { reason: GaveUpReason, trace: InstanceTrace },
}

#[derive(Clone, Debug)]
pub struct CegqiOptions {
    pub max_iters: usize,
    /// Work limit for each ground solver call.
    pub solver_limit: u64,
    pub deadline: Option<Instant>,
}

impl Default for CegqiOptions {
    fn default() -> Self {
        CegqiOptions {
            max_iters: 64,
            solver_limit: DEFAULT_LIMIT,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("no instances to extract from")]
    EmptyTrace,
    #[error("extracted body mentions {0}, which is not a parameter")]
    FreeVariable(String),
}

/// The constraint `P[z̄, x̄]` underneath the negation of the first-order body.
fn positive_body(fo: &FirstOrderForm) -> Term {
    match &fo.body {
        Term::App(Op::Not, args) => args[0].clone(),
        b => Term::not(b.clone()),
    }
}

fn instance_map(fo: &FirstOrderForm, terms: &[Term]) -> HashMap<Symbol, Term> {
    fo.instvars
        .iter()
        .zip(terms)
        .map(|(z, t)| (z.name.clone(), t.clone()))
        .collect()
}

/// Instantiation terms for the instantiation variables of `fo`, chosen from
/// `model`, a model of the un-negated body. Prefers a satisfied equality, then
/// the greatest lower bound, then the least upper bound, then the model value.
pub fn select_terms(model: &Assignment, fo: &FirstOrderForm) -> Vec<Term> {
    let p = positive_body(fo);
    match select::lift_conditionals(&p, &fo.instvars) {
        Some(lifted) => select::select_in(model, &fo.instvars, &lifted),
        None => select::select_in(model, &fo.instvars, &Term::Bool(true)),
    }
}

pub fn solve_cegqi(fo: &FirstOrderForm, opts: &CegqiOptions) -> CegqiResult {
    let mut trace = InstanceTrace::default();
    let p = positive_body(fo);
    let Some(lifted) = select::lift_conditionals(&p, &fo.instvars) else {
        return CegqiResult::GaveUp {
            reason: GaveUpReason::BodyNotSupported,
            trace,
        };
    };
    let sat_opts = SolverOptions {
        prefer: fo.instvars.clone(),
        limit: opts.solver_limit,
    };
    let plain = SolverOptions {
        prefer: Vec::new(),
        limit: opts.solver_limit,
    };
    let give_up = |reason, trace| CegqiResult::GaveUp { reason, trace };
    for _ in 0..opts.max_iters {
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            return give_up(GaveUpReason::Timeout, trace);
        }
        let mut parts = trace.gamma.clone();
        parts.push(p.clone());
        let model = match check_sat_with(&Term::and(parts), &sat_opts) {
            Ok(SatResult::Sat(m)) => m,
            Ok(SatResult::Unsat) => return give_up(GaveUpReason::Unrealizable, trace),
            Err(e) => return give_up(GaveUpReason::Solver(e), trace),
        };
        let terms = select::select_in(&model, &fo.instvars, &lifted);
        let inst = match substitute(&fo.body, &instance_map(fo, &terms)) {
            Ok(t) => t,
            Err(_) => return give_up(GaveUpReason::BodyNotSupported, trace),
        };
        trace.instances.push(terms);
        trace.gamma.push(inst);
        match check_sat_with(&Term::and(trace.gamma.clone()), &plain) {
            Ok(SatResult::Unsat) => {
                return match extract_solution(&trace, fo) {
                    Ok(solution) => CegqiResult::Solved { trace, solution },
                    Err(_) => give_up(GaveUpReason::BodyNotSupported, trace),
                }
            }
            Ok(SatResult::Sat(_)) => {}
            Err(e) => return give_up(GaveUpReason::Solver(e), trace),
        }
    }
    give_up(GaveUpReason::IterationCap, trace)
}

/// Nested conditional over the instances: the i-th instance is returned
/// where it satisfies the constraint, the last one otherwise.
pub fn extract_solution(trace: &InstanceTrace, fo: &FirstOrderForm) -> Result<Solution, ExtractError> {
    let Some(last) = trace.instances.last() else {
        return Err(ExtractError::EmptyTrace);
    };
    let p = positive_body(fo);
    let conds = trace.instances[..trace.instances.len() - 1]
        .iter()
        .map(|ts| substitute(&p, &instance_map(fo, ts)).expect("instances are well sorted"))
        .collect::<Vec<_>>();
    let mut solution = Solution::new();
    for (i, name) in fo.functions.iter().enumerate() {
        let params = &fo.params[i];
        let mut body = last[i].clone();
        for (c, ts) in conds.iter().zip(&trace.instances).rev() {
            body = Term::ite(c.clone(), ts[i].clone(), body);
        }
        let rename: HashMap<Symbol, Term> = fo
            .skolems
            .iter()
            .zip(params)
            .map(|(x, y)| (x.name.clone(), Term::Var(y.clone())))
            .collect();
        let body = substitute(&body, &rename).expect("parameters match the argument sorts");
        let body = normalize(&body).expect("well sorted");
        if let Some(v) = body.free_vars().into_iter().find(|v| !params.contains(v)) {
            return Err(ExtractError::FreeVariable(v.name.to_string()));
        }
        solution.insert(
            name.clone(),
            Lambda {
                params: params.clone(),
                body,
            },
        );
    }
    Ok(solution)
}

#[cfg(test)]
mod tests;
