//! Terms, sorts, assignments and synthesis problems.

mod eval;
mod grammar;
pub(crate) mod ops;
mod print;
mod problem;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

pub use eval::{evaluate, Assignment, EvalError, Value};
pub use grammar::{Grammar, GrammarError, Nonterminal, Rule};
pub use ops::{apply_solution, substitute, term_size, SubstError};
pub use problem::{ProblemError, Solution, SynthFun, SynthProblem};

pub type Symbol = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Bool => f.write_str("Bool"),
        }
    }
}

/// Signature of a function symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunSort {
    pub params: Vec<Sort>,
    pub ret: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Symbol,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: Arc::from(name), sort }
    }

    pub fn int(name: &str) -> Var {
        Var::new(name, Sort::Int)
    }

    pub fn boolean(name: &str) -> Var {
        Var::new(name, Sort::Bool)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    /// Scaling by an integer literal. The first argument is always `Term::Int`.
    Mul,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Not,
    And,
    Or,
    Implies,
    Ite,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Mul => "*",
            Op::Le => "<=",
            Op::Lt => "<",
            Op::Ge => ">=",
            Op::Gt => ">",
            Op::Eq => "=",
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Implies => "=>",
            Op::Ite => "ite",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, Op::Le | Op::Lt | Op::Ge | Op::Gt)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lambda {
    pub params: Vec<Var>,
    pub body: Term,
}

/// A first-order term. Derived ordering is structural and is relied on by the
/// rewriter for canonical operand order (variables sort by name).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(BigInt),
    Bool(bool),
    Var(Var),
    App(Op, Vec<Term>),
    /// Application of an uninterpreted (to-be-synthesized) function.
    Apply(Symbol, Vec<Term>, Sort),
    Lambda(Box<Lambda>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("sort mismatch: {0}")]
    Mismatch(String),
    #[error("wrong number of arguments to {0}")]
    Arity(String),
    #[error("lambda is not allowed inside a formula")]
    NestedLambda,
}

impl Term {
    pub fn int(v: i64) -> Term {
        Term::Int(BigInt::from(v))
    }

    pub fn bool(b: bool) -> Term {
        Term::Bool(b)
    }

    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn int_var(name: &str) -> Term {
        Term::Var(Var::int(name))
    }

    pub fn bool_var(name: &str) -> Term {
        Term::Var(Var::boolean(name))
    }

    pub fn add(args: Vec<Term>) -> Term {
        Term::App(Op::Add, args)
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::App(Op::Add, vec![a, b])
    }

    pub fn scale(c: BigInt, t: Term) -> Term {
        Term::App(Op::Mul, vec![Term::Int(c), t])
    }

    pub fn neg(t: Term) -> Term {
        match t {
            Term::Int(c) => Term::Int(-c),
            t => Term::scale(BigInt::from(-1), t),
        }
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::plus(a, Term::neg(b))
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::App(Op::Le, vec![a, b])
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::App(Op::Lt, vec![a, b])
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::App(Op::Ge, vec![a, b])
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::App(Op::Gt, vec![a, b])
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::App(Op::Eq, vec![a, b])
    }

    pub fn not(a: Term) -> Term {
        Term::App(Op::Not, vec![a])
    }

    pub fn and(args: Vec<Term>) -> Term {
        Term::App(Op::And, args)
    }

    pub fn or(args: Vec<Term>) -> Term {
        Term::App(Op::Or, args)
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::App(Op::Implies, vec![a, b])
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        Term::App(Op::Ite, vec![c, a, b])
    }

    pub fn apply(name: &str, args: Vec<Term>, sort: Sort) -> Term {
        Term::Apply(Arc::from(name), args, sort)
    }

    pub fn lambda(params: Vec<Var>, body: Term) -> Term {
        Term::Lambda(Box::new(Lambda { params, body }))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Int(c) => Some(c),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) | Term::Apply(_, args, _) => args,
            _ => &[],
        }
    }

    /// Sort of a well-sorted term. Checks the whole tree.
    pub fn sort_of(&self) -> Result<Sort, SortError> {
        match self {
            Term::Int(_) => Ok(Sort::Int),
            Term::Bool(_) => Ok(Sort::Bool),
            Term::Var(v) => Ok(v.sort),
            Term::Lambda(_) => Err(SortError::NestedLambda),
            Term::Apply(_, args, sort) => {
                for a in args {
                    a.sort_of()?;
                }
                Ok(*sort)
            }
            Term::App(op, args) => {
                let sorts = args
                    .iter()
                    .map(Term::sort_of)
                    .collect::<Result<Vec<_>, _>>()?;
                let expect = |want: Sort| -> Result<(), SortError> {
                    match sorts.iter().find(|s| **s != want) {
                        Some(s) => Err(SortError::Mismatch(format!(
                            "{} expects {want} arguments, got {s}",
                            op.symbol()
                        ))),
                        None => Ok(()),
                    }
                };
                let arity = |ok: bool| {
                    if ok {
                        Ok(())
                    } else {
                        Err(SortError::Arity(op.symbol().to_string()))
                    }
                };
                match op {
                    Op::Add => {
                        arity(!args.is_empty())?;
                        expect(Sort::Int)?;
                        Ok(Sort::Int)
                    }
                    Op::Mul => {
                        arity(args.len() == 2)?;
                        if !matches!(args[0], Term::Int(_)) {
                            return Err(SortError::Mismatch(
                                "multiplication must be by an integer literal".into(),
                            ));
                        }
                        expect(Sort::Int)?;
                        Ok(Sort::Int)
                    }
                    Op::Le | Op::Lt | Op::Ge | Op::Gt => {
                        arity(args.len() == 2)?;
                        expect(Sort::Int)?;
                        Ok(Sort::Bool)
                    }
                    Op::Eq => {
                        arity(args.len() == 2)?;
                        if sorts[0] != sorts[1] {
                            return Err(SortError::Mismatch(format!(
                                "= between {} and {}",
                                sorts[0], sorts[1]
                            )));
                        }
                        Ok(Sort::Bool)
                    }
                    Op::Not => {
                        arity(args.len() == 1)?;
                        expect(Sort::Bool)?;
                        Ok(Sort::Bool)
                    }
                    Op::And | Op::Or => {
                        expect(Sort::Bool)?;
                        Ok(Sort::Bool)
                    }
                    Op::Implies => {
                        arity(args.len() == 2)?;
                        expect(Sort::Bool)?;
                        Ok(Sort::Bool)
                    }
                    Op::Ite => {
                        arity(args.len() == 3)?;
                        if sorts[0] != Sort::Bool {
                            return Err(SortError::Mismatch("ite condition must be Bool".into()));
                        }
                        if sorts[1] != sorts[2] {
                            return Err(SortError::Mismatch(format!(
                                "ite branches of sort {} and {}",
                                sorts[1], sorts[2]
                            )));
                        }
                        Ok(sorts[1])
                    }
                }
            }
        }
    }

    /// True if the term is well sorted. A lambda is accepted only at the top.
    pub fn well_sorted(&self) -> bool {
        match self {
            Term::Lambda(l) => l.body.sort_of().is_ok(),
            t => t.sort_of().is_ok(),
        }
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<Var> {
        let mut out = std::collections::BTreeSet::new();
        ops::collect_free_vars(self, &mut out);
        out
    }

    /// Names of applied uninterpreted functions.
    pub fn applied_functions(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        ops::collect_applied(self, &mut out);
        out
    }

    pub fn contains_apply(&self) -> bool {
        match self {
            Term::Apply(..) => true,
            Term::App(_, args) => args.iter().any(Term::contains_apply),
            Term::Lambda(l) => l.body.contains_apply(),
            _ => false,
        }
    }
}
