use std::collections::BTreeSet;

use thiserror::Error;

use super::{FunSort, Grammar, GrammarError, Lambda, Sort, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SynthFun {
    pub name: Symbol,
    pub params: Vec<Var>,
    pub ret: Sort,
    pub grammar: Option<Grammar>,
}

impl SynthFun {
    pub fn fun_sort(&self) -> FunSort {
        FunSort {
            params: self.params.iter().map(|p| p.sort).collect(),
            ret: self.ret,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SynthProblem {
    pub functions: Vec<SynthFun>,
    /// Universally quantified first-order variables of the constraint.
    pub universals: Vec<Var>,
    pub constraint: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("constraint is not a well-sorted Bool term: {0}")]
    IllSorted(String),
    #[error("free variable {0} is not declared")]
    UndeclaredVar(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("function {0} applied with the wrong signature")]
    BadApplication(String),
    #[error("duplicate declaration of {0}")]
    Duplicate(String),
    #[error("grammar for {name}: {err}")]
    Grammar { name: String, err: GrammarError },
    #[error("grammar for {0} does not match its signature")]
    GrammarSignature(String),
}

impl SynthProblem {
    pub fn function(&self, name: &str) -> Option<&SynthFun> {
        self.functions.iter().find(|f| &*f.name == name)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let mut names = BTreeSet::new();
        for f in &self.functions {
            if !names.insert(f.name.clone()) {
                return Err(ProblemError::Duplicate(f.name.to_string()));
            }
            if let Some(g) = &f.grammar {
                g.validate().map_err(|err| ProblemError::Grammar {
                    name: f.name.to_string(),
                    err,
                })?;
                if g.start_sort() != Some(f.ret) || g.params != f.params {
                    return Err(ProblemError::GrammarSignature(f.name.to_string()));
                }
            }
        }
        for v in &self.universals {
            if !names.insert(v.name.clone()) {
                return Err(ProblemError::Duplicate(v.name.to_string()));
            }
        }
        match self.constraint.sort_of() {
            Ok(Sort::Bool) => {}
            Ok(s) => return Err(ProblemError::IllSorted(format!("constraint has sort {s}"))),
            Err(e) => return Err(ProblemError::IllSorted(e.to_string())),
        }
        for v in self.constraint.free_vars() {
            if !self.universals.contains(&v) {
                return Err(ProblemError::UndeclaredVar(v.name.to_string()));
            }
        }
        self.check_applications(&self.constraint)
    }

    fn check_applications(&self, t: &Term) -> Result<(), ProblemError> {
        match t {
            Term::Apply(name, args, sort) => {
                let f = self
                    .function(name)
                    .ok_or_else(|| ProblemError::UnknownFunction(name.to_string()))?;
                let ok = f.ret == *sort
                    && f.params.len() == args.len()
                    && f.params
                        .iter()
                        .zip(args)
                        .all(|(p, a)| a.sort_of().is_ok_and(|s| s == p.sort));
                if !ok {
                    return Err(ProblemError::BadApplication(name.to_string()));
                }
                args.iter().try_for_each(|a| self.check_applications(a))
            }
            Term::App(_, args) => args.iter().try_for_each(|a| self.check_applications(a)),
            _ => Ok(()),
        }
    }
}

/// Function definitions, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Solution {
    bindings: Vec<(Symbol, Lambda)>,
}

impl Solution {
    pub fn new() -> Solution {
        Solution::default()
    }

    pub fn insert(&mut self, name: Symbol, def: Lambda) {
        match self.bindings.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = def,
            None => self.bindings.push((name, def)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Lambda> {
        self.bindings
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, l)| l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Lambda)> {
        self.bindings.iter().map(|(n, l)| (n, l))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}
