use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Lambda, Solution, Symbol, SynthProblem, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substitution for {name} has sort {got}, expected {want}")]
    SortMismatch {
        name: String,
        want: super::Sort,
        got: String,
    },
    #[error("no solution for function {0}")]
    MissingFunction(String),
    #[error("function {0} applied to {1} arguments, solution takes {2}")]
    Arity(String, usize, usize),
}

pub(super) fn collect_free_vars(t: &Term, out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::App(_, args) | Term::Apply(_, args, _) => {
            for a in args {
                collect_free_vars(a, out);
            }
        }
        Term::Lambda(l) => {
            let mut inner = BTreeSet::new();
            collect_free_vars(&l.body, &mut inner);
            for v in inner {
                if !l.params.contains(&v) {
                    out.insert(v);
                }
            }
        }
        Term::Int(_) | Term::Bool(_) => {}
    }
}

pub(super) fn collect_applied(t: &Term, out: &mut BTreeSet<Symbol>) {
    match t {
        Term::Apply(f, args, _) => {
            out.insert(f.clone());
            for a in args {
                collect_applied(a, out);
            }
        }
        Term::App(_, args) => {
            for a in args {
                collect_applied(a, out);
            }
        }
        Term::Lambda(l) => collect_applied(&l.body, out),
        _ => {}
    }
}

/// Number of non-leaf nodes.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::App(_, args) | Term::Apply(_, args, _) => 1 + args.iter().map(term_size).sum::<usize>(),
        Term::Lambda(l) => term_size(&l.body),
        _ => 0,
    }
}

/// Capture-avoiding simultaneous substitution of variables (by name).
pub fn substitute(t: &Term, map: &HashMap<Symbol, Term>) -> Result<Term, SubstError> {
    subst(t, map)
}

fn check_sort(v: &Var, r: &Term) -> Result<(), SubstError> {
    match r.sort_of() {
        Ok(s) if s == v.sort => Ok(()),
        Ok(s) => Err(SubstError::SortMismatch {
            name: v.name.to_string(),
            want: v.sort,
            got: s.to_string(),
        }),
        Err(e) => Err(SubstError::SortMismatch {
            name: v.name.to_string(),
            want: v.sort,
            got: e.to_string(),
        }),
    }
}

fn subst(t: &Term, map: &HashMap<Symbol, Term>) -> Result<Term, SubstError> {
    Ok(match t {
        Term::Var(v) => match map.get(&v.name) {
            Some(r) => {
                check_sort(v, r)?;
                r.clone()
            }
            None => t.clone(),
        },
        Term::App(op, args) => Term::App(
            *op,
            args.iter().map(|a| subst(a, map)).collect::<Result<_, _>>()?,
        ),
        Term::Apply(f, args, s) => Term::Apply(
            f.clone(),
            args.iter().map(|a| subst(a, map)).collect::<Result<_, _>>()?,
            *s,
        ),
        Term::Lambda(l) => {
            let mut inner: HashMap<Symbol, Term> = map
                .iter()
                .filter(|(k, _)| !l.params.iter().any(|p| &p.name == *k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let incoming: BTreeSet<Var> = inner.values().flat_map(|r| r.free_vars()).collect();
            let mut params = Vec::with_capacity(l.params.len());
            for p in &l.params {
                if incoming.iter().any(|v| v.name == p.name) {
                    let fresh = fresh_name(&p.name, |n| {
                        incoming.iter().any(|v| &*v.name == n)
                            || l.body.free_vars().iter().any(|v| &*v.name == n)
                    });
                    let np = Var::new(&fresh, p.sort);
                    inner.insert(p.name.clone(), Term::Var(np.clone()));
                    params.push(np);
                } else {
                    params.push(p.clone());
                }
            }
            Term::Lambda(Box::new(Lambda {
                params,
                body: subst(&l.body, &inner)?,
            }))
        }
        Term::Int(_) | Term::Bool(_) => t.clone(),
    })
}

/// First of `base`, `base_1`, `base_2`, ... not rejected by `taken`.
pub(crate) fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("unbounded")
}

/// Beta-reduce every application of a solved function inside `t`.
pub(crate) fn inline_solution(t: &Term, s: &Solution) -> Result<Term, SubstError> {
    Ok(match t {
        Term::Apply(f, args, _) => {
            let lam = s
                .get(f)
                .ok_or_else(|| SubstError::MissingFunction(f.to_string()))?;
            if lam.params.len() != args.len() {
                return Err(SubstError::Arity(f.to_string(), args.len(), lam.params.len()));
            }
            let args = args
                .iter()
                .map(|a| inline_solution(a, s))
                .collect::<Result<Vec<_>, _>>()?;
            let map = lam
                .params
                .iter()
                .zip(args)
                .map(|(p, a)| (p.name.clone(), a))
                .collect();
            subst(&lam.body, &map)?
        }
        Term::App(op, args) => Term::App(
            *op,
            args.iter()
                .map(|a| inline_solution(a, s))
                .collect::<Result<_, _>>()?,
        ),
        _ => t.clone(),
    })
}

/// The constraint of `p` with every function replaced by its solution.
pub fn apply_solution(p: &SynthProblem, s: &Solution) -> Result<Term, SubstError> {
    inline_solution(&p.constraint, s)
}
