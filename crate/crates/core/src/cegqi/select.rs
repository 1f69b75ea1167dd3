//! Model-driven choice of instantiation terms.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::rewrite::{atom_poly, is_int, norm, LinSum};
use crate::term::{evaluate, substitute, Assignment, Op, Sort, Symbol, Term, Value, Var};

/// Cap on the number of nodes produced while lifting conditionals out of
/// atoms.
const LIFT_LIMIT: usize = 20_000;

/// The un-negated body with every integer conditional that mentions an
/// instantiation variable lifted above the atom containing it, so that
/// instantiation variables only occur linearly in atoms. `None` if the
/// result grows past the lifting limit.
pub(crate) fn lift_conditionals(p: &Term, kvars: &[Var]) -> Option<Term> {
    let mut budget = LIFT_LIMIT;
    let lifted = lift(&norm(p), kvars, &mut budget)?;
    Some(norm(&lifted))
}

fn mentions(t: &Term, kvars: &[Var]) -> bool {
    match t {
        Term::Var(v) => kvars.contains(v),
        Term::App(_, args) | Term::Apply(_, args, _) => args.iter().any(|a| mentions(a, kvars)),
        _ => false,
    }
}

fn find_ite(t: &Term, kvars: &[Var]) -> Option<Term> {
    match t {
        Term::App(Op::Ite, args) if is_int(t) && mentions(t, kvars) => {
            // innermost first, so the lifted condition is itself ite-free
            args.iter()
                .find_map(|a| find_ite(a, kvars))
                .or_else(|| Some(t.clone()))
        }
        Term::App(_, args) => args.iter().find_map(|a| find_ite(a, kvars)),
        _ => None,
    }
}

fn replace(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    match t {
        Term::App(op, args) => Term::App(*op, args.iter().map(|a| replace(a, from, to)).collect()),
        _ => t.clone(),
    }
}

fn lift(t: &Term, kvars: &[Var], budget: &mut usize) -> Option<Term> {
    *budget = budget.checked_sub(1)?;
    match t {
        Term::App(op, args) if op.is_comparison() || (*op == Op::Eq && is_int(&args[0])) => {
            let Some(ite) = find_ite(t, kvars) else {
                return Some(t.clone());
            };
            let args = ite.args();
            let cond = lift(&args[0], kvars, budget)?;
            let then = lift(&replace(t, &ite, &args[1]), kvars, budget)?;
            let other = lift(&replace(t, &ite, &args[2]), kvars, budget)?;
            Some(Term::or(vec![
                Term::and(vec![cond.clone(), then]),
                Term::and(vec![Term::not(cond), other]),
            ]))
        }
        Term::App(op, args) => {
            let args = args
                .iter()
                .map(|a| lift(a, kvars, budget))
                .collect::<Option<Vec<_>>>()?;
            Some(Term::App(*op, args))
        }
        _ => Some(t.clone()),
    }
}

fn collect_atoms(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(Op::And | Op::Or | Op::Not | Op::Implies | Op::Ite, args) => {
            for a in args {
                collect_atoms(a, out);
            }
        }
        Term::App(Op::Eq, args) if !is_int(&args[0]) => {
            out.push(t.clone());
            for a in args {
                collect_atoms(a, out);
            }
        }
        Term::App(..) => {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        _ => {}
    }
}

fn int_value(t: &Term, model: &Assignment) -> Option<BigInt> {
    match evaluate(t, model).ok()? {
        Value::Int(v) => Some(v),
        Value::Bool(_) => None,
    }
}

#[derive(Default)]
struct Bounds {
    equal: Option<Term>,
    lower: Vec<(BigInt, Term)>,
    upper: Vec<(BigInt, Term)>,
}

/// Bounds on `k` implied by the atoms under `model`.
fn bounds(atoms: &[Term], k: &Var, kvars: &[Var], model: &Assignment) -> Bounds {
    let kt = Term::Var(k.clone());
    let mut b = Bounds::default();
    for atom in atoms {
        let Some((op, mut p)) = atom_poly(atom) else {
            continue;
        };
        let Some(c) = p.terms.remove(&kt) else {
            continue;
        };
        if !c.abs().is_one() || p.terms.keys().any(|a| mentions(a, kvars)) {
            continue;
        }
        let Ok(Value::Bool(holds)) = evaluate(atom, model) else {
            continue;
        };
        // c·k + rest (op) 0, so k (op) -rest when c = 1 and rest (op) k otherwise
        let unit = c.is_positive();
        let mut bound = p.clone();
        if unit {
            bound.scale(&BigInt::from(-1));
        }
        let t = bound.to_term();
        let Some(v) = int_value(&t, model) else {
            continue;
        };
        match (op, holds, unit) {
            (Op::Eq, true, _) => {
                if b.equal.is_none() {
                    b.equal = Some(t);
                }
            }
            (Op::Eq, false, _) => {}
            (_, true, true) => b.upper.push((v, t)),
            (_, true, false) => b.lower.push((v, t)),
            (_, false, true) => b.lower.push((v + 1, plus_const(&bound, 1))),
            (_, false, false) => b.upper.push((v - 1, plus_const(&bound, -1))),
        }
    }
    b
}

fn plus_const(s: &LinSum, c: i64) -> Term {
    let mut s = s.clone();
    s.constant += c;
    s.to_term()
}

fn bool_definition(atoms: &[Term], k: &Var, kvars: &[Var], model: &Assignment) -> Option<Term> {
    let kt = Term::Var(k.clone());
    atoms.iter().find_map(|a| match a {
        Term::App(Op::Eq, args) if !is_int(&args[0]) => {
            let other = if args[0] == kt {
                &args[1]
            } else if args[1] == kt {
                &args[0]
            } else {
                return None;
            };
            let holds = evaluate(a, model).ok()? == Value::Bool(true);
            (holds && !mentions(other, kvars)).then(|| other.clone())
        }
        _ => None,
    })
}

fn model_constant(k: &Var, model: &Assignment) -> Term {
    match model.get(&k.name) {
        Some(v) => v.to_term(),
        None => match k.sort {
            Sort::Int => Term::int(0),
            Sort::Bool => Term::Bool(false),
        },
    }
}

/// Instantiation terms for `kvars`, given a model of `p` (the un-negated
/// body, already passed through [`lift_conditionals`]). The returned terms
/// mention neither `kvars` nor function applications, and `p` with them
/// substituted holds under `model`.
pub(crate) fn select_in(model: &Assignment, kvars: &[Var], p: &Term) -> Vec<Term> {
    let mut atoms = Vec::new();
    collect_atoms(p, &mut atoms);
    let chosen: Vec<Term> = kvars
        .iter()
        .map(|k| match k.sort {
            Sort::Bool => bool_definition(&atoms, k, kvars, model),
            Sort::Int => {
                let b = bounds(&atoms, k, kvars, model);
                b.equal
                    .or_else(|| max_by_value(b.lower, true))
                    .or_else(|| max_by_value(b.upper, false))
            }
        }
        .unwrap_or_else(|| model_constant(k, model)))
        .collect();
    if holds_with(p, kvars, &chosen, model) {
        return chosen;
    }
    kvars.iter().map(|k| model_constant(k, model)).collect()
}

/// The greatest (or least, when `max` is false) candidate by model value;
/// ties go to the first.
fn max_by_value(cands: Vec<(BigInt, Term)>, max: bool) -> Option<Term> {
    let mut best: Option<(BigInt, Term)> = None;
    for (v, t) in cands {
        let better = match &best {
            None => true,
            Some((bv, _)) => {
                if max {
                    v > *bv
                } else {
                    v < *bv
                }
            }
        };
        if better {
            best = Some((v, t));
        }
    }
    best.map(|(_, t)| t)
}

fn holds_with(p: &Term, kvars: &[Var], terms: &[Term], model: &Assignment) -> bool {
    let map: HashMap<Symbol, Term> = kvars
        .iter()
        .zip(terms)
        .map(|(k, t)| (k.name.clone(), t.clone()))
        .collect();
    match substitute(p, &map) {
        Ok(inst) => evaluate(&inst, model) == Ok(Value::Bool(true)),
        Err(_) => false,
    }
}
