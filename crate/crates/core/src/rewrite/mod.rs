//! Bottom-up normalization to a canonical form.
//!
//! Every rule looks only at the already-normalized children of a node, so the
//! normal form of a compound term depends only on its operator and the normal
//! forms of its arguments.

mod key;
pub(crate) mod linear;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

pub use key::{canonical_key, key_of_normal, CanonicalKey};
pub(crate) use linear::{atom_poly, is_int, mk_eq, mk_le, LinSum};

use crate::term::{Lambda, Op, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("cannot normalize an ill-sorted term: {0}")]
    IllSorted(String),
}

/// Normal form of a well-sorted term. A top-level lambda has its body
/// normalized.
pub fn normalize(t: &Term) -> Result<Term, RewriteError> {
    match t {
        Term::Lambda(l) => {
            l.body
                .sort_of()
                .map_err(|e| RewriteError::IllSorted(e.to_string()))?;
            Ok(Term::Lambda(Box::new(Lambda {
                params: l.params.clone(),
                body: norm(&l.body),
            })))
        }
        t => {
            t.sort_of()
                .map_err(|e| RewriteError::IllSorted(e.to_string()))?;
            Ok(norm(t))
        }
    }
}

/// Normalization without the sort check.
pub(crate) fn norm(t: &Term) -> Term {
    match t {
        Term::Int(_) | Term::Bool(_) | Term::Var(_) | Term::Lambda(_) => t.clone(),
        Term::Apply(f, args, s) => Term::Apply(f.clone(), args.iter().map(norm).collect(), *s),
        Term::App(op, args) => {
            let args: Vec<Term> = args.iter().map(norm).collect();
            rebuild(*op, args)
        }
    }
}

/// Combine normalized children under `op`.
pub(crate) fn rebuild(op: Op, args: Vec<Term>) -> Term {
    match op {
        Op::Add | Op::Mul => linear_of(op, &args).to_term(),
        Op::Le | Op::Lt | Op::Ge | Op::Gt => {
            let (a, b) = (LinSum::of_normal(&args[0]), LinSum::of_normal(&args[1]));
            let (mut p, q) = match op {
                Op::Le | Op::Lt => (a, b),
                _ => (b, a),
            };
            p.sub_assign(&q);
            if matches!(op, Op::Lt | Op::Gt) {
                p.constant += 1;
            }
            mk_le(&p)
        }
        Op::Eq => {
            if is_int(&args[0]) {
                let mut p = LinSum::of_normal(&args[0]);
                p.sub_assign(&LinSum::of_normal(&args[1]));
                mk_eq(&p)
            } else {
                bool_eq(args)
            }
        }
        Op::Not => negate(&args[0]),
        Op::And => junction(args, true),
        Op::Or => junction(args, false),
        Op::Implies => {
            let mut it = args.into_iter();
            let a = it.next().expect("antecedent");
            let b = it.next().expect("consequent");
            junction(vec![negate(&a), b], false)
        }
        Op::Ite => {
            let mut it = args.into_iter();
            let (c, a, b) = (
                it.next().expect("cond"),
                it.next().expect("then"),
                it.next().expect("else"),
            );
            ite(c, a, b)
        }
    }
}

fn linear_of(op: Op, args: &[Term]) -> LinSum {
    match op {
        Op::Mul => {
            let mut s = LinSum::of_normal(&args[1]);
            s.scale(args[0].as_int().expect("literal factor"));
            s
        }
        _ => {
            let mut s = LinSum::default();
            for a in args {
                s.add_assign(&LinSum::of_normal(a));
            }
            s
        }
    }
}

/// Normal form of the negation of a normalized Bool term.
pub(crate) fn negate(t: &Term) -> Term {
    match t {
        Term::Bool(b) => Term::Bool(!b),
        Term::App(Op::Not, args) => args[0].clone(),
        Term::App(Op::Le, args) if is_int(&args[0]) => {
            let mut p = LinSum::constant(BigInt::from(1));
            p.sub_assign(&LinSum::of_normal(&args[0]));
            p.add_assign(&LinSum::of_normal(&args[1]));
            mk_le(&p)
        }
        t => Term::App(Op::Not, vec![t.clone()]),
    }
}

fn bool_eq(args: Vec<Term>) -> Term {
    let mut it = args.into_iter();
    let a = it.next().expect("lhs");
    let b = it.next().expect("rhs");
    if a == b {
        return Term::Bool(true);
    }
    match (&a, &b) {
        (Term::Bool(true), o) | (o, Term::Bool(true)) => return o.clone(),
        (Term::Bool(false), o) | (o, Term::Bool(false)) => return negate(o),
        _ => {}
    }
    if negate(&a) == b {
        return Term::Bool(false);
    }
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    Term::App(Op::Eq, vec![a, b])
}

/// Flattened, sorted, deduplicated conjunction (`conj`) or disjunction.
fn junction(args: Vec<Term>, conj: bool) -> Term {
    let op = if conj { Op::And } else { Op::Or };
    let mut set = BTreeSet::new();
    let mut stack = args;
    stack.reverse();
    while let Some(a) = stack.pop() {
        match a {
            Term::Bool(b) if b == conj => {}
            Term::Bool(_) => return Term::Bool(!conj),
            Term::App(o, inner) if o == op => {
                stack.extend(inner.into_iter().rev());
            }
            a => {
                set.insert(a);
            }
        }
    }
    if set.iter().any(|a| set.contains(&negate(a))) {
        return Term::Bool(!conj);
    }
    match set.len() {
        0 => Term::Bool(conj),
        1 => set.into_iter().next().expect("one element"),
        _ => Term::App(op, set.into_iter().collect()),
    }
}

fn ite(c: Term, a: Term, b: Term) -> Term {
    match c {
        Term::Bool(true) => return a,
        Term::Bool(false) => return b,
        _ => {}
    }
    if a == b {
        return a;
    }
    if let Term::App(Op::Not, inner) = &c {
        return ite(inner[0].clone(), b, a);
    }
    match (&a, &b) {
        (Term::Bool(true), Term::Bool(false)) => c,
        (Term::Bool(false), Term::Bool(true)) => negate(&c),
        _ => Term::App(Op::Ite, vec![c, a, b]),
    }
}
