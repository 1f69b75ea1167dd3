//! Conjecture classes and transformations toward single-invocation form.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed};
use thiserror::Error;

use crate::rewrite::{norm, LinSum};
use crate::term::ops::fresh_name;
use crate::term::{substitute, Op, Sort, Symbol, SynthProblem, Term, Value, Var};

/// One input-output example: values of the argument tuple and of each
/// function (in problem order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IoPoint {
    pub inputs: Vec<Value>,
    pub outputs: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjectureClass {
    IoExamples(Vec<IoPoint>),
    SingleInvocation,
    NonSingleInvocation,
}

/// `∃x̄ ∀z̄ body` where `body` is the negated constraint with each function
/// application replaced by its instantiation variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstOrderForm {
    /// The shared argument tuple, now free constants.
    pub skolems: Vec<Var>,
    /// One per function, in problem order.
    pub instvars: Vec<Var>,
    pub functions: Vec<Symbol>,
    /// Formal parameters of each function, in problem order.
    pub params: Vec<Vec<Var>>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("conjecture is not single invocation")]
    NotSingleInvocation,
    #[error("conjecture is not an input-output example conjecture")]
    WrongClass,
    #[error("no single-invocation form found")]
    NotTransformable,
}

fn conjuncts(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut stack = vec![t.clone()];
    while let Some(t) = stack.pop() {
        match t {
            Term::App(Op::And, args) => stack.extend(args.into_iter().rev()),
            Term::Bool(true) => {}
            t => out.push(t),
        }
    }
    out
}

fn collect_apps(t: &Term, out: &mut Vec<(Symbol, Vec<Term>)>) {
    match t {
        Term::Apply(f, args, _) => {
            out.push((f.clone(), args.clone()));
            for a in args {
                collect_apps(a, out);
            }
        }
        Term::App(_, args) => {
            for a in args {
                collect_apps(a, out);
            }
        }
        _ => {}
    }
}

/// The argument tuple shared by every application, if the conjecture is
/// single invocation. `Some(None)` means there are no applications at all.
fn invocation_tuple(p: &SynthProblem) -> Option<Option<Vec<Var>>> {
    let mut apps = Vec::new();
    collect_apps(&p.constraint, &mut apps);
    let Some((_, first)) = apps.first() else {
        return Some(None);
    };
    let mut tuple = Vec::with_capacity(first.len());
    for a in first {
        match a {
            Term::Var(v) if p.universals.contains(v) && !tuple.contains(v) => tuple.push(v.clone()),
            _ => return None,
        }
    }
    for (_, args) in &apps {
        if args.len() != tuple.len() || args.iter().zip(&tuple).any(|(a, v)| a != &Term::Var(v.clone())) {
            return None;
        }
    }
    if p.constraint.free_vars().iter().any(|v| !tuple.contains(v)) {
        return None;
    }
    Some(Some(tuple))
}

pub fn classify(p: &SynthProblem) -> ConjectureClass {
    let Some(tuple) = invocation_tuple(p) else {
        return ConjectureClass::NonSingleInvocation;
    };
    if let Some(tuple) = tuple {
        if let Some(points) = io_points(p, &tuple) {
            return ConjectureClass::IoExamples(points);
        }
    } else if conjuncts(&p.constraint).is_empty() {
        return ConjectureClass::IoExamples(Vec::new());
    }
    ConjectureClass::SingleInvocation
}

pub fn extract_io_examples(p: &SynthProblem) -> Result<Vec<IoPoint>, ClassifyError> {
    match classify(p) {
        ConjectureClass::IoExamples(points) => Ok(points),
        _ => Err(ClassifyError::WrongClass),
    }
}

/// The bare input tuples of an I/O conjecture.
pub fn io_inputs(points: &[IoPoint]) -> Vec<Vec<Value>> {
    points.iter().map(|pt| pt.inputs.clone()).collect()
}

fn implication(c: &Term) -> Option<(Term, Term)> {
    match c {
        Term::App(Op::Implies, args) => Some((args[0].clone(), args[1].clone())),
        Term::App(Op::Or, args) if args.len() == 2 => match (&args[0], &args[1]) {
            (Term::App(Op::Not, a), q) | (q, Term::App(Op::Not, a)) => Some((a[0].clone(), q.clone())),
            _ => None,
        },
        _ => None,
    }
}

/// For `a = b`, the pair (subject, constant) if the equation pins a single
/// atom with unit coefficient to a constant.
fn pinned(eq: &Term) -> Option<(Term, Value)> {
    let Term::App(Op::Eq, args) = eq else {
        return None;
    };
    if args[0].sort_of().ok()? != Sort::Int {
        return None;
    }
    let mut p = LinSum::of_normal(&norm(&args[0]));
    p.sub_assign(&LinSum::of_normal(&norm(&args[1])));
    if p.terms.len() != 1 {
        return None;
    }
    let (atom, c) = p.terms.iter().next()?;
    if !c.abs().is_one() {
        return None;
    }
    // c·atom + k = 0
    let val = if c.is_positive() { -&p.constant } else { p.constant.clone() };
    Some((atom.clone(), Value::Int(val)))
}

fn io_points(p: &SynthProblem, tuple: &[Var]) -> Option<Vec<IoPoint>> {
    let mut points = Vec::new();
    for c in conjuncts(&p.constraint) {
        let (ante, cons) = implication(&c)?;
        let mut inputs: BTreeMap<usize, Value> = BTreeMap::new();
        for a in conjuncts(&ante) {
            let (atom, v) = pinned(&a)?;
            let Term::Var(var) = atom else { return None };
            let i = tuple.iter().position(|t| *t == var)?;
            if inputs.insert(i, v).is_some() {
                return None;
            }
        }
        if inputs.len() != tuple.len() {
            return None;
        }
        let mut outputs: BTreeMap<usize, Value> = BTreeMap::new();
        for a in conjuncts(&cons) {
            let (atom, v) = pinned(&a)?;
            let Term::Apply(f, ..) = atom else { return None };
            let i = p.functions.iter().position(|g| g.name == f)?;
            if outputs.insert(i, v).is_some() {
                return None;
            }
        }
        if outputs.len() != p.functions.len() {
            return None;
        }
        points.push(IoPoint {
            inputs: inputs.into_values().collect(),
            outputs: outputs.into_values().collect(),
        });
    }
    Some(points)
}

pub fn to_first_order(p: &SynthProblem) -> Result<FirstOrderForm, ClassifyError> {
    let tuple = invocation_tuple(p).ok_or(ClassifyError::NotSingleInvocation)?;
    let skolems = match tuple {
        Some(t) => t,
        None => p.constraint.free_vars().into_iter().collect(),
    };
    let taken = |n: &str| {
        p.universals.iter().any(|v| &*v.name == n) || p.functions.iter().any(|f| &*f.name == n)
    };
    let mut instvars: Vec<Var> = Vec::new();
    for f in &p.functions {
        let name = fresh_name(&format!("z_{}", f.name), |n| {
            taken(n) || instvars.iter().any(|v| &*v.name == n)
        });
        instvars.push(Var::new(&name, f.ret));
    }
    let map: HashMap<Symbol, Term> = p
        .functions
        .iter()
        .zip(&instvars)
        .map(|(f, z)| (f.name.clone(), Term::Var(z.clone())))
        .collect();
    let body = Term::not(replace_apps(&p.constraint, &map));
    Ok(FirstOrderForm {
        skolems,
        instvars,
        functions: p.functions.iter().map(|f| f.name.clone()).collect(),
        params: p.functions.iter().map(|f| f.params.clone()).collect(),
        body,
    })
}

fn replace_apps(t: &Term, map: &HashMap<Symbol, Term>) -> Term {
    match t {
        Term::Apply(f, _, _) => map.get(f).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => Term::App(*op, args.iter().map(|a| replace_apps(a, map)).collect()),
        _ => t.clone(),
    }
}

/// Try to produce an equivalent single-invocation conjecture.
pub fn to_single_invocation(p: &SynthProblem) -> Result<SynthProblem, ClassifyError> {
    if invocation_tuple(p).is_some() {
        return Ok(p.clone());
    }
    let lifted = lift_ground_invocations(p).unwrap_or_else(|| p.clone());
    let out = eliminate_aux_vars(&lifted).unwrap_or(lifted);
    if invocation_tuple(&out).is_some() && out.validate().is_ok() {
        Ok(out)
    } else {
        Err(ClassifyError::NotTransformable)
    }
}

fn is_ground_args(args: &[Term]) -> bool {
    args.iter().all(|a| a.free_vars().is_empty() && !a.contains_apply())
}

/// Rewrite each conjunct `C[f(c̄)]` that applies functions only at one
/// constant tuple into `x̄ = c̄ ⇒ C[f(x̄)]` over fresh universals.
fn lift_ground_invocations(p: &SynthProblem) -> Option<SynthProblem> {
    let mut apps = Vec::new();
    collect_apps(&p.constraint, &mut apps);
    let first = p.functions.first()?;
    if p.functions.iter().any(|f| f.params.len() != first.params.len()) {
        return None;
    }
    let existing_tuple: Option<Vec<Term>> = apps
        .iter()
        .find(|(_, args)| !is_ground_args(args))
        .map(|(_, args)| args.clone());
    let mut universals = p.universals.clone();
    let tuple: Vec<Var> = match &existing_tuple {
        Some(args) => args
            .iter()
            .map(|a| match a {
                Term::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?,
        None => {
            let mut vs = Vec::new();
            for param in &first.params {
                let name = fresh_name(&param.name, |n| {
                    universals.iter().any(|v| &*v.name == n)
                        || p.functions.iter().any(|f| &*f.name == n)
                });
                let v = Var::new(&name, param.sort);
                universals.push(v.clone());
                vs.push(v);
            }
            vs
        }
    };
    let tuple_terms: Vec<Term> = tuple.iter().cloned().map(Term::Var).collect();
    let mut changed = false;
    let mut parts = Vec::new();
    for c in conjuncts(&p.constraint) {
        let mut capps = Vec::new();
        collect_apps(&c, &mut capps);
        let ground: BTreeSet<Vec<Term>> = capps
            .iter()
            .filter(|(_, a)| is_ground_args(a))
            .map(|(_, a)| a.clone())
            .collect();
        if ground.is_empty() {
            parts.push(c);
            continue;
        }
        if ground.len() != 1 || capps.iter().any(|(_, a)| !is_ground_args(a)) {
            return None;
        }
        if c.free_vars().iter().any(|v| tuple.contains(v)) {
            return None;
        }
        let consts = ground.into_iter().next().expect("one tuple");
        let guard = Term::and(
            tuple_terms
                .iter()
                .zip(&consts)
                .map(|(x, k)| Term::eq(x.clone(), k.clone()))
                .collect(),
        );
        let body = retarget(&c, &tuple_terms);
        parts.push(Term::implies(guard, body));
        changed = true;
    }
    if !changed {
        return None;
    }
    Some(SynthProblem {
        functions: p.functions.clone(),
        universals,
        constraint: Term::and(parts),
    })
}

fn retarget(t: &Term, args: &[Term]) -> Term {
    match t {
        Term::Apply(f, _, s) => Term::Apply(f.clone(), args.to_vec(), *s),
        Term::App(op, a) => Term::App(*op, a.iter().map(|x| retarget(x, args)).collect()),
        _ => t.clone(),
    }
}

const MAX_CUBES: usize = 64;

/// Disjunctive normal form of a normalized formula as a list of cubes.
fn dnf(t: &Term) -> Option<Vec<Vec<Term>>> {
    match t {
        Term::App(Op::Or, args) => {
            let mut out = Vec::new();
            for a in args {
                out.extend(dnf(a)?);
            }
            (out.len() <= MAX_CUBES).then_some(out)
        }
        Term::App(Op::And, args) => {
            let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
            for a in args {
                let d = dnf(a)?;
                let mut next = Vec::new();
                for cube in &acc {
                    for c in &d {
                        let mut n = cube.clone();
                        n.extend(c.iter().cloned());
                        next.push(n);
                    }
                }
                if next.len() > MAX_CUBES {
                    return None;
                }
                acc = next;
            }
            Some(acc)
        }
        Term::Bool(false) => Some(Vec::new()),
        Term::Bool(true) => Some(vec![Vec::new()]),
        t => Some(vec![vec![t.clone()]]),
    }
}

/// Solve `l = r` for `z` when `z` has a unit coefficient.
fn solve_for(eq: &Term, z: &Var) -> Option<Term> {
    let Term::App(Op::Eq, args) = eq else {
        return None;
    };
    if !crate::rewrite::is_int(&args[0]) {
        return None;
    }
    let mut p = LinSum::of_normal(&args[0]);
    p.sub_assign(&LinSum::of_normal(&args[1]));
    let zt = Term::Var(z.clone());
    let c = p.terms.remove(&zt)?;
    if !c.abs().is_one() {
        return None;
    }
    if p.terms.keys().any(|a| a.free_vars().contains(z)) {
        return None;
    }
    // c·z + rest = 0  ⇒  z = -c·rest
    p.scale(&-c);
    Some(p.to_term())
}

/// Remove universals that are not invocation arguments from conjuncts of
/// the form `A ⇒ B` where every disjunct of `A` fixes them by an equality.
fn eliminate_aux_vars(p: &SynthProblem) -> Option<SynthProblem> {
    let mut apps = Vec::new();
    collect_apps(&p.constraint, &mut apps);
    let (_, args) = apps.first()?;
    let tuple: Vec<Var> = args
        .iter()
        .map(|a| match a {
            Term::Var(v) => Some(v.clone()),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    if apps.iter().any(|(_, a)| a != args) {
        return None;
    }
    let aux: Vec<Var> = p
        .constraint
        .free_vars()
        .into_iter()
        .filter(|v| !tuple.contains(v))
        .collect();
    if aux.is_empty() || aux.iter().any(|v| v.sort != Sort::Int) {
        return None;
    }
    let mut parts = Vec::new();
    for c in conjuncts(&p.constraint) {
        if !c.free_vars().iter().any(|v| aux.contains(v)) {
            parts.push(c);
            continue;
        }
        let (ante, cons) = implication(&c)?;
        let cubes = dnf(&norm(&ante))?;
        for cube in cubes {
            let mut cube = cube;
            let mut cons = cons.clone();
            for z in &aux {
                if !cube.iter().any(|l| l.free_vars().contains(z)) && !cons.free_vars().contains(z) {
                    continue;
                }
                let (i, t) = cube
                    .iter()
                    .enumerate()
                    .find_map(|(i, l)| solve_for(l, z).map(|t| (i, t)))?;
                cube.remove(i);
                let m: HashMap<Symbol, Term> = [(z.name.clone(), t)].into_iter().collect();
                cube = cube
                    .iter()
                    .map(|l| substitute(l, &m).ok())
                    .collect::<Option<Vec<_>>>()?;
                cons = substitute(&cons, &m).ok()?;
            }
            let guard = match cube.len() {
                0 => Term::Bool(true),
                1 => cube.pop().expect("one"),
                _ => Term::and(cube),
            };
            parts.push(Term::implies(guard, cons));
        }
    }
    let universals = p
        .universals
        .iter()
        .filter(|v| !aux.contains(v))
        .cloned()
        .collect();
    Some(SynthProblem {
        functions: p.functions.clone(),
        universals,
        constraint: Term::and(parts),
    })
}

/// Values of the argument tuple, as an assignment to the given parameters.
pub fn point_assignment(params: &[Var], inputs: &[Value]) -> crate::term::Assignment {
    params.iter().cloned().zip(inputs.iter().cloned()).collect()
}
