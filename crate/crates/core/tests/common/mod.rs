//! Generators and brute-force oracles shared by the integration tests.
//!
//! The oracles here deliberately avoid the library's evaluator, rewriter and
//! solver so they can be used to check them.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;

use synthlia::enumerate::{DatatypeFamily, DtValue};
use synthlia::frontend::parse_problem;
use synthlia::term::{term_size, Grammar, Op, SynthProblem, Term, Value};

pub const INT_VARS: [&str; 3] = ["x", "y", "z"];
pub const BOOL_VARS: [&str; 2] = ["b", "c"];

pub fn problem_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/problems").join(format!("{name}.sl"))
}

pub fn load(name: &str) -> SynthProblem {
    let text = std::fs::read_to_string(problem_path(name)).expect("problem file");
    parse_problem(&text).expect("problem parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum V {
    I(i64),
    B(bool),
}

impl V {
    fn int(self) -> i64 {
        match self {
            V::I(n) => n,
            V::B(_) => panic!("expected an integer"),
        }
    }

    fn bool(self) -> bool {
        match self {
            V::B(b) => b,
            V::I(_) => panic!("expected a boolean"),
        }
    }

    pub fn to_value(self) -> Value {
        match self {
            V::I(n) => Value::Int(n.into()),
            V::B(b) => Value::Bool(b),
        }
    }
}

pub type Env = HashMap<String, V>;

/// Straightforward recursive evaluation over machine integers.
pub fn eval(t: &Term, env: &Env) -> V {
    match t {
        Term::Int(n) => V::I(i64::try_from(n).expect("literal fits")),
        Term::Bool(b) => V::B(*b),
        Term::Var(v) => *env.get(&*v.name).unwrap_or_else(|| panic!("unbound {}", v.name)),
        Term::App(op, args) => {
            let i = |k: usize| eval(&args[k], env).int();
            let b = |k: usize| eval(&args[k], env).bool();
            match op {
                Op::Add => V::I(args.iter().map(|a| eval(a, env).int()).sum()),
                Op::Mul => V::I(i(0) * i(1)),
                Op::Le => V::B(i(0) <= i(1)),
                Op::Lt => V::B(i(0) < i(1)),
                Op::Ge => V::B(i(0) >= i(1)),
                Op::Gt => V::B(i(0) > i(1)),
                Op::Eq => V::B(eval(&args[0], env) == eval(&args[1], env)),
                Op::Not => V::B(!b(0)),
                Op::And => V::B(args.iter().all(|a| eval(a, env).bool())),
                Op::Or => V::B(args.iter().any(|a| eval(a, env).bool())),
                Op::Implies => V::B(!b(0) || b(1)),
                Op::Ite => {
                    if b(0) {
                        eval(&args[1], env)
                    } else {
                        eval(&args[2], env)
                    }
                }
            }
        }
        Term::Apply(..) | Term::Lambda(_) => panic!("oracle evaluates first-order terms only"),
    }
}

pub fn int_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Term::int(rng.gen_range(-4..=4))
        } else {
            Term::int_var(INT_VARS[rng.gen_range(0..3)])
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 | 1 => Term::add((0..rng.gen_range(2..=3)).map(|_| int_term(rng, d)).collect()),
        2 => Term::scale(BigInt::from(rng.gen_range(-3..=3)), int_term(rng, d)),
        3 => Term::sub(int_term(rng, d), int_term(rng, d)),
        4 => Term::neg(int_term(rng, d)),
        _ => Term::ite(bool_term(rng, d), int_term(rng, d), int_term(rng, d)),
    }
}

pub fn bool_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => Term::Bool(rng.gen_bool(0.5)),
            _ => Term::bool_var(BOOL_VARS[rng.gen_range(0..2)]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..12) {
        0 => Term::le(int_term(rng, d), int_term(rng, d)),
        1 => Term::lt(int_term(rng, d), int_term(rng, d)),
        2 => Term::ge(int_term(rng, d), int_term(rng, d)),
        3 => Term::gt(int_term(rng, d), int_term(rng, d)),
        4 | 5 => Term::eq(int_term(rng, d), int_term(rng, d)),
        6 => Term::eq(bool_term(rng, d), bool_term(rng, d)),
        7 => Term::not(bool_term(rng, d)),
        8 => Term::and((0..rng.gen_range(2..=3)).map(|_| bool_term(rng, d)).collect()),
        9 => Term::or((0..rng.gen_range(2..=3)).map(|_| bool_term(rng, d)).collect()),
        10 => Term::implies(bool_term(rng, d), bool_term(rng, d)),
        _ => Term::ite(bool_term(rng, d), bool_term(rng, d), bool_term(rng, d)),
    }
}

pub fn random_env(rng: &mut impl Rng) -> Env {
    let mut env = Env::new();
    for v in INT_VARS {
        env.insert(v.into(), V::I(rng.gen_range(-6..=6)));
    }
    for v in BOOL_VARS {
        env.insert(v.into(), V::B(rng.gen_bool(0.5)));
    }
    env
}

/// Every assignment with ints in [-6, 6] and both truth values for booleans.
pub fn all_envs() -> Vec<Env> {
    let mut out = Vec::new();
    for x in -6..=6 {
        for y in -6..=6 {
            for z in -6..=6 {
                for bits in 0..4 {
                    let mut env = Env::new();
                    env.insert("x".into(), V::I(x));
                    env.insert("y".into(), V::I(y));
                    env.insert("z".into(), V::I(z));
                    env.insert("b".into(), V::B(bits & 1 == 1));
                    env.insert("c".into(), V::B(bits & 2 == 2));
                    out.push(env);
                }
            }
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn product<'a, T>(pools: &[&'a [T]]) -> Vec<Vec<&'a T>> {
    let mut out = Vec::new();
    if pools.iter().any(|p| p.is_empty()) {
        return out;
    }
    let mut idx = vec![0; pools.len()];
    loop {
        out.push(idx.iter().zip(pools).map(|(&i, p)| &p[i]).collect());
        let mut k = pools.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < pools[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn holes(g: &Grammar, t: &Term, out: &mut Vec<String>) {
    match t {
        Term::Var(v) if g.is_nonterminal(v) => out.push(v.name.to_string()),
        Term::App(_, args) => args.iter().for_each(|a| holes(g, a, out)),
        _ => {}
    }
}

fn fill<'a>(g: &Grammar, t: &Term, picks: &mut impl Iterator<Item = &'a Term>) -> Term {
    match t {
        Term::Var(v) if g.is_nonterminal(v) => picks.next().expect("enough picks").clone(),
        Term::App(op, args) => Term::App(*op, args.iter().map(|a| fill(g, a, picks)).collect()),
        _ => t.clone(),
    }
}

/// All distinct terms derivable from each nonterminal, bucketed by exact
/// size, for sizes up to `max`.
pub fn grammar_terms(g: &Grammar, max: usize) -> HashMap<String, Vec<Vec<Term>>> {
    let names: Vec<String> = g.nonterminals.iter().map(|n| n.name.to_string()).collect();
    let mut table: HashMap<String, Vec<Vec<Term>>> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    let rules: Vec<(&str, &Term, Vec<String>, usize)> = g
        .rules
        .iter()
        .map(|r| {
            let mut hs = Vec::new();
            holes(g, &r.rhs, &mut hs);
            (&*r.lhs, &r.rhs, hs, term_size(&r.rhs))
        })
        .collect();
    let is_unit = |hs: &[String], base: usize| base == 0 && hs.len() == 1;
    for size in 0..=max {
        let mut layer: HashMap<String, HashSet<Term>> = names.iter().map(|n| (n.clone(), HashSet::new())).collect();
        for (lhs, rhs, hs, base) in &rules {
            if is_unit(hs, *base) || *base > size {
                continue;
            }
            let set = layer.get_mut(*lhs).unwrap();
            for parts in compositions(size - base, hs.len()) {
                let pools: Vec<&[Term]> = hs
                    .iter()
                    .zip(&parts)
                    .map(|(h, &s)| table[h].get(s).map_or(&[][..], |v| v.as_slice()))
                    .collect();
                for picks in product(&pools) {
                    set.insert(fill(g, rhs, &mut picks.into_iter()));
                }
            }
        }
        // close under unit rules at the same size
        loop {
            let mut changed = false;
            for (lhs, _, hs, base) in &rules {
                if !is_unit(hs, *base) {
                    continue;
                }
                let from: Vec<Term> = layer[&hs[0]].iter().cloned().collect();
                let to = layer.get_mut(*lhs).unwrap();
                for t in from {
                    changed |= to.insert(t);
                }
            }
            if !changed {
                break;
            }
        }
        for (n, set) in layer {
            table.get_mut(&n).unwrap().push(set.into_iter().collect());
        }
    }
    table
}

/// Every value of every datatype, bucketed by exact size, for sizes up to `max`.
pub fn datatype_values(f: &DatatypeFamily, max: usize) -> Vec<Vec<Vec<Arc<DtValue>>>> {
    let mut table: Vec<Vec<Vec<Arc<DtValue>>>> = vec![Vec::new(); f.datatypes.len()];
    for size in 0..=max {
        for (d, dt) in f.datatypes.iter().enumerate() {
            let mut layer = Vec::new();
            for (c, ctor) in dt.ctors.iter().enumerate() {
                if ctor.args.is_empty() {
                    if size == 0 {
                        layer.push(Arc::new(DtValue::leaf(d, c)));
                    }
                    continue;
                }
                if size == 0 {
                    continue;
                }
                for parts in compositions(size - 1, ctor.args.len()) {
                    let pools: Vec<&[Arc<DtValue>]> = ctor
                        .args
                        .iter()
                        .zip(&parts)
                        .map(|(&a, &s)| table[a].get(s).map_or(&[][..], |v| v.as_slice()))
                        .collect();
                    for kids in product(&pools) {
                        layer.push(Arc::new(DtValue::new(d, c, kids.into_iter().cloned().collect())));
                    }
                }
            }
            table[d].push(layer);
        }
    }
    table
}

/// `x`, `y` bound to the given values.
pub fn xy_env(x: i64, y: i64) -> Env {
    let mut env = Env::new();
    env.insert("x".into(), V::I(x));
    env.insert("y".into(), V::I(y));
    env
}
