//! Blocking patterns: the negations of symmetry-breaking clauses.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::datatype::{DatatypeFamily, DtValue};
use crate::rewrite::{key_of_normal, norm, CanonicalKey};
use crate::term::ops::fresh_name;
use crate::term::{Op, Symbol, Term, Value, Var};

/// The `n`-th child (1-based) of datatype `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub dt: usize,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectorPath(pub Vec<Step>);

impl SelectorPath {
    pub fn root() -> SelectorPath {
        SelectorPath(Vec::new())
    }

    pub fn child(&self, step: Step) -> SelectorPath {
        let mut s = self.0.clone();
        s.push(step);
        SelectorPath(s)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The subvalue at this path, if every step resolves.
    pub fn resolve<'v>(&self, v: &'v DtValue) -> Option<&'v DtValue> {
        let mut cur = v;
        for s in &self.0 {
            cur = cur.children.iter().filter(|c| c.dt == s.dt).nth(s.n - 1)?;
        }
        Some(cur)
    }
}

/// Why a pattern exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Justification {
    /// Same normal form as a retained value.
    Rewriter,
    /// Same values on the example points as a retained value.
    Signature,
    /// Refuted by the verifier.
    Refuted,
    /// Fixed at startup from the constructors alone.
    Seed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockingPattern {
    pub anchor: usize,
    /// Pre-order; the first constraint is always at the root.
    pub constraints: Vec<(SelectorPath, usize)>,
    pub justification: Justification,
}

impl BlockingPattern {
    /// Whether the pattern may be applied below the root. Rewriter patterns
    /// hold in every context; signature and refutation patterns only at the
    /// root, since the example points say nothing about subterms.
    pub fn shiftable(&self) -> bool {
        matches!(self.justification, Justification::Rewriter | Justification::Seed)
    }

    pub fn root_ctor(&self) -> usize {
        self.constraints[0].1
    }

    pub fn blocks(&self, v: &DtValue) -> bool {
        v.dt == self.anchor
            && self
                .constraints
                .iter()
                .all(|(p, c)| p.resolve(v).is_some_and(|s| s.ctor == *c))
    }

    /// Whether the pattern blocks `v` at the root or, when shiftable, at any
    /// nested position of the anchor datatype.
    pub fn blocks_anywhere(&self, v: &DtValue) -> bool {
        if self.blocks(v) {
            return true;
        }
        self.shiftable() && v.children.iter().any(|c| self.blocks_anywhere(c))
    }

    pub fn display<'a>(&'a self, family: &'a DatatypeFamily) -> impl fmt::Display + 'a {
        PatternDisplay { p: self, family }
    }
}

struct PatternDisplay<'a> {
    p: &'a BlockingPattern,
    family: &'a DatatypeFamily,
}

impl fmt::Display for PatternDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dts = &self.family.datatypes;
        f.write_str("{")?;
        for (i, (path, c)) in self.p.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            // datatype of the constrained position
            let dt = path.0.last().map_or(self.p.anchor, |s| s.dt);
            if path.is_root() {
                f.write_str("ε")?;
            }
            for (j, s) in path.0.iter().enumerate() {
                if j > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{}#{}", dts[s.dt].name, s.n)?;
            }
            write!(f, "={}", dts[dt].ctors[*c].name)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("selector path does not lead to the pattern's datatype")]
    TypeMismatch,
}

fn step_for(parent: &DtValue, i: usize) -> Step {
    let dt = parent.children[i].dt;
    let n = parent.children[..i].iter().filter(|c| c.dt == dt).count() + 1;
    Step { dt, n }
}

/// Every node of `v` in pre-order, with its path.
fn positions(v: &DtValue) -> Vec<(SelectorPath, &DtValue)> {
    fn go<'v>(v: &'v DtValue, path: SelectorPath, out: &mut Vec<(SelectorPath, &'v DtValue)>) {
        out.push((path.clone(), v));
        for (i, c) in v.children.iter().enumerate() {
            go(c, path.child(step_for(v, i)), out);
        }
    }
    let mut out = Vec::new();
    go(v, SelectorPath::root(), &mut out);
    out
}

/// Blocks exactly `v`.
pub fn make_blocking_pattern(v: &DtValue, justification: Justification) -> BlockingPattern {
    BlockingPattern {
        anchor: v.dt,
        constraints: positions(v).into_iter().map(|(p, n)| (p, n.ctor)).collect(),
        justification,
    }
}

/// Prefix every path of `p` so that it applies at `prefix` below a value of
/// datatype `root`.
pub fn shift_pattern(
    family: &DatatypeFamily,
    p: &BlockingPattern,
    root: usize,
    prefix: &SelectorPath,
) -> Result<BlockingPattern, PatternError> {
    let mut dt = root;
    for s in &prefix.0 {
        let ok = family.datatypes[dt]
            .ctors
            .iter()
            .any(|c| c.args.iter().filter(|&&a| a == s.dt).count() >= s.n);
        if !ok || s.n == 0 {
            return Err(PatternError::TypeMismatch);
        }
        dt = s.dt;
    }
    if dt != p.anchor {
        return Err(PatternError::TypeMismatch);
    }
    Ok(BlockingPattern {
        anchor: root,
        constraints: p
            .constraints
            .iter()
            .map(|(path, c)| {
                let mut full = prefix.0.clone();
                full.extend_from_slice(&path.0);
                (SelectorPath(full), *c)
            })
            .collect(),
        justification: p.justification,
    })
}

/// The evidence a pruned value was redundant.
#[derive(Clone, Copy, Debug)]
pub enum Witness<'a> {
    /// Key of the retained value with the same normal form.
    Rewriter(&'a CanonicalKey),
    /// Example points and the retained value's outputs on them.
    Signature {
        points: &'a [Vec<Value>],
        vector: &'a [Value],
    },
}

/// Analogs of values with some subtrees replaced by fresh variables.
pub(crate) struct Holes<'f> {
    family: &'f DatatypeFamily,
    base: String,
    /// Hole name to pre-order position.
    index: HashMap<Symbol, usize>,
}

fn node_count(v: &DtValue) -> usize {
    1 + v.children.iter().map(|c| node_count(c)).sum::<usize>()
}

impl<'f> Holes<'f> {
    pub(crate) fn new(family: &'f DatatypeFamily) -> Holes<'f> {
        let base = fresh_name("_z", |n| family.params.iter().any(|p| p.name.starts_with(n)));
        Holes {
            family,
            base,
            index: HashMap::new(),
        }
    }

    fn hole(&mut self, pos: usize, dt: usize) -> Term {
        let name: Symbol = format!("{}{pos}", self.base).as_str().into();
        self.index.insert(name.clone(), pos);
        Term::Var(Var::new(&name, self.family.datatypes[dt].sort))
    }

    /// Analog of `v` with the pre-order positions in `dropped` as holes.
    fn analog(&mut self, v: &DtValue, dropped: &HashSet<usize>) -> Term {
        let mut pos = 0;
        self.go(v, dropped, &mut pos)
    }

    fn go(&mut self, v: &DtValue, dropped: &HashSet<usize>, pos: &mut usize) -> Term {
        let me = *pos;
        if dropped.contains(&me) {
            *pos += node_count(v);
            return self.hole(me, v.dt);
        }
        *pos += 1;
        let ctor = &self.family.datatypes[v.dt].ctors[v.ctor];
        match &ctor.builder {
            super::datatype::Builder::Leaf(t) => t.clone(),
            super::datatype::Builder::Op(op) => {
                Term::App(*op, v.children.iter().map(|c| self.go(c, dropped, pos)).collect())
            }
        }
    }

    fn position_of(&self, t: &Term) -> Option<usize> {
        match t {
            Term::Var(v) => self.index.get(&v.name).copied(),
            _ => None,
        }
    }

    fn mentions_hole(&self, t: &Term) -> bool {
        t.free_vars().iter().any(|v| self.index.contains_key(&v.name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum PVal {
    Known(Value),
    Hole(usize),
    Unknown,
}

/// Evaluation with holes left open, tracking a hole passed through unchanged.
fn peval(t: &Term, params: &[Var], point: &[Value], holes: &Holes) -> PVal {
    use PVal::*;
    let ev = |a: &Term| peval(a, params, point, holes);
    let int = |p: &PVal| -> Option<BigInt> {
        match p {
            Known(Value::Int(i)) => Some(i.clone()),
            _ => None,
        }
    };
    let boolean = |p: &PVal| -> Option<bool> {
        match p {
            Known(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    };
    match t {
        Term::Int(i) => Known(Value::Int(i.clone())),
        Term::Bool(b) => Known(Value::Bool(*b)),
        Term::Var(v) => {
            if let Some(h) = holes.position_of(t) {
                return Hole(h);
            }
            match params.iter().position(|p| p == v) {
                Some(i) => Known(point[i].clone()),
                None => Unknown,
            }
        }
        Term::App(op, args) => {
            let vals: Vec<PVal> = args.iter().map(ev).collect();
            match op {
                Op::Add => {
                    let mut sum = BigInt::zero();
                    let mut hole = None;
                    for v in &vals {
                        match v {
                            Known(Value::Int(i)) => sum += i,
                            Hole(h) if hole.is_none() => hole = Some(*h),
                            _ => return Unknown,
                        }
                    }
                    match hole {
                        None => Known(Value::Int(sum)),
                        Some(h) if sum.is_zero() => Hole(h),
                        Some(_) => Unknown,
                    }
                }
                Op::Mul => match (int(&vals[0]), &vals[1]) {
                    (Some(c), Known(Value::Int(i))) => Known(Value::Int(c * i)),
                    (Some(c), Hole(h)) if c.is_one() => Hole(*h),
                    _ => Unknown,
                },
                Op::Le | Op::Lt | Op::Ge | Op::Gt => match (int(&vals[0]), int(&vals[1])) {
                    (Some(a), Some(b)) => Known(Value::Bool(match op {
                        Op::Le => a <= b,
                        Op::Lt => a < b,
                        Op::Ge => a >= b,
                        _ => a > b,
                    })),
                    _ => match (&vals[0], &vals[1]) {
                        (Hole(a), Hole(b)) if a == b => Known(Value::Bool(matches!(op, Op::Le | Op::Ge))),
                        _ => Unknown,
                    },
                },
                Op::Eq => match (&vals[0], &vals[1]) {
                    (Known(a), Known(b)) => Known(Value::Bool(a == b)),
                    (Hole(a), Hole(b)) if a == b => Known(Value::Bool(true)),
                    _ => Unknown,
                },
                Op::Not => match boolean(&vals[0]) {
                    Some(b) => Known(Value::Bool(!b)),
                    None => Unknown,
                },
                Op::And | Op::Or => {
                    let absorbing = *op == Op::Or;
                    if vals.iter().any(|v| boolean(v) == Some(absorbing)) {
                        Known(Value::Bool(absorbing))
                    } else if vals.iter().all(|v| boolean(v).is_some()) {
                        Known(Value::Bool(!absorbing))
                    } else {
                        Unknown
                    }
                }
                Op::Implies => match (boolean(&vals[0]), boolean(&vals[1])) {
                    (Some(false), _) | (_, Some(true)) => Known(Value::Bool(true)),
                    (Some(true), Some(false)) => Known(Value::Bool(false)),
                    _ => Unknown,
                },
                Op::Ite => match boolean(&vals[0]) {
                    Some(true) => vals[1].clone(),
                    Some(false) => vals[2].clone(),
                    None if vals[1] == vals[2] && vals[1] != Unknown => vals[1].clone(),
                    None => Unknown,
                },
            }
        }
        Term::Apply(..) | Term::Lambda(_) => Unknown,
    }
}

/// Datatype of each pre-order position of `v`.
fn position_dts(v: &DtValue) -> Vec<usize> {
    positions(v).into_iter().map(|(_, n)| n.dt).collect()
}

/// Whether the analog with `dropped` as holes still carries the justification:
/// it reduces to a hole of the anchor datatype, or to the witness itself.
fn preserves(holes: &mut Holes, v: &DtValue, dts: &[usize], dropped: &HashSet<usize>, w: &Witness) -> bool {
    let t = holes.analog(v, dropped);
    match w {
        Witness::Rewriter(key) => {
            let n = norm(&t);
            if let Some(h) = holes.position_of(&n) {
                return dts[h] == v.dt;
            }
            !holes.mentions_hole(&n) && key_of_normal(&n) == **key
        }
        Witness::Signature { points, vector } => {
            let params = holes.family.params.clone();
            let vals: Vec<PVal> = points.iter().map(|p| peval(&t, &params, p, holes)).collect();
            if let Some(PVal::Hole(h)) = vals.first() {
                if dts[*h] == v.dt && vals.iter().all(|x| *x == PVal::Hole(*h)) {
                    return true;
                }
            }
            vals.len() == vector.len()
                && vals.iter().zip(vector.iter()).all(|(a, b)| *a == PVal::Known(b.clone()))
        }
    }
}

/// Greedily drop subtrees of `v`, in pre-order, whose replacement by a fresh
/// variable of the same datatype keeps the witness valid.
pub fn generalize_pattern(family: &DatatypeFamily, v: &DtValue, witness: Witness) -> BlockingPattern {
    let justification = match witness {
        Witness::Rewriter(_) => Justification::Rewriter,
        Witness::Signature { .. } => Justification::Signature,
    };
    let pos = positions(v);
    let dts = position_dts(v);
    let sizes: Vec<usize> = pos.iter().map(|(_, n)| node_count(n)).collect();
    let mut holes = Holes::new(family);
    let mut dropped = HashSet::new();
    let mut i = 1;
    while i < pos.len() {
        dropped.insert(i);
        if preserves(&mut holes, v, &dts, &dropped, &witness) {
            // skip the subtree
            i += sizes[i];
        } else {
            dropped.remove(&i);
            i += 1;
        }
    }
    let mut constraints = Vec::new();
    let mut i = 0;
    while i < pos.len() {
        if dropped.contains(&i) {
            i += sizes[i];
        } else {
            constraints.push((pos[i].0.clone(), pos[i].1.ctor));
            i += 1;
        }
    }
    BlockingPattern {
        anchor: v.dt,
        constraints,
        justification,
    }
}

/// A value with some positions left open.
#[derive(Clone, Debug)]
enum Shape {
    Hole(usize),
    Node(usize, usize, Vec<Shape>),
}

impl Shape {
    fn to_value_parts(&self, out: &mut Vec<(SelectorPath, usize)>, path: SelectorPath) {
        if let Shape::Node(_, ctor, children) = self {
            out.push((path.clone(), *ctor));
            let mut seen: HashMap<usize, usize> = HashMap::new();
            for c in children {
                let dt = match c {
                    Shape::Hole(d) | Shape::Node(d, ..) => *d,
                };
                let n = seen.entry(dt).or_insert(0);
                *n += 1;
                c.to_value_parts(out, path.child(Step { dt, n: *n }));
            }
        }
    }

    fn analog(&self, family: &DatatypeFamily, holes: &mut Holes, next: &mut usize, hole_dts: &mut Vec<usize>) -> Term {
        match self {
            Shape::Hole(dt) => {
                let t = holes.hole(*next, *dt);
                *next += 1;
                hole_dts.push(*dt);
                t
            }
            Shape::Node(dt, ctor, children) => {
                *next += 1;
                hole_dts.push(*dt);
                match &family.datatypes[*dt].ctors[*ctor].builder {
                    super::datatype::Builder::Leaf(t) => t.clone(),
                    super::datatype::Builder::Op(op) => Term::App(
                        *op,
                        children.iter().map(|c| c.analog(family, holes, next, hole_dts)).collect(),
                    ),
                }
            }
        }
    }
}

/// Shapes per constructor beyond which seeds stop at depth one.
const SEED_SHAPES: usize = 5000;

fn child_options(family: &DatatypeFamily, dt: usize, depth: usize) -> Vec<Shape> {
    let mut out = vec![Shape::Hole(dt)];
    for (ci, c) in family.datatypes[dt].ctors.iter().enumerate() {
        if c.args.is_empty() {
            out.push(Shape::Node(dt, ci, Vec::new()));
        } else if depth > 0 {
            for children in product(&c.args.iter().map(|&a| child_options(family, a, depth - 1)).collect::<Vec<_>>()) {
                out.push(Shape::Node(dt, ci, children));
            }
        }
    }
    out
}

fn product(options: &[Vec<Shape>]) -> Vec<Vec<Shape>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Patterns for shapes of depth at most two whose analog simplifies to one of
/// their open positions of the same datatype, such as `x + 0` or an `ite`
/// with a constant condition.
pub fn seed_patterns(family: &DatatypeFamily) -> Vec<BlockingPattern> {
    let mut seeds: Vec<BlockingPattern> = Vec::new();
    for (dt, d) in family.datatypes.iter().enumerate() {
        for (ci, c) in d.ctors.iter().enumerate() {
            if c.args.is_empty() {
                continue;
            }
            let deep: Vec<Vec<Shape>> = c.args.iter().map(|&a| child_options(family, a, 1)).collect();
            let count = deep.iter().map(Vec::len).try_fold(1usize, |acc, n| acc.checked_mul(n));
            let options = if count.is_some_and(|n| n <= SEED_SHAPES) {
                deep
            } else {
                c.args.iter().map(|&a| child_options(family, a, 0)).collect()
            };
            let mut found: Vec<BlockingPattern> = Vec::new();
            for children in product(&options) {
                let shape = Shape::Node(dt, ci, children);
                let mut holes = Holes::new(family);
                let mut dts = Vec::new();
                let t = shape.analog(family, &mut holes, &mut 0, &mut dts);
                let n = norm(&t);
                let Some(h) = holes.position_of(&n) else {
                    continue;
                };
                if dts[h] != dt {
                    continue;
                }
                let mut constraints = Vec::new();
                shape.to_value_parts(&mut constraints, SelectorPath::root());
                found.push(BlockingPattern {
                    anchor: dt,
                    constraints,
                    justification: Justification::Seed,
                });
            }
            // keep only the most general ones
            found.sort_by_key(|p| p.constraints.len());
            for p in found {
                let subsumed = seeds.iter().any(|q| {
                    q.anchor == p.anchor && q.constraints.iter().all(|c| p.constraints.contains(c))
                });
                if !subsumed {
                    seeds.push(p);
                }
            }
        }
    }
    seeds
}

/// Patterns indexed by anchor and root constructor.
#[derive(Default)]
pub(crate) struct PatternStore {
    by_root: HashMap<(usize, usize), Vec<BlockingPattern>>,
    seen: HashSet<BlockingPattern>,
}

impl PatternStore {
    pub(crate) fn insert(&mut self, p: BlockingPattern) -> bool {
        if !self.seen.insert(p.clone()) {
            return false;
        }
        self.by_root.entry((p.anchor, p.root_ctor())).or_default().push(p);
        true
    }

    /// First pattern blocking `v` at the root.
    pub(crate) fn blocking(&self, v: &DtValue) -> Option<&BlockingPattern> {
        self.by_root
            .get(&(v.dt, v.ctor))
            .and_then(|ps| ps.iter().find(|p| p.blocks(v)))
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = &BlockingPattern> {
        self.by_root.values().flatten()
    }
}
