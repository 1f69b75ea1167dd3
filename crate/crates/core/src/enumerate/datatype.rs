//! Grammars as families of algebraic datatypes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::rewrite::norm;
use crate::term::ops::fresh_name;
use crate::term::{Grammar, GrammarError, Nonterminal, Op, Rule, Sort, Symbol, Term, Value, Var};

/// How a constructor builds its analog.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Builder {
    /// A literal or a parameter.
    Leaf(Term),
    /// One signature operator applied to the children's analogs.
    Op(Op),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constructor {
    pub name: Symbol,
    /// Datatype of each child.
    pub args: Vec<usize>,
    pub builder: Builder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Datatype {
    pub name: Symbol,
    pub sort: Sort,
    pub ctors: Vec<Constructor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatatypeFamily {
    pub datatypes: Vec<Datatype>,
    pub start: usize,
    /// Datatype of each nonterminal.
    pub origin: Vec<(Symbol, usize)>,
    pub params: Vec<Var>,
    /// Rules removed by minimization.
    pub dropped: Vec<Rule>,
}

/// A datatype value: a constructor applied to child values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DtValue {
    pub dt: usize,
    pub ctor: usize,
    pub children: Vec<Arc<DtValue>>,
}

impl DtValue {
    pub fn new(dt: usize, ctor: usize, children: Vec<Arc<DtValue>>) -> DtValue {
        DtValue { dt, ctor, children }
    }

    pub fn leaf(dt: usize, ctor: usize) -> DtValue {
        DtValue::new(dt, ctor, Vec::new())
    }

    /// Number of non-nullary constructors.
    pub fn size(&self) -> usize {
        if self.children.is_empty() {
            0
        } else {
            1 + self.children.iter().map(|c| c.size()).sum::<usize>()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DtError {
    #[error("expected {expected} argument values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("argument {0} has the wrong sort")]
    ArgumentSort(usize),
    #[error("cannot read value: {0}")]
    Syntax(String),
}

fn ctor_base(b: &Builder) -> String {
    match b {
        Builder::Leaf(Term::Int(v)) => v.to_string(),
        Builder::Leaf(t) => t.to_string(),
        Builder::Op(op) => match op {
            Op::Add => "plus",
            Op::Mul => "mul",
            Op::Le => "leq",
            Op::Lt => "lt",
            Op::Ge => "geq",
            Op::Gt => "gt",
            Op::Eq => "eq",
            Op::Not => "not",
            Op::And => "and",
            Op::Or => "or",
            Op::Implies => "implies",
            Op::Ite => "if",
        }
        .to_string(),
    }
}

/// Rules of each nonterminal with unit rules replaced by the rules of their
/// target. Unit-rule cycles are rejected by grammar validation.
fn inline_unit_rules(g: &Grammar) -> Vec<(Nonterminal, Vec<Term>)> {
    fn expand(g: &Grammar, nt: &str, out: &mut Vec<Term>) {
        for r in g.rules_for(nt) {
            match &r.rhs {
                Term::Var(v) if g.is_nonterminal(v) => expand(g, &v.name, out),
                t => {
                    if !out.contains(t) {
                        out.push(t.clone());
                    }
                }
            }
        }
    }
    g.nonterminals
        .iter()
        .map(|nt| {
            let mut rules = Vec::new();
            expand(g, &nt.name, &mut rules);
            (nt.clone(), rules)
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Rule right-hand side with the i-th nonterminal occurrence replaced by
/// `holes[i]`.
fn with_holes(g: &Grammar, t: &Term, holes: &[Term], next: &mut usize) -> Term {
    match t {
        Term::Var(v) if g.is_nonterminal(v) => {
            *next += 1;
            holes[*next - 1].clone()
        }
        Term::App(op, args) => Term::App(*op, args.iter().map(|a| with_holes(g, a, holes, next)).collect()),
        t => t.clone(),
    }
}

/// Above this many nonterminal occurrences a rule is never compared for
/// redundancy.
const MAX_PERMUTED: usize = 5;

/// Whether `r` denotes the same terms as `q` up to a permutation of
/// equally-named nonterminal occurrences.
fn redundant(g: &Grammar, hole_base: &str, q: &Term, r: &Term) -> bool {
    let qn = g.nonterminals_in(q);
    let rn = g.nonterminals_in(r);
    if qn.len() != rn.len() || qn.len() > MAX_PERMUTED {
        return false;
    }
    let mut qs = qn.clone();
    let mut rs = rn.clone();
    qs.sort();
    rs.sort();
    if qs != rs {
        return false;
    }
    let sort_of = |n: &Symbol| g.nonterminal(n).expect("nonterminal").sort;
    let holes: Vec<Term> = rn
        .iter()
        .enumerate()
        .map(|(i, n)| Term::Var(Var::new(&format!("{hole_base}{i}"), sort_of(n))))
        .collect();
    let r_norm = norm(&with_holes(g, r, &holes, &mut 0));
    permutations(qn.len()).into_iter().any(|perm| {
        // q's i-th occurrence receives r's perm[i]-th hole
        if perm.iter().enumerate().any(|(i, &j)| qn[i] != rn[j]) {
            return false;
        }
        let qh: Vec<Term> = perm.iter().map(|&j| holes[j].clone()).collect();
        norm(&with_holes(g, q, &qh, &mut 0)) == r_norm
    })
}

struct Flattener<'g> {
    g: &'g Grammar,
    datatypes: Vec<Datatype>,
    aux_count: HashMap<usize, usize>,
}

impl Flattener<'_> {
    fn taken(&self, n: &str) -> bool {
        self.datatypes.iter().any(|d| &*d.name == n) || self.g.nonterminal(n).is_some()
    }

    fn aux(&mut self, parent: usize, t: &Term) -> usize {
        let count = self.aux_count.entry(parent).or_insert(0);
        *count += 1;
        let base = format!("{}{}", self.datatypes[parent].name, count);
        let name = fresh_name(&base, |n| self.taken(n));
        let sort = t.sort_of().expect("grammar rules are well sorted");
        let idx = self.datatypes.len();
        self.datatypes.push(Datatype {
            name: name.as_str().into(),
            sort,
            ctors: Vec::new(),
        });
        let c = self.ctor(idx, t);
        self.datatypes[idx].ctors.push(c);
        idx
    }

    fn ctor(&mut self, dt: usize, t: &Term) -> Constructor {
        let (args, builder) = match t {
            Term::App(op, children) => {
                let args = children
                    .iter()
                    .map(|c| match c {
                        Term::Var(v) if self.g.is_nonterminal(v) => self
                            .g
                            .nonterminals
                            .iter()
                            .position(|n| n.name == v.name)
                            .expect("nonterminal"),
                        c => self.aux(dt, c),
                    })
                    .collect();
                (args, Builder::Op(*op))
            }
            leaf => (Vec::new(), Builder::Leaf(leaf.clone())),
        };
        let base = ctor_base(&builder);
        let name = fresh_name(&base, |n| self.datatypes[dt].ctors.iter().any(|c| &*c.name == n));
        Constructor {
            name: name.as_str().into(),
            args,
            builder,
        }
    }
}

/// Flattened, minimized datatype encoding of a grammar: one datatype per
/// nonterminal plus single-constructor auxiliaries for nested rule symbols.
pub fn grammar_to_datatypes(g: &Grammar) -> Result<DatatypeFamily, GrammarError> {
    g.validate()?;
    let hole_base = fresh_name("_h", |n| {
        g.params.iter().any(|p| p.name.starts_with(n)) || g.nonterminals.iter().any(|p| p.name.starts_with(n))
    });
    let inlined = inline_unit_rules(g);
    let mut dropped = Vec::new();
    let mut kept_rules = Vec::new();
    for (nt, rules) in &inlined {
        let mut kept: Vec<Term> = Vec::new();
        for r in rules {
            if kept.iter().any(|q| redundant(g, &hole_base, q, r)) {
                dropped.push(Rule {
                    lhs: nt.name.clone(),
                    rhs: r.clone(),
                });
            } else {
                kept.push(r.clone());
            }
        }
        kept_rules.push(kept);
    }
    let mut f = Flattener {
        g,
        datatypes: g
            .nonterminals
            .iter()
            .map(|n| Datatype {
                name: n.name.clone(),
                sort: n.sort,
                ctors: Vec::new(),
            })
            .collect(),
        aux_count: HashMap::new(),
    };
    for (i, rules) in kept_rules.iter().enumerate() {
        for r in rules {
            let c = f.ctor(i, r);
            f.datatypes[i].ctors.push(c);
        }
    }
    let start = g
        .nonterminals
        .iter()
        .position(|n| n.name == g.start)
        .expect("validated start");
    Ok(DatatypeFamily {
        datatypes: f.datatypes,
        start,
        origin: g
            .nonterminals
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.clone(), i))
            .collect(),
        params: g.params.clone(),
        dropped,
    })
}

/// `I → 0 | 1 | params | I+I | ite(B,I,I)` and `B → I≤I | I=I | ¬B`, with
/// Bool parameters as `B` leaves; the start symbol has the return sort.
pub fn default_grammar(params: &[Var], ret: Sort) -> Grammar {
    let taken = |n: &str| params.iter().any(|p| &*p.name == n);
    let i_name = fresh_name("I", taken);
    let b_name = fresh_name("B", |n| taken(n) || n == i_name);
    let i = Term::Var(Var::int(&i_name));
    let b = Term::Var(Var::boolean(&b_name));
    let rule = |lhs: &str, rhs: Term| Rule {
        lhs: lhs.into(),
        rhs,
    };
    let mut rules = vec![rule(&i_name, Term::int(0)), rule(&i_name, Term::int(1))];
    for p in params.iter().filter(|p| p.sort == Sort::Int) {
        rules.push(rule(&i_name, Term::Var(p.clone())));
    }
    rules.push(rule(&i_name, Term::plus(i.clone(), i.clone())));
    rules.push(rule(&i_name, Term::ite(b.clone(), i.clone(), i.clone())));
    rules.push(rule(&b_name, Term::le(i.clone(), i.clone())));
    rules.push(rule(&b_name, Term::eq(i.clone(), i)));
    rules.push(rule(&b_name, Term::not(b)));
    for p in params.iter().filter(|p| p.sort == Sort::Bool) {
        rules.push(rule(&b_name, Term::Var(p.clone())));
    }
    Grammar {
        start: if ret == Sort::Int { i_name.as_str().into() } else { b_name.as_str().into() },
        nonterminals: vec![
            Nonterminal {
                name: i_name.as_str().into(),
                sort: Sort::Int,
            },
            Nonterminal {
                name: b_name.as_str().into(),
                sort: Sort::Bool,
            },
        ],
        rules,
        params: params.to_vec(),
    }
}

impl DatatypeFamily {
    pub fn datatype(&self, name: &str) -> Option<usize> {
        self.datatypes.iter().position(|d| &*d.name == name)
    }

    pub fn ctor(&self, dt: usize, name: &str) -> Option<usize> {
        self.datatypes[dt].ctors.iter().position(|c| &*c.name == name)
    }

    pub fn ctor_name(&self, v: &DtValue) -> &str {
        &self.datatypes[v.dt].ctors[v.ctor].name
    }

    pub fn to_analog(&self, v: &DtValue) -> Term {
        match &self.datatypes[v.dt].ctors[v.ctor].builder {
            Builder::Leaf(t) => t.clone(),
            Builder::Op(op) => Term::App(*op, v.children.iter().map(|c| self.to_analog(c)).collect()),
        }
    }

    /// Value of the analog of `v` with the parameters bound to `point`.
    pub fn eval_dt(&self, v: &DtValue, point: &[Value]) -> Result<Value, DtError> {
        if point.len() != self.params.len() {
            return Err(DtError::Arity {
                expected: self.params.len(),
                got: point.len(),
            });
        }
        for (i, (p, v)) in self.params.iter().zip(point).enumerate() {
            let ok = matches!((p.sort, v), (Sort::Int, Value::Int(_)) | (Sort::Bool, Value::Bool(_)));
            if !ok {
                return Err(DtError::ArgumentSort(i));
            }
        }
        Ok(self.eval_unchecked(v, point))
    }

    pub(crate) fn eval_unchecked(&self, v: &DtValue, point: &[Value]) -> Value {
        let int = |c: &DtValue| -> BigInt {
            match self.eval_unchecked(c, point) {
                Value::Int(i) => i,
                Value::Bool(_) => unreachable!("well-typed value"),
            }
        };
        let boolean = |c: &DtValue| -> bool { self.eval_unchecked(c, point) == Value::Bool(true) };
        let ch = &v.children;
        match &self.datatypes[v.dt].ctors[v.ctor].builder {
            Builder::Leaf(Term::Var(p)) => {
                let i = self.params.iter().position(|q| q == p).expect("parameter leaf");
                point[i].clone()
            }
            Builder::Leaf(Term::Int(c)) => Value::Int(c.clone()),
            Builder::Leaf(Term::Bool(b)) => Value::Bool(*b),
            Builder::Leaf(t) => unreachable!("leaf {t}"),
            Builder::Op(op) => match op {
                Op::Add => Value::Int(ch.iter().map(|c| int(c)).sum()),
                Op::Mul => Value::Int(int(&ch[0]) * int(&ch[1])),
                Op::Le => Value::Bool(int(&ch[0]) <= int(&ch[1])),
                Op::Lt => Value::Bool(int(&ch[0]) < int(&ch[1])),
                Op::Ge => Value::Bool(int(&ch[0]) >= int(&ch[1])),
                Op::Gt => Value::Bool(int(&ch[0]) > int(&ch[1])),
                Op::Eq => Value::Bool(self.eval_unchecked(&ch[0], point) == self.eval_unchecked(&ch[1], point)),
                Op::Not => Value::Bool(!boolean(&ch[0])),
                Op::And => Value::Bool(ch.iter().all(|c| boolean(c))),
                Op::Or => Value::Bool(ch.iter().any(|c| boolean(c))),
                Op::Implies => Value::Bool(!boolean(&ch[0]) || boolean(&ch[1])),
                Op::Ite => {
                    if boolean(&ch[0]) {
                        self.eval_unchecked(&ch[1], point)
                    } else {
                        self.eval_unchecked(&ch[2], point)
                    }
                }
            },
        }
    }

    /// Render as constructor terms, e.g. `if(leq(y, x), x, y)`.
    pub fn show(&self, v: &DtValue) -> String {
        let mut s = String::new();
        self.show_into(v, &mut s);
        s
    }

    fn show_into(&self, v: &DtValue, s: &mut String) {
        s.push_str(self.ctor_name(v));
        if v.children.is_empty() {
            return;
        }
        s.push('(');
        for (i, c) in v.children.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            self.show_into(c, s);
        }
        s.push(')');
    }

    /// Read a value of datatype `dt` written as by [`DatatypeFamily::show`].
    pub fn parse_value(&self, dt: usize, text: &str) -> Result<DtValue, DtError> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let v = self.parse_at(dt, &tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(DtError::Syntax(format!("trailing input in {text}")));
        }
        Ok(v)
    }

    fn parse_at(&self, dt: usize, toks: &[String], pos: &mut usize) -> Result<DtValue, DtError> {
        let name = toks
            .get(*pos)
            .ok_or_else(|| DtError::Syntax("unexpected end".into()))?;
        *pos += 1;
        let ctor = self.ctor(dt, name).ok_or_else(|| {
            DtError::Syntax(format!("no constructor {name} in {}", self.datatypes[dt].name))
        })?;
        let args = &self.datatypes[dt].ctors[ctor].args;
        let mut children = Vec::with_capacity(args.len());
        if !args.is_empty() {
            expect(toks, pos, "(")?;
            for (i, &a) in args.iter().enumerate() {
                if i > 0 {
                    expect(toks, pos, ",")?;
                }
                children.push(Arc::new(self.parse_at(a, toks, pos)?));
            }
            expect(toks, pos, ")")?;
        }
        Ok(DtValue::new(dt, ctor, children))
    }

    /// Datatype declarations, one line per datatype.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for d in &self.datatypes {
            let ctors: Vec<String> = d
                .ctors
                .iter()
                .map(|c| {
                    if c.args.is_empty() {
                        c.name.to_string()
                    } else {
                        let args: Vec<&str> = c.args.iter().map(|a| &*self.datatypes[*a].name).collect();
                        format!("{}({})", c.name, args.join(", "))
                    }
                })
                .collect();
            let _ = writeln!(s, "{} = {}", d.name, ctors.join(" | "));
        }
        s
    }
}

fn expect(toks: &[String], pos: &mut usize, want: &str) -> Result<(), DtError> {
    if toks.get(*pos).map(String::as_str) == Some(want) {
        *pos += 1;
        Ok(())
    } else {
        Err(DtError::Syntax(format!("expected {want}")))
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c == '(' || c == ')' || c == ',' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
