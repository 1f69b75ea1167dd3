//! Decision procedure for quantifier-free linear integer arithmetic with
//! booleans.
//!
//! The formula is normalized, integer `ite` terms are replaced by fresh
//! variables with guarded definitions, and the result is searched by a
//! DPLL-style procedure that checks the arithmetic literals of every partial
//! assignment with simplex plus branch and bound.

mod dpll;
mod lia;
mod simplex;

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rewrite::norm;
use crate::term::{Assignment, Op, Sort, Symbol, Term, Value, Var};
use dpll::{Atom, Formula, Search};
use lia::LinExpr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// A countermodel.
    Invalid(Assignment),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("ill-sorted formula: {0}")]
    IllSorted(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("resource limit exceeded")]
    ResourceLimit,
}

pub const DEFAULT_LIMIT: u64 = 2_000_000;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Variables whose constraints the search should try to satisfy first.
    pub prefer: Vec<Var>,
    /// Bound on search nodes plus simplex pivots.
    pub limit: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            prefer: Vec::new(),
            limit: DEFAULT_LIMIT,
        }
    }
}

pub(crate) struct Budget {
    left: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget { left: limit }
    }

    pub fn spend(&mut self, n: u64) -> Result<(), SolverError> {
        if self.left < n {
            return Err(SolverError::ResourceLimit);
        }
        self.left -= n;
        Ok(())
    }
}

pub fn check_sat(f: &Term) -> Result<SatResult, SolverError> {
    check_sat_with(f, &SolverOptions::default())
}

pub fn check_sat_with(f: &Term, opts: &SolverOptions) -> Result<SatResult, SolverError> {
    match f.sort_of() {
        Ok(Sort::Bool) => {}
        Ok(s) => return Err(SolverError::IllSorted(format!("formula has sort {s}"))),
        Err(e) => return Err(SolverError::IllSorted(e.to_string())),
    }
    let free = f.free_vars();
    let nf = norm(f);
    let prefer: BTreeSet<Symbol> = opts.prefer.iter().map(|v| v.name.clone()).collect();
    let mut b = Builder::new(prefer);
    let main = b.build(&nf, true)?;
    let mut parts = std::mem::take(&mut b.side);
    parts.push(main);
    let root = b.and(parts);
    let atom_pref = b.atom_pref.clone();
    let mut budget = Budget::new(opts.limit);
    let search = Search::new(&root, &b.atoms, atom_pref, b.nvars, &mut budget);
    let Some(model) = search.run()? else {
        return Ok(SatResult::Unsat);
    };
    let mut a = Assignment::new();
    for v in free {
        let val = match v.sort {
            Sort::Int => Value::Int(
                b.int_index
                    .get(&v.name)
                    .map(|i| model.ints[*i].clone())
                    .unwrap_or_default(),
            ),
            Sort::Bool => Value::Bool(
                b.bool_index
                    .get(&v.name)
                    .and_then(|i| model.atoms[*i])
                    .unwrap_or(false),
            ),
        };
        a.set(&v, val);
    }
    Ok(SatResult::Sat(a))
}

pub fn check_valid(f: &Term) -> Result<Validity, SolverError> {
    match check_sat(&Term::not(f.clone()))? {
        SatResult::Unsat => Ok(Validity::Valid),
        SatResult::Sat(m) => Ok(Validity::Invalid(m)),
    }
}

/// Whether two terms of the same sort agree under every assignment.
pub fn are_equivalent(a: &Term, b: &Term) -> Result<bool, SolverError> {
    let sa = a.sort_of().map_err(|e| SolverError::IllSorted(e.to_string()))?;
    let sb = b.sort_of().map_err(|e| SolverError::IllSorted(e.to_string()))?;
    if sa != sb {
        return Err(SolverError::IllSorted(format!("comparing {sa} with {sb}")));
    }
    Ok(check_valid(&Term::eq(a.clone(), b.clone()))? == Validity::Valid)
}

struct Builder {
    prefer: BTreeSet<Symbol>,
    int_index: HashMap<Symbol, usize>,
    bool_index: HashMap<Symbol, usize>,
    var_pref: Vec<bool>,
    nvars: usize,
    atoms: Vec<Atom>,
    atom_pref: Vec<bool>,
    atom_index: HashMap<Atom, usize>,
    ites: HashMap<Term, usize>,
    side: Vec<Formula>,
}

impl Builder {
    fn new(prefer: BTreeSet<Symbol>) -> Builder {
        Builder {
            prefer,
            int_index: HashMap::new(),
            bool_index: HashMap::new(),
            var_pref: Vec::new(),
            nvars: 0,
            atoms: Vec::new(),
            atom_pref: Vec::new(),
            atom_index: HashMap::new(),
            ites: HashMap::new(),
            side: Vec::new(),
        }
    }

    fn fresh_var(&mut self, preferred: bool) -> usize {
        self.nvars += 1;
        self.var_pref.push(preferred);
        self.nvars - 1
    }

    fn atom(&mut self, atom: Atom, preferred: bool) -> usize {
        if let Some(i) = self.atom_index.get(&atom) {
            return *i;
        }
        self.atoms.push(atom.clone());
        self.atom_pref.push(preferred);
        self.atom_index.insert(atom, self.atoms.len() - 1);
        self.atoms.len() - 1
    }

    fn node_pref(&self, cs: &[Formula]) -> bool {
        cs.iter().any(|c| match c {
            Formula::Const(_) => false,
            Formula::Lit(a, _) => self.atom_pref[*a],
            Formula::And(_, p) | Formula::Or(_, p) => *p,
        })
    }

    fn and(&self, cs: Vec<Formula>) -> Formula {
        self.junction(cs, true)
    }

    fn or(&self, cs: Vec<Formula>) -> Formula {
        self.junction(cs, false)
    }

    fn junction(&self, cs: Vec<Formula>, conj: bool) -> Formula {
        let mut kept = Vec::with_capacity(cs.len());
        for c in cs {
            match c {
                Formula::Const(b) if b == conj => {}
                Formula::Const(_) => return Formula::Const(!conj),
                c => kept.push(c),
            }
        }
        match kept.len() {
            0 => Formula::Const(conj),
            1 => kept.pop().expect("one"),
            _ => {
                let p = self.node_pref(&kept);
                if conj {
                    Formula::And(kept, p)
                } else {
                    Formula::Or(kept, p)
                }
            }
        }
    }

    fn le_lit(&mut self, mut e: LinExpr, pol: bool) -> Formula {
        if e.coeffs.is_empty() {
            return Formula::Const(!e.constant.is_positive() == pol);
        }
        let g = e.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_one() {
            for c in e.coeffs.values_mut() {
                *c /= &g;
            }
            e.constant = e.constant.div_ceil(&g);
        }
        let (e, pol) = if e.coeffs.values().next().is_some_and(|c| c.is_negative()) {
            let mut n = e.negated();
            n.constant += 1;
            (n, !pol)
        } else {
            (e, pol)
        };
        let preferred = e.coeffs.keys().any(|v| self.var_pref[*v]);
        let a = self.atom(Atom::Le(e), preferred);
        Formula::Lit(a, pol)
    }

    fn eq_lit(&mut self, e: LinExpr, pol: bool) -> Formula {
        let n = e.negated();
        let a = self.le_lit(e, pol);
        let b = self.le_lit(n, pol);
        if pol {
            self.and(vec![a, b])
        } else {
            self.or(vec![a, b])
        }
    }

    fn linearize(&mut self, t: &Term) -> Result<LinExpr, SolverError> {
        Ok(match t {
            Term::Int(c) => LinExpr::constant(c.clone()),
            Term::Var(v) => {
                let i = match self.int_index.get(&v.name) {
                    Some(i) => *i,
                    None => {
                        let i = self.fresh_var(self.prefer.contains(&v.name));
                        self.int_index.insert(v.name.clone(), i);
                        i
                    }
                };
                LinExpr::var(i)
            }
            Term::App(Op::Add, args) => {
                let mut e = LinExpr::default();
                for a in args {
                    let ea = self.linearize(a)?;
                    e.add_scaled(&ea, &BigInt::one());
                }
                e
            }
            Term::App(Op::Mul, args) => {
                let k = args[0].as_int().expect("literal factor").clone();
                let inner = self.linearize(&args[1])?;
                let mut e = LinExpr::default();
                e.add_scaled(&inner, &k);
                e
            }
            Term::App(Op::Ite, args) => {
                if let Some(v) = self.ites.get(t) {
                    return Ok(LinExpr::var(*v));
                }
                let preferred = t.free_vars().iter().any(|v| self.prefer.contains(&v.name));
                let v = self.fresh_var(preferred);
                self.ites.insert(t.clone(), v);
                let then = self.linearize(&args[1])?;
                let other = self.linearize(&args[2])?;
                let c_pos = self.build(&args[0], true)?;
                let c_neg = self.build(&args[0], false)?;
                let mut d1 = LinExpr::var(v);
                d1.add_scaled(&then, &BigInt::from(-1));
                let mut d2 = LinExpr::var(v);
                d2.add_scaled(&other, &BigInt::from(-1));
                let e1 = self.eq_lit(d1, true);
                let e2 = self.eq_lit(d2, true);
                let s1 = self.or(vec![c_neg, e1]);
                let s2 = self.or(vec![c_pos, e2]);
                self.side.push(s1);
                self.side.push(s2);
                LinExpr::var(v)
            }
            Term::Apply(f, ..) => return Err(SolverError::Unsupported(format!("function {f}"))),
            t => return Err(SolverError::IllSorted(format!("expected an integer term, got {t}"))),
        })
    }

    fn diff(&mut self, a: &Term, b: &Term) -> Result<LinExpr, SolverError> {
        let mut e = self.linearize(a)?;
        let eb = self.linearize(b)?;
        e.add_scaled(&eb, &BigInt::from(-1));
        Ok(e)
    }

    fn build(&mut self, t: &Term, pol: bool) -> Result<Formula, SolverError> {
        Ok(match t {
            Term::Bool(b) => Formula::Const(*b == pol),
            Term::Var(v) if v.sort == Sort::Bool => {
                let i = match self.bool_index.get(&v.name) {
                    Some(i) => *i,
                    None => {
                        let i = self.atom(Atom::Bool(self.bool_index.len()), self.prefer.contains(&v.name));
                        self.bool_index.insert(v.name.clone(), i);
                        i
                    }
                };
                Formula::Lit(i, pol)
            }
            Term::App(op, args) => match op {
                Op::Not => self.build(&args[0], !pol)?,
                Op::And | Op::Or => {
                    let cs = args
                        .iter()
                        .map(|a| self.build(a, pol))
                        .collect::<Result<Vec<_>, _>>()?;
                    if (*op == Op::And) == pol {
                        self.and(cs)
                    } else {
                        self.or(cs)
                    }
                }
                Op::Implies => {
                    let a = self.build(&args[0], !pol)?;
                    let b = self.build(&args[1], pol)?;
                    if pol {
                        self.or(vec![a, b])
                    } else {
                        self.and(vec![a, b])
                    }
                }
                Op::Le | Op::Lt | Op::Ge | Op::Gt => {
                    let mut e = match op {
                        Op::Le | Op::Lt => self.diff(&args[0], &args[1])?,
                        _ => self.diff(&args[1], &args[0])?,
                    };
                    if matches!(op, Op::Lt | Op::Gt) {
                        e.constant += 1;
                    }
                    self.le_lit(e, pol)
                }
                Op::Eq if crate::rewrite::is_int(&args[0]) => {
                    let e = self.diff(&args[0], &args[1])?;
                    self.eq_lit(e, pol)
                }
                Op::Eq => {
                    let ap = self.build(&args[0], true)?;
                    let an = self.build(&args[0], false)?;
                    let bp = self.build(&args[1], true)?;
                    let bn = self.build(&args[1], false)?;
                    let (x, y) = if pol {
                        (self.and(vec![ap, bp]), self.and(vec![an, bn]))
                    } else {
                        (self.and(vec![ap, bn]), self.and(vec![an, bp]))
                    };
                    self.or(vec![x, y])
                }
                Op::Ite => {
                    let cp = self.build(&args[0], true)?;
                    let cn = self.build(&args[0], false)?;
                    let a = self.build(&args[1], pol)?;
                    let b = self.build(&args[2], pol)?;
                    let x = self.and(vec![cp, a]);
                    let y = self.and(vec![cn, b]);
                    self.or(vec![x, y])
                }
                Op::Add | Op::Mul => {
                    return Err(SolverError::IllSorted(format!("expected a formula, got {t}")))
                }
            },
            Term::Apply(f, ..) => return Err(SolverError::Unsupported(format!("function {f}"))),
            Term::Lambda(_) => return Err(SolverError::Unsupported("lambda".into())),
            t => return Err(SolverError::IllSorted(format!("expected a formula, got {t}"))),
        })
    }
}
