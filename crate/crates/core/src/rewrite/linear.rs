use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::term::{Op, Term};

/// `constant + Σ coeff·atom` over normalized non-arithmetic integer atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct LinSum {
    pub constant: BigInt,
    pub terms: BTreeMap<Term, BigInt>,
}

impl LinSum {
    pub fn constant(c: BigInt) -> LinSum {
        LinSum {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn atom(t: Term) -> LinSum {
        let mut s = LinSum::default();
        s.terms.insert(t, BigInt::one());
        s
    }

    /// Decompose a term already in normal form.
    pub fn of_normal(t: &Term) -> LinSum {
        match t {
            Term::Int(c) => LinSum::constant(c.clone()),
            Term::App(Op::Add, args) => {
                let mut s = LinSum::default();
                for a in args {
                    s.add_assign(&LinSum::of_normal(a));
                }
                s
            }
            Term::App(Op::Mul, args) => {
                let mut s = LinSum::of_normal(&args[1]);
                s.scale(args[0].as_int().expect("scaling by a literal"));
                s
            }
            t => LinSum::atom(t.clone()),
        }
    }

    pub fn add_assign(&mut self, o: &LinSum) {
        self.constant += &o.constant;
        for (t, c) in &o.terms {
            let e = self.terms.entry(t.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                self.terms.remove(t);
            }
        }
    }

    pub fn sub_assign(&mut self, o: &LinSum) {
        let mut n = o.clone();
        n.scale(&BigInt::from(-1));
        self.add_assign(&n);
    }

    pub fn scale(&mut self, k: &BigInt) {
        if k.is_zero() {
            *self = LinSum::default();
            return;
        }
        self.constant *= k;
        for c in self.terms.values_mut() {
            *c *= k;
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_gcd(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Render in normal form: constant first, then atoms in order.
    pub fn to_term(&self) -> Term {
        let mut parts = Vec::with_capacity(self.terms.len() + 1);
        if !self.constant.is_zero() {
            parts.push(Term::Int(self.constant.clone()));
        }
        for (t, c) in &self.terms {
            if c.is_one() {
                parts.push(t.clone());
            } else {
                parts.push(Term::App(Op::Mul, vec![Term::Int(c.clone()), t.clone()]));
            }
        }
        match parts.len() {
            0 => Term::Int(BigInt::zero()),
            1 => parts.pop().expect("one part"),
            _ => Term::App(Op::Add, parts),
        }
    }

    /// Split into (positive part, negated negative part), with the constant
    /// placed on whichever side keeps it positive.
    fn sides(&self) -> (LinSum, LinSum) {
        let mut left = LinSum::default();
        let mut right = LinSum::default();
        for (t, c) in &self.terms {
            if c.is_positive() {
                left.terms.insert(t.clone(), c.clone());
            } else {
                right.terms.insert(t.clone(), -c);
            }
        }
        if self.constant.is_positive() {
            left.constant = self.constant.clone();
        } else {
            right.constant = -&self.constant;
        }
        (left, right)
    }
}

/// Normal form of `p ≤ 0`.
pub(crate) fn mk_le(p: &LinSum) -> Term {
    if p.is_constant() {
        return Term::Bool(!p.constant.is_positive());
    }
    let g = p.coeff_gcd();
    let mut q = LinSum::default();
    for (t, c) in &p.terms {
        q.terms.insert(t.clone(), c / &g);
    }
    q.constant = p.constant.div_ceil(&g);
    let (l, r) = q.sides();
    Term::App(Op::Le, vec![l.to_term(), r.to_term()])
}

/// Normal form of `p = 0`.
pub(crate) fn mk_eq(p: &LinSum) -> Term {
    if p.is_constant() {
        return Term::Bool(p.constant.is_zero());
    }
    let g = p.coeff_gcd();
    if !p.constant.is_multiple_of(&g) {
        return Term::Bool(false);
    }
    let mut q = LinSum::default();
    let flip = p.terms.values().next().is_some_and(|c| c.is_negative());
    let g = if flip { -g } else { g };
    for (t, c) in &p.terms {
        q.terms.insert(t.clone(), c / &g);
    }
    q.constant = &p.constant / &g;
    let (l, r) = q.sides();
    Term::App(Op::Eq, vec![l.to_term(), r.to_term()])
}

/// For a normalized integer atom `l ≤ r` or `l = r`, the polynomial `l - r`.
pub(crate) fn atom_poly(t: &Term) -> Option<(Op, LinSum)> {
    match t {
        Term::App(op @ (Op::Le | Op::Eq), args)
            if args.len() == 2 && is_int(&args[0]) =>
        {
            let mut p = LinSum::of_normal(&args[0]);
            p.sub_assign(&LinSum::of_normal(&args[1]));
            Some((*op, p))
        }
        _ => None,
    }
}

/// Cheap sort test for well-sorted terms.
pub(crate) fn is_int(t: &Term) -> bool {
    match t {
        Term::Int(_) => true,
        Term::Bool(_) | Term::Lambda(_) => false,
        Term::Var(v) => v.sort == crate::term::Sort::Int,
        Term::Apply(_, _, s) => *s == crate::term::Sort::Int,
        Term::App(Op::Add | Op::Mul, _) => true,
        Term::App(Op::Ite, args) => is_int(&args[1]),
        Term::App(..) => false,
    }
}
