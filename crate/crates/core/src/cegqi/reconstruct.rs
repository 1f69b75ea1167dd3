//! Rewriting solutions into terms generated by a grammar.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rewrite::{canonical_key, CanonicalKey};
use crate::solver::{are_equivalent, SolverError};
use crate::term::{
    evaluate, substitute, term_size, Assignment, Grammar, Lambda, Solution, Sort, SynthProblem,
    Symbol, Term, Value, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("no generable equivalent found within the size budget")]
    BudgetExhausted,
    #[error("reconstruction timed out")]
    Timeout,
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    /// Largest grammar term considered when searching for a replacement.
    pub max_size: usize,
    pub deadline: Option<Instant>,
    /// Cap on equivalence checks per replacement search.
    pub max_equiv_checks: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            max_size: 5,
            deadline: None,
            max_equiv_checks: 64,
        }
    }
}

/// Grammar terms per nonterminal by size, one per canonical key.
struct Bank<'g> {
    g: &'g Grammar,
    by_size: Vec<HashMap<Symbol, Vec<Term>>>,
    keys: HashMap<Symbol, HashSet<CanonicalKey>>,
}

/// Term count beyond which the bank stops growing.
const BANK_LIMIT: usize = 200_000;

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

impl<'g> Bank<'g> {
    fn new(g: &'g Grammar) -> Bank<'g> {
        Bank {
            g,
            by_size: Vec::new(),
            keys: HashMap::new(),
        }
    }

    fn total(&self) -> usize {
        self.by_size.iter().flat_map(|m| m.values()).map(Vec::len).sum()
    }

    fn terms(&self, nt: &str, size: usize) -> &[Term] {
        self.by_size
            .get(size)
            .and_then(|m| m.get(nt))
            .map_or(&[], Vec::as_slice)
    }

    /// Fill in the next size. Returns false once the bank is too large.
    fn grow(&mut self) -> bool {
        let size = self.by_size.len();
        self.by_size.push(HashMap::new());
        // repeat to pick up unit rules between nonterminals
        loop {
            let mut added = false;
            for nt in &self.g.nonterminals {
                for rule in self.g.rules_for(&nt.name) {
                    let slots = self.g.nonterminals_in(&rule.rhs);
                    let skeleton = term_size(&rule.rhs);
                    if skeleton > size {
                        continue;
                    }
                    for sizes in compositions(size - skeleton, slots.len()) {
                        let pools: Vec<Vec<Term>> = slots
                            .iter()
                            .zip(&sizes)
                            .map(|(n, s)| self.terms(n, *s).to_vec())
                            .collect();
                        if pools.iter().any(Vec::is_empty) && !slots.is_empty() {
                            continue;
                        }
                        let mut idx = vec![0; slots.len()];
                        loop {
                            let picks: Vec<Term> =
                                idx.iter().zip(&pools).map(|(i, p)| p[*i].clone()).collect();
                            let t = fill(self.g, &rule.rhs, &mut picks.into_iter());
                            if let Ok(k) = canonical_key(&t) {
                                if self.keys.entry(nt.name.clone()).or_default().insert(k) {
                                    self.by_size[size].entry(nt.name.clone()).or_default().push(t);
                                    added = true;
                                }
                            }
                            if !advance(&mut idx, &pools) {
                                break;
                            }
                        }
                    }
                }
            }
            if !added {
                break;
            }
        }
        self.total() <= BANK_LIMIT
    }
}

fn advance(idx: &mut [usize], pools: &[Vec<Term>]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < pools[i].len() {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Replace nonterminal occurrences in `rhs`, left to right.
fn fill(g: &Grammar, rhs: &Term, picks: &mut impl Iterator<Item = Term>) -> Term {
    match rhs {
        Term::Var(v) if g.is_nonterminal(v) => picks.next().expect("one pick per slot"),
        Term::App(op, args) => Term::App(*op, args.iter().map(|a| fill(g, a, picks)).collect()),
        t => t.clone(),
    }
}

/// Pairs (nonterminal, subterm) if `t` has the shape of `rhs`.
fn split(g: &Grammar, rhs: &Term, t: &Term, out: &mut Vec<(Symbol, Term)>) -> bool {
    match rhs {
        Term::Var(v) if g.is_nonterminal(v) => {
            if t.sort_of().is_ok_and(|s| s == v.sort) {
                out.push((v.name.clone(), t.clone()));
                true
            } else {
                false
            }
        }
        Term::App(op, args) => match t {
            Term::App(op2, args2) if op == op2 && args.len() == args2.len() => {
                args.iter().zip(args2).all(|(r, s)| split(g, r, s, out))
            }
            _ => false,
        },
        _ => rhs == t,
    }
}

struct Recon<'g> {
    g: &'g Grammar,
    bank: Bank<'g>,
    opts: &'g ReconstructOptions,
    samples: Vec<Assignment>,
    memo: HashMap<(Symbol, Term), Option<Term>>,
}

impl<'g> Recon<'g> {
    fn check_time(&self) -> Result<(), ReconstructError> {
        match self.opts.deadline {
            Some(d) if Instant::now() >= d => Err(ReconstructError::Timeout),
            _ => Ok(()),
        }
    }

    fn rec(&mut self, t: &Term, nt: &Symbol) -> Result<Option<Term>, ReconstructError> {
        if self.g.generates(nt, t) {
            return Ok(Some(t.clone()));
        }
        let memo_key = (nt.clone(), t.clone());
        if let Some(r) = self.memo.get(&memo_key) {
            return Ok(r.clone());
        }
        self.check_time()?;
        let mut found = None;
        let rules: Vec<Term> = self.g.rules_for(nt).map(|r| r.rhs.clone()).collect();
        'rules: for rhs in rules {
            let mut parts = Vec::new();
            if !split(self.g, &rhs, t, &mut parts) {
                continue;
            }
            let mut picks = Vec::with_capacity(parts.len());
            for (n, sub) in &parts {
                match self.rec(sub, n)? {
                    Some(r) => picks.push(r),
                    None => continue 'rules,
                }
            }
            found = Some(fill(self.g, &rhs, &mut picks.into_iter()));
            break;
        }
        if found.is_none() {
            found = self.search(t, nt)?;
        }
        self.memo.insert(memo_key, found.clone());
        Ok(found)
    }

    fn signature(&self, t: &Term) -> Option<Vec<Value>> {
        self.samples.iter().map(|a| evaluate(t, a).ok()).collect()
    }

    /// Smallest bank term for `nt` with the same normal form as `t`, or failing
    /// that one that agrees on the samples and is proved equivalent.
    fn search(&mut self, t: &Term, nt: &Symbol) -> Result<Option<Term>, ReconstructError> {
        let Ok(key) = canonical_key(t) else {
            return Ok(None);
        };
        let sig = self.signature(t);
        let mut checks = 0;
        for size in 0..=self.opts.max_size {
            self.check_time()?;
            while self.bank.by_size.len() <= size {
                if !self.bank.grow() {
                    return Ok(None);
                }
            }
            let cands = self.bank.terms(nt, size).to_vec();
            if let Some(c) = cands.iter().find(|c| canonical_key(c).is_ok_and(|k| k == key)) {
                return Ok(Some(c.clone()));
            }
            for c in &cands {
                if checks >= self.opts.max_equiv_checks {
                    break;
                }
                if sig.is_some() && self.signature(c) == sig {
                    checks += 1;
                    if are_equivalent(t, c)? {
                        return Ok(Some(c.clone()));
                    }
                }
            }
        }
        Ok(None)
    }
}

fn samples(params: &[Var]) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..24)
        .map(|_| {
            params
                .iter()
                .map(|p| {
                    let v = match p.sort {
                        Sort::Int => Value::Int(rng.gen_range(-20i64..=20).into()),
                        Sort::Bool => Value::Bool(rng.gen()),
                    };
                    (p.clone(), v)
                })
                .collect()
        })
        .collect()
}

/// A term generated from `nt` in `g` and equivalent to `t`, whose free
/// variables must be among the grammar parameters.
pub fn reconstruct_term(
    t: &Term,
    g: &Grammar,
    nt: &str,
    opts: &ReconstructOptions,
) -> Result<Term, ReconstructError> {
    let mut r = Recon {
        g,
        bank: Bank::new(g),
        opts,
        samples: samples(&g.params),
        memo: HashMap::new(),
    };
    let nt: Symbol = nt.into();
    r.rec(t, &nt)?.ok_or(ReconstructError::BudgetExhausted)
}

/// Rewrite each body of `s` that its function's grammar does not generate.
/// Functions without a grammar are kept as they are.
pub fn reconstruct(
    s: &Solution,
    p: &SynthProblem,
    opts: &ReconstructOptions,
) -> Result<Solution, ReconstructError> {
    let mut out = Solution::new();
    for (name, lam) in s.iter() {
        let grammar = p.function(name).and_then(|f| f.grammar.as_ref());
        let Some(g) = grammar else {
            out.insert(name.clone(), lam.clone());
            continue;
        };
        // bodies are over the function's own parameters; the grammar may name them differently
        let rename: HashMap<Symbol, Term> = lam
            .params
            .iter()
            .zip(&g.params)
            .map(|(a, b)| (a.name.clone(), Term::Var(b.clone())))
            .collect();
        let body = substitute(&lam.body, &rename).map_err(|_| ReconstructError::BudgetExhausted)?;
        let body = reconstruct_term(&body, g, &g.start, opts)?;
        out.insert(
            name.clone(),
            Lambda {
                params: g.params.clone(),
                body,
            },
        );
    }
    Ok(out)
}
