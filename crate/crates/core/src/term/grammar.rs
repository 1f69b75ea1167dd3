use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Sort, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Nonterminal {
    pub name: Symbol,
    pub sort: Sort,
}

/// A production. Nonterminals occur in `rhs` as variables named after them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Symbol,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grammar {
    pub start: Symbol,
    pub nonterminals: Vec<Nonterminal>,
    pub rules: Vec<Rule>,
    /// Parameters of the function being synthesized; the only variables
    /// besides nonterminals allowed in rules.
    pub params: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("start symbol {0} is not a nonterminal")]
    UnknownStart(String),
    #[error("duplicate nonterminal {0}")]
    Duplicate(String),
    #[error("rule for unknown nonterminal {0}")]
    UnknownNonterminal(String),
    #[error("unknown symbol {symbol} in rule for {lhs}")]
    UnknownSymbol { lhs: String, symbol: String },
    #[error("ill-sorted rule for {lhs}: {msg}")]
    SortMismatch { lhs: String, msg: String },
    #[error("nonterminal {0} derives no finite term")]
    Unproductive(String),
    #[error("nonterminal {0} is unreachable from the start symbol")]
    Unreachable(String),
    #[error("cycle of unit rules through {0}")]
    ChainCycle(String),
    #[error("rule for {0} mentions a function application or lambda")]
    Unsupported(String),
}

impl Grammar {
    pub fn nonterminal(&self, name: &str) -> Option<&Nonterminal> {
        self.nonterminals.iter().find(|n| &*n.name == name)
    }

    pub fn is_nonterminal(&self, v: &Var) -> bool {
        self.nonterminal(&v.name).is_some_and(|n| n.sort == v.sort)
    }

    pub fn rules_for<'a>(&'a self, nt: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| &*r.lhs == nt)
    }

    pub fn start_sort(&self) -> Option<Sort> {
        self.nonterminal(&self.start).map(|n| n.sort)
    }

    /// Nonterminals occurring in `t`, in left-to-right order.
    pub fn nonterminals_in(&self, t: &Term) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_nts(t, &mut out);
        out
    }

    fn collect_nts(&self, t: &Term, out: &mut Vec<Symbol>) {
        match t {
            Term::Var(v) if self.is_nonterminal(v) => out.push(v.name.clone()),
            Term::App(_, args) | Term::Apply(_, args, _) => {
                for a in args {
                    self.collect_nts(a, out);
                }
            }
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        let mut seen = BTreeSet::new();
        for n in &self.nonterminals {
            if !seen.insert(n.name.clone()) || self.params.iter().any(|p| p.name == n.name) {
                return Err(GrammarError::Duplicate(n.name.to_string()));
            }
        }
        if self.nonterminal(&self.start).is_none() {
            return Err(GrammarError::UnknownStart(self.start.to_string()));
        }
        for r in &self.rules {
            let lhs = self
                .nonterminal(&r.lhs)
                .ok_or_else(|| GrammarError::UnknownNonterminal(r.lhs.to_string()))?;
            if r.rhs.contains_apply() || matches!(r.rhs, Term::Lambda(_)) {
                return Err(GrammarError::Unsupported(r.lhs.to_string()));
            }
            for v in r.rhs.free_vars() {
                if !self.is_nonterminal(&v) && !self.params.contains(&v) {
                    return Err(GrammarError::UnknownSymbol {
                        lhs: r.lhs.to_string(),
                        symbol: v.name.to_string(),
                    });
                }
            }
            match r.rhs.sort_of() {
                Ok(s) if s == lhs.sort => {}
                Ok(s) => {
                    return Err(GrammarError::SortMismatch {
                        lhs: r.lhs.to_string(),
                        msg: format!("expected {}, rule has sort {s}", lhs.sort),
                    })
                }
                Err(e) => {
                    return Err(GrammarError::SortMismatch {
                        lhs: r.lhs.to_string(),
                        msg: e.to_string(),
                    })
                }
            }
        }
        self.check_productive()?;
        self.check_reachable()?;
        self.check_chains()
    }

    fn check_productive(&self) -> Result<(), GrammarError> {
        let mut productive: BTreeSet<Symbol> = BTreeSet::new();
        loop {
            let before = productive.len();
            for r in &self.rules {
                if self
                    .nonterminals_in(&r.rhs)
                    .iter()
                    .all(|n| productive.contains(n))
                {
                    productive.insert(r.lhs.clone());
                }
            }
            if productive.len() == before {
                break;
            }
        }
        match self
            .nonterminals
            .iter()
            .find(|n| !productive.contains(&n.name))
        {
            Some(n) => Err(GrammarError::Unproductive(n.name.to_string())),
            None => Ok(()),
        }
    }

    fn check_reachable(&self) -> Result<(), GrammarError> {
        let mut reached: BTreeSet<Symbol> = BTreeSet::from([self.start.clone()]);
        let mut stack = vec![self.start.clone()];
        while let Some(n) = stack.pop() {
            for r in self.rules_for(&n) {
                for m in self.nonterminals_in(&r.rhs) {
                    if reached.insert(m.clone()) {
                        stack.push(m);
                    }
                }
            }
        }
        match self.nonterminals.iter().find(|n| !reached.contains(&n.name)) {
            Some(n) => Err(GrammarError::Unreachable(n.name.to_string())),
            None => Ok(()),
        }
    }

    fn check_chains(&self) -> Result<(), GrammarError> {
        let mut edges: HashMap<Symbol, Vec<Symbol>> = HashMap::new();
        for r in &self.rules {
            if let Term::Var(v) = &r.rhs {
                if self.is_nonterminal(v) {
                    edges.entry(r.lhs.clone()).or_default().push(v.name.clone());
                }
            }
        }
        for n in &self.nonterminals {
            let mut stack = edges.get(&n.name).cloned().unwrap_or_default();
            let mut seen = BTreeSet::new();
            while let Some(m) = stack.pop() {
                if m == n.name {
                    return Err(GrammarError::ChainCycle(n.name.to_string()));
                }
                if seen.insert(m.clone()) {
                    stack.extend(edges.get(&m).cloned().unwrap_or_default());
                }
            }
        }
        Ok(())
    }

    /// Whether `t` is derivable from nonterminal `nt`.
    pub fn generates(&self, nt: &str, t: &Term) -> bool {
        self.rules_for(nt).any(|r| self.matches(&r.rhs, t))
    }

    pub fn generates_start(&self, t: &Term) -> bool {
        self.generates(&self.start, t)
    }

    fn matches(&self, rhs: &Term, t: &Term) -> bool {
        match rhs {
            Term::Var(v) if self.is_nonterminal(v) => {
                t.sort_of().is_ok_and(|s| s == v.sort) && self.generates(&v.name, t)
            }
            Term::App(op, args) => match t {
                Term::App(op2, args2) if op == op2 && args.len() == args2.len() => args
                    .iter()
                    .zip(args2)
                    .all(|(r, s)| self.matches(r, s)),
                _ => false,
            },
            _ => rhs == t,
        }
    }
}
