//! Boolean search over a negation-normal-form formula with theory checks.

use num_bigint::BigInt;

use super::lia::{feasible, LinExpr};
use super::{Budget, SolverError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Atom {
    /// `expr ≤ 0`; the leading coefficient is positive.
    Le(LinExpr),
    Bool(usize),
}

#[derive(Clone, Debug)]
pub(crate) enum Formula {
    Const(bool),
    Lit(usize, bool),
    And(Vec<Formula>, bool),
    Or(Vec<Formula>, bool),
}

impl Formula {
    /// Whether this node mentions a preferred variable.
    fn preferred(&self, atoms_pref: &[bool]) -> bool {
        match self {
            Formula::Const(_) => false,
            Formula::Lit(a, _) => atoms_pref[*a],
            Formula::And(_, p) | Formula::Or(_, p) => *p,
        }
    }
}

pub(crate) struct Search<'a> {
    root: &'a Formula,
    atoms: &'a [Atom],
    atom_pref: Vec<bool>,
    nvars: usize,
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
    budget: &'a mut Budget,
}

pub(crate) struct Model {
    pub ints: Vec<BigInt>,
    pub atoms: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    pub fn new(
        root: &'a Formula,
        atoms: &'a [Atom],
        atom_pref: Vec<bool>,
        nvars: usize,
        budget: &'a mut Budget,
    ) -> Search<'a> {
        Search {
            root,
            atoms,
            atom_pref,
            nvars,
            assign: vec![None; atoms.len()],
            trail: Vec::new(),
            budget,
        }
    }

    pub fn run(mut self) -> Result<Option<Model>, SolverError> {
        match self.solve()? {
            Some(ints) => Ok(Some(Model {
                ints,
                atoms: self.assign,
            })),
            None => Ok(None),
        }
    }

    fn eval(&self, f: &Formula) -> Option<bool> {
        match f {
            Formula::Const(b) => Some(*b),
            Formula::Lit(a, pol) => self.assign[*a].map(|v| v == *pol),
            Formula::And(cs, _) => {
                let mut all = true;
                for c in cs {
                    match self.eval(c) {
                        Some(false) => return Some(false),
                        Some(true) => {}
                        None => all = false,
                    }
                }
                all.then_some(true)
            }
            Formula::Or(cs, _) => {
                let mut all = true;
                for c in cs {
                    match self.eval(c) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => all = false,
                    }
                }
                all.then_some(false)
            }
        }
    }

    /// Literals implied by the root being true.
    fn forced(&self, f: &Formula, out: &mut Vec<(usize, bool)>) {
        if self.eval(f).is_some() {
            return;
        }
        match f {
            Formula::Const(_) => {}
            Formula::Lit(a, pol) => out.push((*a, *pol)),
            Formula::And(cs, _) => {
                for c in cs {
                    self.forced(c, out);
                }
            }
            Formula::Or(cs, _) => {
                let mut open = cs.iter().filter(|c| self.eval(c) != Some(false));
                if let (Some(only), None) = (open.next(), open.next()) {
                    self.forced(only, out);
                }
            }
        }
    }

    /// Follow undetermined subformulas to a literal that would help satisfy
    /// them. Conjunctions are scanned from the right; disjunctions prefer
    /// children mentioning a preferred variable, then the rightmost.
    fn pick(&self, f: &Formula) -> Option<(usize, bool)> {
        match f {
            Formula::Const(_) => None,
            Formula::Lit(a, pol) => Some((*a, *pol)),
            Formula::And(cs, _) => cs
                .iter()
                .rev()
                .find(|c| self.eval(c).is_none())
                .and_then(|c| self.pick(c)),
            Formula::Or(cs, _) => {
                let open: Vec<&Formula> = cs.iter().filter(|c| self.eval(c).is_none()).collect();
                let choice = open
                    .iter()
                    .rev()
                    .find(|c| c.preferred(&self.atom_pref))
                    .or_else(|| open.last())?;
                self.pick(choice)
            }
        }
    }

    fn set(&mut self, a: usize, v: bool) {
        self.assign[a] = Some(v);
        self.trail.push(a);
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().expect("trail");
            self.assign[a] = None;
        }
    }

    fn theory(&mut self) -> Result<Option<Vec<BigInt>>, SolverError> {
        let mut cons = Vec::new();
        for (a, v) in self.assign.iter().enumerate() {
            if let (Atom::Le(e), Some(v)) = (&self.atoms[a], v) {
                if *v {
                    cons.push(e.clone());
                } else {
                    // ¬(e ≤ 0)  ⇔  1 - e ≤ 0
                    let mut n = e.negated();
                    n.constant += 1;
                    cons.push(n);
                }
            }
        }
        feasible(&cons, self.nvars, self.budget)
    }

    fn solve(&mut self) -> Result<Option<Vec<BigInt>>, SolverError> {
        self.budget.spend(1)?;
        let mark = self.trail.len();
        loop {
            if self.eval(self.root) == Some(false) {
                self.undo(mark);
                return Ok(None);
            }
            let mut forced = Vec::new();
            self.forced(self.root, &mut forced);
            if forced.is_empty() {
                break;
            }
            for (a, v) in forced {
                if self.assign[a].is_none() {
                    self.set(a, v);
                }
            }
        }
        let Some(model) = self.theory()? else {
            self.undo(mark);
            return Ok(None);
        };
        if self.eval(self.root) == Some(true) {
            return Ok(Some(model));
        }
        let (a, pol) = self.pick(self.root).expect("undetermined formula has a literal");
        for v in [pol, !pol] {
            let inner = self.trail.len();
            self.set(a, v);
            if let Some(m) = self.solve()? {
                return Ok(Some(m));
            }
            self.undo(inner);
        }
        self.undo(mark);
        Ok(None)
    }
}
