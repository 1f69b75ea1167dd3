//! Size-ordered candidate generation with pruning, and the refutation loop.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use super::datatype::{DatatypeFamily, DtValue};
use super::pattern::{
    generalize_pattern, make_blocking_pattern, seed_patterns, BlockingPattern, Justification, PatternStore, Witness,
};
use crate::rewrite::{canonical_key, CanonicalKey};
use crate::solver::{check_sat_with, SatResult, SolverError, SolverOptions, DEFAULT_LIMIT};
use crate::term::{apply_solution, evaluate, Assignment, Lambda, Solution, SynthProblem, Term, Value};

#[derive(Clone, Debug)]
pub struct EnumOptions {
    /// Largest candidate size, counted in non-nullary constructors.
    pub max_size: usize,
    pub rewriter_pruning: bool,
    /// Prune candidates with the same outputs on these points.
    pub signature_points: Option<Vec<Vec<Value>>>,
    /// Generalize patterns learned from pruned candidates.
    pub generalize: bool,
    /// Install the fixed startup patterns.
    pub seeds: bool,
    pub deadline: Option<Instant>,
    pub solver_limit: u64,
    /// Record a line per decision.
    pub trace: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_size: 8,
            rewriter_pruning: true,
            signature_points: None,
            generalize: true,
            seeds: true,
            deadline: None,
            solver_limit: DEFAULT_LIMIT,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Start values examined: retained, pruned, or refuted.
    pub enumerated: usize,
    /// Values in the candidate database that were not refuted.
    pub retained: usize,
    pub pruned_rewriter: usize,
    pub pruned_signature: usize,
    /// Retained values later refuted by a counterexample.
    pub blocked_exact: usize,
    /// Values skipped because a pattern blocked them, at any datatype.
    pub blocked_by_pattern: usize,
    pub patterns: usize,
    pub cex_points: usize,
    /// Size being enumerated when the search stopped.
    pub size: usize,
}

/// What happened to one start value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Retained,
    PrunedRewriter,
    PrunedSignature,
    Refuted,
    Solution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub value: String,
    pub decision: Decision,
}

#[derive(Clone, Debug)]
pub struct DbEntry {
    pub value: Arc<DtValue>,
    pub analog: Term,
    pub signature: Option<Vec<Value>>,
}

/// Retained candidates by canonical key, with a secondary index by signature.
#[derive(Default)]
pub struct CandidateDb {
    entries: HashMap<CanonicalKey, DbEntry>,
    by_signature: HashMap<Vec<Value>, CanonicalKey>,
}

impl CandidateDb {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<&DbEntry> {
        self.entries.get(key)
    }

    pub fn by_signature(&self, sig: &[Value]) -> Option<&DbEntry> {
        self.by_signature.get(sig).and_then(|k| self.entries.get(k))
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.entries.keys()
    }

    fn insert(&mut self, key: CanonicalKey, entry: DbEntry) {
        if let Some(sig) = &entry.signature {
            self.by_signature.insert(sig.clone(), key.clone());
        }
        self.entries.insert(key, entry);
    }
}

pub fn signature_of(family: &DatatypeFamily, v: &DtValue, points: &[Vec<Value>]) -> Result<Vec<Value>, super::DtError> {
    points.iter().map(|p| family.eval_dt(v, p)).collect()
}

/// A start value that passed pruning.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub value: Arc<DtValue>,
    pub key: Option<CanonicalKey>,
    pub analog: Term,
}

/// A value dropped by pruning, kept for audits.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub value: Arc<DtValue>,
    pub justification: Justification,
    pub key: Option<CanonicalKey>,
    pub pattern: BlockingPattern,
}

/// Deterministic generator of start values in size order.
pub struct Enumerator<'f> {
    family: &'f DatatypeFamily,
    opts: EnumOptions,
    /// `pools[dt][size]`: admitted values.
    pools: Vec<Vec<Vec<Arc<DtValue>>>>,
    keys: Vec<HashSet<CanonicalKey>>,
    /// Shiftable patterns, applied when a value enters any pool.
    shiftable: PatternStore,
    /// Patterns checked only on start values.
    root_only: PatternStore,
    pub db: CandidateDb,
    pub stats: EnumStats,
    pub trace: Vec<TraceEntry>,
    /// Pruned start values, recorded when auditing.
    pub pruned: Vec<Pruned>,
    pub record_pruned: bool,
    pending: Vec<Arc<DtValue>>,
    next_pending: usize,
    /// Size of the next layer to build.
    layer: usize,
}

/// All ways of writing `total` as an ordered sum of `parts` naturals, in
/// lexicographic order.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
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

impl<'f> Enumerator<'f> {
    pub fn new(family: &'f DatatypeFamily, opts: EnumOptions) -> Enumerator<'f> {
        let n = family.datatypes.len();
        let mut shiftable = PatternStore::default();
        if opts.seeds && opts.rewriter_pruning {
            for p in seed_patterns(family) {
                shiftable.insert(p);
            }
        }
        Enumerator {
            family,
            opts,
            pools: vec![Vec::new(); n],
            keys: vec![HashSet::new(); n],
            shiftable,
            root_only: PatternStore::default(),
            db: CandidateDb::default(),
            stats: EnumStats::default(),
            trace: Vec::new(),
            pruned: Vec::new(),
            record_pruned: false,
            pending: Vec::new(),
            next_pending: 0,
            layer: 0,
        }
    }

    pub fn patterns(&self) -> impl Iterator<Item = &BlockingPattern> {
        self.shiftable.iter().chain(self.root_only.iter())
    }

    fn pool(&self, dt: usize, size: usize) -> &[Arc<DtValue>] {
        self.pools[dt].get(size).map_or(&[], Vec::as_slice)
    }

    /// Raw values of `dt` at `size` built from the admitted pools, in
    /// constructor order, then child-size order, then child order.
    fn raw_layer(&self, dt: usize, size: usize) -> Vec<Arc<DtValue>> {
        let mut out = Vec::new();
        for (ci, c) in self.family.datatypes[dt].ctors.iter().enumerate() {
            if c.args.is_empty() {
                if size == 0 {
                    out.push(Arc::new(DtValue::leaf(dt, ci)));
                }
                continue;
            }
            if size == 0 {
                continue;
            }
            for sizes in compositions(size - 1, c.args.len()) {
                let pools: Vec<&[Arc<DtValue>]> =
                    c.args.iter().zip(&sizes).map(|(&a, &s)| self.pool(a, s)).collect();
                if pools.iter().any(|p| p.is_empty()) {
                    continue;
                }
                let mut idx = vec![0; pools.len()];
                loop {
                    let children = idx.iter().zip(&pools).map(|(&i, p)| p[i].clone()).collect();
                    out.push(Arc::new(DtValue::new(dt, ci, children)));
                    if !advance(&mut idx, &pools) {
                        break;
                    }
                }
            }
        }
        out
    }

    fn timed_out(&self) -> bool {
        self.opts.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn key_of(&self, v: &DtValue) -> (Term, Option<CanonicalKey>) {
        let analog = self.family.to_analog(v);
        let key = canonical_key(&analog).ok();
        (analog, key)
    }

    /// Admission shared by every datatype: shiftable patterns, then the
    /// per-datatype key set. Returns the analog and key of admitted values.
    fn admit(&mut self, v: &Arc<DtValue>) -> Option<(Term, Option<CanonicalKey>)> {
        if self.shiftable.blocking(v).is_some() {
            self.stats.blocked_by_pattern += 1;
            return None;
        }
        let (analog, key) = self.key_of(v);
        if self.opts.rewriter_pruning {
            if let Some(k) = &key {
                if self.keys[v.dt].contains(k) {
                    self.on_rewriter_dup(v, k.clone());
                    return None;
                }
                self.keys[v.dt].insert(k.clone());
            }
        }
        Some((analog, key))
    }

    fn on_rewriter_dup(&mut self, v: &Arc<DtValue>, k: CanonicalKey) {
        let pattern = if self.opts.generalize {
            generalize_pattern(self.family, v, Witness::Rewriter(&k))
        } else {
            make_blocking_pattern(v, Justification::Rewriter)
        };
        if v.dt == self.family.start {
            self.stats.enumerated += 1;
            self.stats.pruned_rewriter += 1;
            self.note(v, Decision::PrunedRewriter);
            if self.record_pruned {
                self.pruned.push(Pruned {
                    value: v.clone(),
                    justification: Justification::Rewriter,
                    key: Some(k),
                    pattern: pattern.clone(),
                });
            }
        }
        // an exact pattern only matches v, which never recurs
        if pattern.constraints.len() < node_count(v) && self.shiftable.insert(pattern) {
            self.stats.patterns += 1;
        }
    }

    fn note(&mut self, v: &DtValue, decision: Decision) {
        if self.opts.trace {
            self.trace.push(TraceEntry {
                value: self.family.show(v),
                decision,
            });
        }
    }

    /// Build the pools of every non-start datatype at the current layer and
    /// queue the raw start values.
    fn open_layer(&mut self) {
        let size = self.layer;
        for dt in 0..self.family.datatypes.len() {
            self.pools[dt].push(Vec::new());
        }
        for dt in 0..self.family.datatypes.len() {
            if dt == self.family.start {
                continue;
            }
            for v in self.raw_layer(dt, size) {
                if self.admit(&v).is_some() {
                    self.pools[dt][size].push(v);
                }
            }
        }
        self.pending = self.raw_layer(self.family.start, size);
        self.next_pending = 0;
        self.stats.size = size;
        self.layer += 1;
    }

    /// Whether a deadline stopped the last call to `next_candidate`.
    pub fn timed_out_now(&self) -> bool {
        self.timed_out()
    }

    /// The next start value that survives pruning, or `None` once the size
    /// cap is exhausted or the deadline passes.
    pub fn next_candidate(&mut self) -> Option<Candidate> {
        loop {
            if self.next_pending >= self.pending.len() {
                if self.layer > self.opts.max_size || self.timed_out() {
                    return None;
                }
                self.open_layer();
                continue;
            }
            if self.next_pending % 256 == 0 && self.timed_out() {
                return None;
            }
            let v = self.pending[self.next_pending].clone();
            self.next_pending += 1;
            if self.root_only.blocking(&v).is_some() {
                self.stats.blocked_by_pattern += 1;
                continue;
            }
            let Some((analog, key)) = self.admit(&v) else {
                continue;
            };
            let size = self.layer - 1;
            self.pools[v.dt][size].push(v.clone());
            self.stats.enumerated += 1;
            let signature = match &self.opts.signature_points {
                Some(points) => {
                    let sig: Vec<Value> = points.iter().map(|p| self.family.eval_unchecked(&v, p)).collect();
                    if self.db.by_signature(&sig).is_some() {
                        self.on_signature_dup(&v, &sig, key.clone());
                        continue;
                    }
                    Some(sig)
                }
                None => None,
            };
            self.stats.retained += 1;
            self.note(&v, Decision::Retained);
            if let Some(k) = &key {
                self.db.insert(
                    k.clone(),
                    DbEntry {
                        value: v.clone(),
                        analog: analog.clone(),
                        signature,
                    },
                );
            }
            return Some(Candidate { value: v, key, analog });
        }
    }

    fn on_signature_dup(&mut self, v: &Arc<DtValue>, sig: &[Value], key: Option<CanonicalKey>) {
        self.stats.pruned_signature += 1;
        self.note(v, Decision::PrunedSignature);
        let points = self.opts.signature_points.as_deref().unwrap_or(&[]);
        let pattern = if self.opts.generalize {
            generalize_pattern(self.family, v, Witness::Signature { points, vector: sig })
        } else {
            make_blocking_pattern(v, Justification::Signature)
        };
        if self.record_pruned {
            self.pruned.push(Pruned {
                value: v.clone(),
                justification: Justification::Signature,
                key,
                pattern: pattern.clone(),
            });
        }
        if pattern.constraints.len() < node_count(v) && self.root_only.insert(pattern) {
            self.stats.patterns += 1;
        }
    }

    /// Record that the verifier refuted a retained candidate.
    pub fn refute(&mut self, c: &Candidate) {
        self.stats.retained -= 1;
        self.stats.blocked_exact += 1;
        self.note(&c.value, Decision::Refuted);
        if self.root_only.insert(make_blocking_pattern(&c.value, Justification::Refuted)) {
            self.stats.patterns += 1;
        }
    }
}

fn node_count(v: &DtValue) -> usize {
    1 + v.children.iter().map(|c| node_count(c)).sum::<usize>()
}

fn advance(idx: &mut [usize], pools: &[&[Arc<DtValue>]]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < pools[i].len() {
            return true;
        }
        idx[i] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("no solution up to size {0}")]
    Exhausted(usize),
    #[error("enumeration timed out")]
    Timeout,
    #[error("enumeration handles a single function")]
    MultipleFunctions,
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
}

#[derive(Clone, Debug)]
pub struct EnumOutcome {
    pub result: Result<Solution, EnumError>,
    pub stats: EnumStats,
    pub trace: Vec<TraceEntry>,
}

fn holds_at(constraint: &Term, point: &Assignment) -> bool {
    evaluate(constraint, point) == Ok(Value::Bool(true))
}

/// Enumerate candidates for the single function of `p` and return the first
/// one the verifier accepts.
pub fn solve_enum(p: &SynthProblem, family: &DatatypeFamily, opts: EnumOptions) -> EnumOutcome {
    let fail = |e, stats, trace| EnumOutcome {
        result: Err(e),
        stats,
        trace,
    };
    if p.functions.len() != 1 {
        return fail(EnumError::MultipleFunctions, EnumStats::default(), Vec::new());
    }
    let f = &p.functions[0];
    let max_size = opts.max_size;
    let solver_opts = SolverOptions {
        prefer: Vec::new(),
        limit: opts.solver_limit,
    };
    let mut e = Enumerator::new(family, opts);
    let mut points: Vec<Assignment> = Vec::new();
    while let Some(c) = e.next_candidate() {
        let mut s = Solution::new();
        s.insert(
            f.name.clone(),
            Lambda {
                params: family.params.clone(),
                body: c.analog.clone(),
            },
        );
        let constraint = match apply_solution(p, &s) {
            Ok(t) => t,
            Err(_) => {
                e.refute(&c);
                continue;
            }
        };
        if points.iter().any(|pt| !holds_at(&constraint, pt)) {
            e.refute(&c);
            continue;
        }
        match check_sat_with(&Term::not(constraint), &solver_opts) {
            Ok(SatResult::Unsat) => {
                e.note(&c.value, Decision::Solution);
                e.stats.cex_points = points.len();
                return EnumOutcome {
                    result: Ok(s),
                    stats: e.stats,
                    trace: e.trace,
                };
            }
            Ok(SatResult::Sat(m)) => {
                let mut pt = Assignment::new();
                for u in &p.universals {
                    let v = m.get(&u.name).cloned().unwrap_or_else(|| default_value(u.sort));
                    pt.set(u, v);
                }
                points.push(pt);
                e.refute(&c);
            }
            Err(err) => {
                e.stats.cex_points = points.len();
                return fail(err.into(), e.stats, e.trace);
            }
        }
    }
    e.stats.cex_points = points.len();
    let err = if e.timed_out_now() {
        EnumError::Timeout
    } else {
        EnumError::Exhausted(max_size)
    };
    fail(err, e.stats, e.trace)
}

fn default_value(s: crate::term::Sort) -> Value {
    match s {
        crate::term::Sort::Int => Value::Int(0.into()),
        crate::term::Sort::Bool => Value::Bool(false),
    }
}

/// Everything the generator decided up to the size cap, without verification.
pub struct Audit {
    pub retained: Vec<Candidate>,
    pub pruned: Vec<Pruned>,
    pub patterns: Vec<BlockingPattern>,
    pub stats: EnumStats,
    pub trace: Vec<TraceEntry>,
}

pub fn audit(family: &DatatypeFamily, opts: EnumOptions) -> Audit {
    let mut e = Enumerator::new(family, opts);
    e.record_pruned = true;
    let mut retained = Vec::new();
    while let Some(c) = e.next_candidate() {
        retained.push(c);
    }
    let patterns = e.patterns().cloned().collect();
    Audit {
        retained,
        pruned: e.pruned,
        patterns,
        stats: e.stats,
        trace: e.trace,
    }
}
