//! Strategy selection and the solve entry point.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::cegqi::{reconstruct, solve_cegqi, CegqiOptions, CegqiResult, ReconstructOptions};
use crate::classify::{classify, io_inputs, to_first_order, to_single_invocation, ConjectureClass};
use crate::enumerate::{default_grammar, grammar_to_datatypes, solve_enum, EnumOptions};
use crate::solver::{check_valid, SolverError, Validity, DEFAULT_LIMIT};
use crate::term::{apply_solution, Solution, SynthProblem, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Pick a strategy from the conjecture class and the grammar.
    #[default]
    Auto,
    Cegqi,
    Enum,
    /// Instantiation, then reconstruction, then enumeration.
    Portfolio,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "auto" => Ok(Mode::Auto),
            "cegqi" => Ok(Mode::Cegqi),
            "enum" => Ok(Mode::Enum),
            "portfolio" => Ok(Mode::Portfolio),
            _ => Err(format!("unknown mode {s}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Enumeration size cap.
    pub max_size: usize,
    /// Instantiation rounds.
    pub max_iters: usize,
    /// Largest grammar term tried during reconstruction.
    pub recon_budget: usize,
    /// Share of the time budget given to reconstruction.
    pub recon_fraction: f64,
    pub io_pruning: bool,
    pub rewriter_pruning: bool,
    pub timeout: Option<Duration>,
    pub verify: bool,
    pub trace: bool,
    pub solver_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Auto,
            max_size: 8,
            max_iters: 64,
            recon_budget: 5,
            recon_fraction: 0.2,
            io_pruning: true,
            rewriter_pruning: true,
            timeout: None,
            verify: true,
            trace: false,
            solver_limit: DEFAULT_LIMIT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Cegqi,
    Reconstruction,
    Enumeration,
    /// Enumeration with pruning by example outputs.
    EnumerationIo,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Cegqi => "cegqi",
            Strategy::Reconstruction => "reconstruction",
            Strategy::Enumeration => "enumeration",
            Strategy::EnumerationIo => "enumeration-io",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub enumerated: usize,
    pub retained: usize,
    pub pruned_rewriter: usize,
    pub pruned_signature: usize,
    pub blocked_exact: usize,
    pub cegqi_iterations: usize,
    pub cex_points: usize,
    pub wall_time: Duration,
}

impl Stats {
    /// `key=value` lines.
    pub fn report(&self) -> String {
        format!(
            "enumerated={}\nretained={}\npruned_rewriter={}\npruned_signature={}\nblocked_exact={}\n\
             cegqi_iterations={}\ncex_points={}\nwall_time_ms={}\n",
            self.enumerated,
            self.retained,
            self.pruned_rewriter,
            self.pruned_signature,
            self.blocked_exact,
            self.cegqi_iterations,
            self.cex_points,
            self.wall_time.as_millis()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutput {
    Success {
        solution: Solution,
        strategy: Strategy,
        stats: Stats,
        trace: Vec<String>,
    },
    GaveUp {
        reason: String,
        stats: Stats,
        trace: Vec<String>,
    },
}

impl SolveOutput {
    pub fn stats(&self) -> &Stats {
        match self {
            SolveOutput::Success { stats, .. } | SolveOutput::GaveUp { stats, .. } => stats,
        }
    }

    pub fn trace(&self) -> &[String] {
        match self {
            SolveOutput::Success { trace, .. } | SolveOutput::GaveUp { trace, .. } => trace,
        }
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutput::Success { solution, .. } => Some(solution),
            SolveOutput::GaveUp { .. } => None,
        }
    }

    pub fn strategy(&self) -> Option<Strategy> {
        match self {
            SolveOutput::Success { strategy, .. } => Some(*strategy),
            SolveOutput::GaveUp { .. } => None,
        }
    }
}

/// Whether `s` makes the constraint valid and every body is generated by its
/// function's grammar.
pub fn verify_solution(p: &SynthProblem, s: &Solution) -> Result<bool, SolverError> {
    for f in &p.functions {
        let Some(lam) = s.get(&f.name) else {
            return Ok(false);
        };
        if let Some(g) = &f.grammar {
            if !g.generates_start(&lam.body) {
                return Ok(false);
            }
        }
    }
    let Ok(c) = apply_solution(p, s) else {
        return Ok(false);
    };
    Ok(check_valid(&c)? == Validity::Valid)
}

struct Run<'c> {
    cfg: &'c SolverConfig,
    start: Instant,
    deadline: Option<Instant>,
    stats: Stats,
    trace: Vec<String>,
}

type Attempt = Result<(Solution, Strategy), String>;

impl Run<'_> {
    fn log(&mut self, line: String) {
        if self.cfg.trace {
            self.trace.push(line);
        }
    }

    fn cegqi(&mut self, p: &SynthProblem) -> Attempt {
        let fo = to_first_order(p).map_err(|e| e.to_string())?;
        let opts = CegqiOptions {
            max_iters: self.cfg.max_iters,
            solver_limit: self.cfg.solver_limit,
            deadline: self.deadline,
        };
        match solve_cegqi(&fo, &opts) {
            CegqiResult::Solved { trace, solution } => {
                self.stats.cegqi_iterations += trace.len();
                for ts in &trace.instances {
                    let ts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                    self.log(format!("cegqi instance {}", ts.join(" ")));
                }
                Ok((solution, Strategy::Cegqi))
            }
            CegqiResult::GaveUp { reason, trace } => {
                self.stats.cegqi_iterations += trace.len();
                self.log(format!("cegqi gave up: {reason}"));
                Err(reason.to_string())
            }
        }
    }

    fn enumerate(&mut self, p: &SynthProblem, points: Option<Vec<Vec<Value>>>) -> Attempt {
        let [f] = p.functions.as_slice() else {
            return Err("enumeration handles a single function".into());
        };
        let g = f
            .grammar
            .clone()
            .unwrap_or_else(|| default_grammar(&f.params, f.ret));
        let family = grammar_to_datatypes(&g).map_err(|e| e.to_string())?;
        let strategy = if points.is_some() {
            Strategy::EnumerationIo
        } else {
            Strategy::Enumeration
        };
        let opts = EnumOptions {
            max_size: self.cfg.max_size,
            rewriter_pruning: self.cfg.rewriter_pruning,
            signature_points: points,
            deadline: self.deadline,
            solver_limit: self.cfg.solver_limit,
            trace: self.cfg.trace,
            ..EnumOptions::default()
        };
        let out = solve_enum(p, &family, opts);
        let st = &out.stats;
        self.stats.enumerated += st.enumerated;
        self.stats.retained += st.retained;
        self.stats.pruned_rewriter += st.pruned_rewriter;
        self.stats.pruned_signature += st.pruned_signature;
        self.stats.blocked_exact += st.blocked_exact;
        self.stats.cex_points += st.cex_points;
        for t in &out.trace {
            self.log(format!("enum {:?} {}", t.decision, t.value));
        }
        out.result.map(|s| (s, strategy)).map_err(|e| e.to_string())
    }

    fn generable(p: &SynthProblem, s: &Solution) -> bool {
        p.functions.iter().all(|f| match (&f.grammar, s.get(&f.name)) {
            (Some(g), Some(l)) => g.generates_start(&l.body),
            _ => true,
        })
    }

    fn portfolio(&mut self, p: &SynthProblem, points: Option<Vec<Vec<Value>>>) -> Attempt {
        if let Ok((s, _)) = self.cegqi(p) {
            if Self::generable(p, &s) {
                return Ok((s, Strategy::Cegqi));
            }
            let now = Instant::now();
            let recon_deadline = match self.deadline {
                Some(d) => now + d.saturating_duration_since(now).mul_f64(self.cfg.recon_fraction),
                None => now + Duration::from_secs(10),
            };
            let opts = ReconstructOptions {
                max_size: self.cfg.recon_budget,
                deadline: Some(recon_deadline),
                ..ReconstructOptions::default()
            };
            match reconstruct(&s, p, &opts) {
                Ok(r) => return Ok((r, Strategy::Reconstruction)),
                Err(e) => self.log(format!("reconstruction failed: {e}")),
            }
        }
        self.enumerate(p, points)
    }

    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn dispatch(&mut self, p: &SynthProblem) -> Attempt {
        let has_grammar = p.functions.iter().any(|f| f.grammar.is_some());
        let q = match classify(p) {
            ConjectureClass::NonSingleInvocation => match to_single_invocation(p) {
                Ok(q) => {
                    self.log("converted to single invocation".into());
                    q
                }
                Err(_) => p.clone(),
            },
            _ => p.clone(),
        };
        let class = classify(&q);
        let io_points = match &class {
            ConjectureClass::IoExamples(pts) if self.cfg.io_pruning && !pts.is_empty() => Some(io_inputs(pts)),
            _ => None,
        };
        match self.cfg.mode {
            Mode::Cegqi => return self.cegqi(&q),
            Mode::Enum => return self.enumerate(&q, io_points),
            Mode::Portfolio => return self.portfolio(&q, io_points),
            Mode::Auto => {}
        }
        match (class, has_grammar) {
            (ConjectureClass::IoExamples(_), true) => self.enumerate(&q, io_points),
            (ConjectureClass::IoExamples(_) | ConjectureClass::SingleInvocation, false) => self.cegqi(&q),
            (ConjectureClass::SingleInvocation, true) => self.portfolio(&q, None),
            (ConjectureClass::NonSingleInvocation, _) => self.enumerate(&q, None),
        }
    }
}

pub fn solve(p: &SynthProblem, cfg: &SolverConfig) -> SolveOutput {
    let start = Instant::now();
    let mut run = Run {
        cfg,
        start,
        deadline: cfg.timeout.map(|t| start + t),
        stats: Stats::default(),
        trace: Vec::new(),
    };
    let result = run.dispatch(p);
    let result = match result {
        Ok((s, strategy)) if cfg.verify => match verify_solution(p, &s) {
            Ok(true) => Ok((s, strategy)),
            Ok(false) => Err("verification-failed".to_string()),
            Err(e) => Err(format!("verification: {e}")),
        },
        Err(_) if run.timed_out() => Err("timeout".to_string()),
        r => r,
    };
    run.stats.wall_time = run.start.elapsed();
    match result {
        Ok((solution, strategy)) => SolveOutput::Success {
            solution,
            strategy,
            stats: run.stats,
            trace: run.trace,
        },
        Err(reason) => SolveOutput::GaveUp {
            reason,
            stats: run.stats,
            trace: run.trace,
        },
    }
}
