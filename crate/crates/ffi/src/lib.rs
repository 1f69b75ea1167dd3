//! C interface to the synthesizer.
//!
//! Problems and results are opaque handles. Every entry point returns an
//! [`SlStatus`]; on failure a message is available from [`sl_last_error`]
//! on the calling thread. Strings handed out by an [`SlOutput`] live as long
//! as the output.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use synthlia::frontend::{parse_problem, print_solution, solve, Mode, SolveOutput, SolverConfig};
use synthlia::term::SynthProblem;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    /// The solver ran but found no solution; see `sl_output_reason`.
    GaveUp = 1,
    ParseError = 2,
    InvalidArgument = 3,
    /// An internal error was caught at the boundary.
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlMode {
    Auto = 0,
    Cegqi = 1,
    Enum = 2,
    Portfolio = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SlConfig {
    pub mode: SlMode,
    pub max_size: u32,
    pub max_iters: u32,
    pub recon_budget: u32,
    /// Seconds; zero or negative means no limit.
    pub timeout_secs: f64,
    pub verify: bool,
    pub rewriter_pruning: bool,
    pub io_pruning: bool,
}

/// A parsed synthesis problem.
pub struct SlProblem {
    problem: SynthProblem,
}

/// The result of one solve call.
pub struct SlOutput {
    solution: Option<CString>,
    reason: Option<CString>,
    strategy: Option<CString>,
    stats: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> SlStatus) -> SlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown".into());
            set_error(format!("panic: {msg}"));
            SlStatus::Panic
        }
    }
}

fn to_cstring(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed")
}

impl SlConfig {
    fn to_config(self) -> Result<SolverConfig, String> {
        if self.max_size == 0 || self.max_iters == 0 {
            return Err("max_size and max_iters must be positive".into());
        }
        if self.timeout_secs.is_nan() || self.timeout_secs.is_infinite() {
            return Err("timeout must be finite".into());
        }
        let timeout = (self.timeout_secs > 0.0).then(|| Duration::from_secs_f64(self.timeout_secs));
        Ok(SolverConfig {
            mode: match self.mode {
                SlMode::Auto => Mode::Auto,
                SlMode::Cegqi => Mode::Cegqi,
                SlMode::Enum => Mode::Enum,
                SlMode::Portfolio => Mode::Portfolio,
            },
            max_size: self.max_size as usize,
            max_iters: self.max_iters as usize,
            recon_budget: self.recon_budget as usize,
            timeout,
            verify: self.verify,
            rewriter_pruning: self.rewriter_pruning,
            io_pruning: self.io_pruning,
            ..SolverConfig::default()
        })
    }
}

/// Writes the default configuration to `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `SlConfig`.
#[no_mangle]
pub unsafe extern "C" fn sl_config_default(out: *mut SlConfig) -> SlStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return SlStatus::InvalidArgument;
        }
        let d = SolverConfig::default();
        let cfg = SlConfig {
            mode: SlMode::Auto,
            max_size: d.max_size as u32,
            max_iters: d.max_iters as u32,
            recon_budget: d.recon_budget as u32,
            timeout_secs: 0.0,
            verify: d.verify,
            rewriter_pruning: d.rewriter_pruning,
            io_pruning: d.io_pruning,
        };
        // SAFETY: checked non-null; the caller guarantees it is writable.
        unsafe { out.write(cfg) };
        SlStatus::Ok
    })
}

/// Parses a problem in SyGuS format. On success `*out` owns a new problem
/// that must be released with `sl_problem_free`.
///
/// # Safety
/// `text` must be null or a nul-terminated string; `out` must be null or
/// point to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_parse(text: *const c_char, out: *mut *mut SlProblem) -> SlStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            set_error("null argument");
            return SlStatus::InvalidArgument;
        }
        // SAFETY: checked non-null; the caller guarantees nul termination.
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("input is not valid UTF-8");
                return SlStatus::InvalidArgument;
            }
        };
        match parse_problem(text) {
            Ok(problem) => {
                // SAFETY: checked non-null above.
                unsafe { out.write(Box::into_raw(Box::new(SlProblem { problem }))) };
                SlStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                // SAFETY: checked non-null above.
                unsafe { out.write(ptr::null_mut()) };
                SlStatus::ParseError
            }
        }
    })
}

/// # Safety
/// `p` must be null or a pointer from `sl_problem_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_free(p: *mut SlProblem) {
    if !p.is_null() {
        // SAFETY: the caller hands back ownership of a pointer we boxed.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Solves `problem`. A null `config` means the defaults. Returns `Ok` or
/// `GaveUp`; in both cases `*out` owns a new output that must be released
/// with `sl_output_free`.
///
/// # Safety
/// `problem` must come from `sl_problem_parse`; `config` must be null or
/// point to a valid `SlConfig`; `out` must point to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_solve(
    problem: *const SlProblem,
    config: *const SlConfig,
    out: *mut *mut SlOutput,
) -> SlStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            set_error("null argument");
            return SlStatus::InvalidArgument;
        }
        let cfg = if config.is_null() {
            SolverConfig::default()
        } else {
            // SAFETY: checked non-null; the caller guarantees validity.
            match unsafe { *config }.to_config() {
                Ok(c) => c,
                Err(e) => {
                    set_error(e);
                    return SlStatus::InvalidArgument;
                }
            }
        };
        // SAFETY: checked non-null; the caller guarantees it is live.
        let p = unsafe { &(*problem).problem };
        let result = solve(p, &cfg);
        let stats = to_cstring(result.stats().report());
        let (output, status) = match result {
            SolveOutput::Success { solution, strategy, .. } => (
                SlOutput {
                    solution: Some(to_cstring(print_solution(&solution))),
                    reason: None,
                    strategy: Some(to_cstring(strategy.to_string())),
                    stats,
                },
                SlStatus::Ok,
            ),
            SolveOutput::GaveUp { reason, .. } => (
                SlOutput {
                    solution: None,
                    reason: Some(to_cstring(reason)),
                    strategy: None,
                    stats,
                },
                SlStatus::GaveUp,
            ),
        };
        // SAFETY: checked non-null above.
        unsafe { out.write(Box::into_raw(Box::new(output))) };
        status
    })
}

fn field(o: *const SlOutput, get: impl FnOnce(&SlOutput) -> Option<&CString>) -> *const c_char {
    if o.is_null() {
        return ptr::null();
    }
    // SAFETY: non-null outputs come from `sl_solve` and are live per the
    // callers' contracts.
    get(unsafe { &*o }).map_or(ptr::null(), |s| s.as_ptr())
}

/// `define-fun` lines of the solution, or null if the solver gave up.
///
/// # Safety
/// `o` must be null or a live output from `sl_solve`.
#[no_mangle]
pub unsafe extern "C" fn sl_output_solution(o: *const SlOutput) -> *const c_char {
    field(o, |o| o.solution.as_ref())
}

/// Why the solver gave up, or null on success.
///
/// # Safety
/// `o` must be null or a live output from `sl_solve`.
#[no_mangle]
pub unsafe extern "C" fn sl_output_reason(o: *const SlOutput) -> *const c_char {
    field(o, |o| o.reason.as_ref())
}

/// Name of the strategy that produced the solution, or null.
///
/// # Safety
/// `o` must be null or a live output from `sl_solve`.
#[no_mangle]
pub unsafe extern "C" fn sl_output_strategy(o: *const SlOutput) -> *const c_char {
    field(o, |o| o.strategy.as_ref())
}

/// Search counters as `key=value` lines.
///
/// # Safety
/// `o` must be null or a live output from `sl_solve`.
#[no_mangle]
pub unsafe extern "C" fn sl_output_stats(o: *const SlOutput) -> *const c_char {
    field(o, |o| Some(&o.stats))
}

/// # Safety
/// `o` must be null or an output from `sl_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_output_free(o: *mut SlOutput) {
    if !o.is_null() {
        // SAFETY: the caller hands back ownership of a pointer we boxed.
        drop(unsafe { Box::from_raw(o) });
    }
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
