use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use synthlia::frontend::{parse_problem, print_solution, solve, Mode, SolveOutput, SolverConfig};

/// Synthesize functions for a problem file.
#[derive(Parser)]
#[command(name = "synthlia", version)]
struct Args {
    /// Problem file; `-` reads standard input.
    file: PathBuf,
    #[arg(long, default_value = "auto", value_parser = ["auto", "cegqi", "enum", "portfolio"])]
    mode: String,
    /// Enumeration size cap.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_size: u64,
    /// Instantiation rounds.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: u64,
    /// Largest grammar term tried during reconstruction.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    recon_budget: u64,
    /// Time budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Disable pruning by normal forms.
    #[arg(long)]
    no_sb_rewriter: bool,
    /// Disable pruning by example outputs.
    #[arg(long)]
    no_sb_examples: bool,
    /// Check solutions before printing them.
    #[arg(long)]
    verify: bool,
    /// Print counters to standard error.
    #[arg(long)]
    stats: bool,
    /// Print search decisions to standard error.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = if args.file.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(&args.file)
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::from(2);
        }
    };
    let problem = match parse_problem(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let timeout = match args.timeout {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            eprintln!("error: --timeout must be positive");
            return ExitCode::from(2);
        }
        t => t.map(Duration::from_secs_f64),
    };
    let cfg = SolverConfig {
        mode: args.mode.parse::<Mode>().expect("checked by clap"),
        max_size: args.max_size as usize,
        max_iters: args.max_iters as usize,
        recon_budget: args.recon_budget as usize,
        io_pruning: !args.no_sb_examples,
        rewriter_pruning: !args.no_sb_rewriter,
        timeout,
        verify: args.verify,
        trace: args.trace,
        ..SolverConfig::default()
    };
    let out = solve(&problem, &cfg);
    for line in out.trace() {
        eprintln!("{line}");
    }
    let code = match &out {
        SolveOutput::Success { solution, .. } => {
            print!("{}", print_solution(solution));
            0
        }
        SolveOutput::GaveUp { reason, .. } => {
            println!("(fail {reason})");
            1
        }
    };
    if args.stats {
        if let Some(s) = out.strategy() {
            eprintln!("strategy={s}");
        }
        eprint!("{}", out.stats().report());
    }
    ExitCode::from(code)
}
