//! Enumerative search over grammar datatypes with symmetry breaking.

mod datatype;
mod pattern;
mod search;

pub use datatype::{
    default_grammar, grammar_to_datatypes, Builder, Constructor, Datatype, DatatypeFamily, DtError, DtValue,
};
pub use pattern::{
    generalize_pattern, make_blocking_pattern, seed_patterns, shift_pattern, BlockingPattern, Justification,
    PatternError, SelectorPath, Step, Witness,
};
pub use search::{
    audit, signature_of, solve_enum, Audit, Candidate, CandidateDb, DbEntry, Decision, EnumError, EnumOptions,
    EnumOutcome, EnumStats, Enumerator, Pruned, TraceEntry,
};

#[cfg(test)]
mod tests;
