use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incomplete automaton: {0}")]
    Incomplete(&'static str),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("requires strong connectivity")]
    NotStronglyConnected,
    #[error("degenerate cycle structure: no nonzero loop difference within length {0}")]
    DegenerateCycles(usize),
    #[error("gcd({q}, {k}) != 1: factor out k-part first")]
    NotCoprime { q: u64, k: u32 },
    #[error("no decomposition guaranteed: digit actions are not all bijective (like (-1)^nu2(n), such a sequence need not admit a decomposition)")]
    NotInvertible,
    #[error("no decay: sequence not balanced against weight")]
    NotBalanced,
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("target error too small for budget: requires M = {required} grid points (budget {budget})")]
    Budget { required: u64, budget: u64 },
    #[error("construction did not stabilize: {0}")]
    Diagnostic(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
