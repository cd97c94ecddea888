use thiserror::Error;

/// Crate-wide error type.
///
/// Candidate infeasibility (TOPS over budget, latency over cap, unmappable
/// operator) is *not* an error: it is recorded on the candidate itself so
/// the search can rank it. Errors are reserved for misuse and bad inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("prune step must be >= 1 for dimension {dimension}")]
    ZeroPruneStep { dimension: String },

    #[error("operator does not fit the local buffer: needs {required} bytes per tile column, have {available}")]
    InfeasibleMapping { required: u64, available: u64 },

    #[error("unknown region '{region}'; available: {available}")]
    UnknownRegion { region: String, available: String },

    #[error("inputs must have equal length >= 2 (got {left} and {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("rank correlation is undefined for a constant input vector")]
    ConstantInput,

    #[error("accuracy table has no row for fingerprint '{0}' (strict lookup)")]
    TableMiss(String),

    #[error("candidates were evaluated under different objective modes")]
    ModeMismatch,

    #[error("front member {member} does not strictly dominate the reference point {reference}")]
    RefPointNotDominated { member: String, reference: String },

    #[error("objective dimension {0} is outside the supported 1..=4 range")]
    BadObjectiveArity(usize),

    #[error("joint space has {size} members, over the exhaustive cap of {cap}; use the evolutionary strategy instead")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("search budget {budget} is below the population size {population}")]
    BudgetTooSmall { budget: usize, population: usize },

    #[error("output directory {0} is not empty (pass --force to overwrite)")]
    OutputDirNotEmpty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
