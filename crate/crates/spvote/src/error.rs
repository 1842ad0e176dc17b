use thiserror::Error;

/// Crate-wide error type. Everything here is an input-contract violation;
/// functions that can fail return `Result<T>` and never panic on bad data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ranking must be a permutation of 0..{m}, got {got:?}")]
    InvalidRanking { m: usize, got: Vec<usize> },

    #[error("alternative id {id} is not among the {m} alternatives")]
    UnknownAlternative { id: usize, m: usize },

    #[error("pair must name two distinct alternatives, got ({0}, {1})")]
    DegeneratePair(usize, usize),

    #[error("question needs at least 2 alternatives, got {0}")]
    TooFewAlternatives(usize),

    #[error("alternative ids must be 0..m in order, got id {got} at position {pos}")]
    NonCanonicalIds { got: usize, pos: usize },

    #[error("election has no responses")]
    EmptyElection,

    #[error("response voter {voter} does not match question {expected}: {found}")]
    ForeignResponse {
        voter: String,
        expected: String,
        found: String,
    },

    #[error("response by {voter} does not match its declared format {format}")]
    FormatMismatch { voter: String, format: String },

    #[error("unknown elicitation format token {0:?}")]
    UnknownFormat(String),

    #[error("extraction parameters need 0.5 < alpha < 1 and 0 < beta < 0.5, got alpha={alpha}, beta={beta}")]
    InvalidParams { alpha: f64, beta: f64 },

    #[error("prediction is absent; route prediction-free formats to a fallback aggregator")]
    AbsentPrediction,

    #[error("no usable reports for pair ({0}, {1})")]
    NoEvidence(usize, usize),

    #[error("tournament is missing a direction for pair ({0}, {1})")]
    IncompleteTournament(usize, usize),

    #[error("rankings have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("profile must contain only full-ranking votes")]
    NonRankVote,

    #[error("profile has no rankings")]
    EmptyProfile,

    #[error("world model supports at most {max} alternatives, got {got}")]
    WorldTooLarge { got: usize, max: usize },

    #[error("{what} must be a probability distribution over {len} entries (positive, summing to 1)")]
    InvalidDistribution { what: &'static str, len: usize },

    #[error("mallows dispersion must lie in (0, 1], got {0}")]
    InvalidDispersion(f64),

    #[error("grid is empty: {0}")]
    EmptyGrid(String),

    #[error("domain {domain} has only {got} questions, need {need} for the train split")]
    InsufficientQuestions {
        domain: String,
        got: usize,
        need: usize,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
