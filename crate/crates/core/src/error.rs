//! Crate-wide error type. Every data error names the offending identifier
//! so failures can be traced back to a specific input row.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}: column '{column}': {message}")]
    MalformedRow {
        file: String,
        line: u64,
        column: String,
        message: String,
    },

    #[error("{file}: missing required column '{column}'")]
    MissingColumn { file: String, column: String },

    #[error("duplicate {kind} '{id}'")]
    DuplicateId { kind: &'static str, id: String },

    #[error("{kind} '{id}' referenced from {context} does not exist")]
    UnknownReference {
        kind: &'static str,
        id: String,
        context: String,
    },

    #[error("publication '{pub_id}': citations at census '{earlier}' ({earlier_count}) exceed census '{later}' ({later_count})")]
    CitationOrder {
        pub_id: String,
        earlier: String,
        earlier_count: u64,
        later: String,
        later_count: u64,
    },

    #[error("publication '{pub_id}': {message}")]
    InvalidPublication { pub_id: String, message: String },

    #[error("journal '{journal_id}': {message}")]
    InvalidJournal { journal_id: String, message: String },

    #[error("researcher '{researcher_id}': {message}")]
    InvalidResearcher {
        researcher_id: String,
        message: String,
    },

    #[error("corpus: {0}")]
    InvalidCorpus(String),

    #[error("unknown census label '{0}'")]
    UnknownCensus(String),

    #[error("unknown publication '{0}'")]
    UnknownPublication(String),

    #[error("unknown journal '{0}'")]
    UnknownJournal(String),

    #[error("unknown researcher '{0}'")]
    UnknownResearcher(String),

    #[error("journal '{journal_id}' has no metric entry for year {year}")]
    MissingJournalMetric { journal_id: String, year: i32 },

    #[error("undefined percentile for {kind} '{id}': {detail}")]
    UndefinedPercentile {
        kind: &'static str,
        id: String,
        detail: String,
    },

    #[error("no slope configured for panel '{panel_id}' year {year}")]
    MissingSlope { panel_id: String, year: i32 },

    #[error("unknown panel '{0}'")]
    UnknownPanel(String),

    #[error("slope {0} is not below 1; weights would be undefined or negative on citations")]
    InvalidSlope(f64),

    #[error("percentile {0} outside [0, 100]")]
    PercentileOutOfRange(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("statistics: input lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("statistics: need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("statistics: {0} side has zero variance; correlation undefined")]
    ZeroVariance(&'static str),

    #[error("selection: k must be >= 1")]
    InvalidK,

    #[error("selection sets are not comparable: {0}")]
    IncompatibleSelections(String),

    #[error("generator: {0}")]
    InfeasibleModel(String),

    #[error("artifact '{file}': {message}")]
    Artifact { file: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short code for machine-parsable CLI error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedRow { .. } => "malformed_row",
            Error::MissingColumn { .. } => "missing_column",
            Error::DuplicateId { .. } => "duplicate_id",
            Error::UnknownReference { .. } => "unknown_reference",
            Error::CitationOrder { .. } => "citation_order",
            Error::InvalidPublication { .. } => "invalid_publication",
            Error::InvalidJournal { .. } => "invalid_journal",
            Error::InvalidResearcher { .. } => "invalid_researcher",
            Error::InvalidCorpus(_) => "invalid_corpus",
            Error::UnknownCensus(_) => "unknown_census",
            Error::UnknownPublication(_) => "unknown_publication",
            Error::UnknownJournal(_) => "unknown_journal",
            Error::UnknownResearcher(_) => "unknown_researcher",
            Error::MissingJournalMetric { .. } => "missing_journal_metric",
            Error::UndefinedPercentile { .. } => "undefined_percentile",
            Error::MissingSlope { .. } => "missing_slope",
            Error::UnknownPanel(_) => "unknown_panel",
            Error::InvalidSlope(_) => "invalid_slope",
            Error::PercentileOutOfRange(_) => "percentile_out_of_range",
            Error::Config(_) => "config",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::ZeroVariance(_) => "zero_variance",
            Error::InvalidK => "invalid_k",
            Error::IncompatibleSelections(_) => "incompatible_selections",
            Error::InfeasibleModel(_) => "infeasible_model",
            Error::Artifact { .. } => "artifact",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
