use alloc::string::String;

/// Errors surfaced by the rating engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The transaction header is missing a required column.
    #[error("missing required column `{0}` in header")]
    MissingColumn(String),
    /// A label row names a category outside the closed set.
    #[error("line {line}: unknown category `{name}`")]
    UnknownCategory { line: usize, name: String },
    /// Graph construction was handed zero records.
    #[error("cannot build a graph from an empty record set")]
    EmptyInput,
    /// A transaction count lies outside `[1, max]`.
    #[error("count {count} outside the valid range [1, {max}]")]
    CountOutOfRange { count: u64, max: u64 },
    /// Semi-supervised propagation needs labels and a training set.
    #[error("semi-supervised mode requires a label table and a training set")]
    MissingLabels,
    /// Propagation produced a NaN or infinity.
    #[error("non-finite metric value at iteration {iteration}")]
    NonFinite { iteration: usize },
    /// Propagation was started on a graph without edge scores.
    #[error("graph edges have not been scored yet")]
    UnscoredGraph,
    /// Two propagation states do not describe the same graph.
    #[error("state dimensions do not match the graph")]
    GraphMismatch,
    /// Evaluation found no labeled account among the predictions.
    #[error("no labeled account has a prediction; nothing to evaluate")]
    NoLabeledPredictions,
    /// A ranking metric needs both classes present.
    #[error("need at least one illicit and one licit labeled account")]
    SingleClass,
    /// Variance analysis needs at least two samples per group.
    #[error("variance analysis requires at least two samples per group")]
    GroupTooSmall,
    /// Both between- and within-group variances are zero.
    #[error("all samples identical; variance ratio undefined")]
    DegenerateVariance,
    /// A pattern plant named an unsupported kind.
    #[error("unknown pattern kind `{0}`")]
    UnknownPattern(String),
    /// A configuration value is out of its declared range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
