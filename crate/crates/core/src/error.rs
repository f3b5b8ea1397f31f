use thiserror::Error;

use crate::inference::SolverDiagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("empty label `{0:?}` in label set")]
    EmptyLabel(String),

    #[error("label set needs at least 2 labels, got {0}")]
    TooFewLabels(usize),

    #[error("label sets differ in size: {left} vs {right}")]
    LabelSetMismatch { left: usize, right: usize },

    #[error("profile for item `{0}` has no ballots")]
    EmptyProfile(String),

    #[error("ballot item id `{got}` does not match profile item `{expected}`")]
    ItemIdMismatch { expected: String, got: String },

    #[error("ranking depth {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("{n} labels exceeds the brute-force limit of {limit}; use branch-and-bound")]
    SizeLimit { n: usize, limit: usize },

    #[error("no lexicon hits in transcript and smoothing alpha is zero")]
    NoSignal,

    #[error("similarity column for experienced label `{0}` is all zeros")]
    ZeroColumn(String),

    #[error("lexicon word `{word}` appears under both `{first}` and `{second}`")]
    AmbiguousWord {
        word: String,
        first: String,
        second: String,
    },

    #[error("lexicon synset for `{0}` is empty")]
    EmptySynset(String),

    #[error("vector is not on the simplex: sum = {0}")]
    NotSimplex(f64),

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("matrix is {rows}x{cols} but label spaces demand {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("solver failed to converge in {iterations} active-set iterations")]
    SolverFailure {
        iterations: usize,
        diagnostics: Box<SolverDiagnostics>,
    },

    #[error("ranking lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("reports cover different items; only in A: [{only_a}], only in B: [{only_b}]")]
    ItemSetMismatch { only_a: String, only_b: String },

    #[error("invalid {field}: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
}
