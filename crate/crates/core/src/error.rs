use std::io;

use thiserror::Error;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("unknown corpus format `{0}` (expected `jsonl` or `csv`)")]
    UnknownFormat(String),

    #[error("invalid label {0:?}: labels must be non-empty and contain no newlines")]
    InvalidLabel(String),

    #[error("document `{id}`: {message}")]
    InvalidDocument { id: String, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus of {0} document(s) is too small to split")]
    CorpusTooSmall(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("label `{0}` appears in the neighborhood but not in the label statistics")]
    UnknownLabel(Label),

    #[error("invalid neighborhood: {0}")]
    InvalidNeighborhood(String),

    #[error("invalid index file: {0}")]
    InvalidIndexFile(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
