use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: invalid {field} token {token:?}")]
    Vocabulary {
        line: usize,
        field: &'static str,
        token: String,
    },

    #[error("line {line}: duplicate record (account {account_id}, step {step}, video {video_id}, {kind})")]
    DuplicateRecord {
        line: usize,
        account_id: String,
        step: u32,
        video_id: String,
        kind: &'static str,
    },

    #[error("invalid window: {0}")]
    Window(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
