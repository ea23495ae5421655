use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A group specification violated one of its invariants.
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    /// A parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A root-finding bracket contained no solution.
    #[error("no root in bracket: {0}")]
    NoRoot(String),

    /// An estimate is undefined on the given data (flagged, never fabricated).
    #[error("estimate undefined: {0}")]
    Undefined(String),

    /// An input file failed to parse.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// A pipeline stage failed; the stage name is preserved for diagnostics.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
