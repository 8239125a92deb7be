use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line count mismatch: source has {src} lines, target has {tgt}")]
    LineCountMismatch { src: usize, tgt: usize },

    #[error("segment {id}: empty {side} side")]
    EmptySegment { id: String, side: &'static str },

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("segment {seg}: position {pos} out of range ({side} side has {len} tokens)")]
    GoldPosition {
        seg: String,
        pos: usize,
        side: &'static str,
        len: usize,
    },

    #[error("gold standard names segment {0}, which is not in the bitext")]
    UnknownSegment(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no links to normalize (K = 0)")]
    DegenerateModel,

    #[error("auxiliary parameter estimation failed: {0}")]
    AuxEstimation(String),

    #[error("links({u},{v}) = {links} exceeds cooc = {cooc}")]
    LinksExceedCooc {
        u: String,
        v: String,
        links: f64,
        cooc: f64,
    },

    #[error("segment too large for exhaustive search ({0} tokens, limit 12)")]
    OracleTooLarge(usize),

    #[error("metric undefined: {0} set is empty")]
    UndefinedMetric(&'static str),

    #[error("no gold-standard segment overlaps the bitext")]
    NoOverlap,

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by malformed or missing input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::LineCountMismatch { .. }
                | Error::EmptySegment { .. }
                | Error::Format { .. }
                | Error::GoldPosition { .. }
                | Error::UnknownSegment(_)
                | Error::NoOverlap
        )
    }
}
