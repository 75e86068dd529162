use std::path::PathBuf;

use thiserror::Error;

use crate::tree::VesselTree;

pub type Result<T, E = CcoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CcoError {
    /// A caller violated an operation's precondition (wrong dimension, unset radii, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate domain: {misses} consecutive rejection-sampling misses")]
    DegenerateDomain { misses: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameter `{key}`: {message}")]
    Param { key: String, message: String },

    #[error("config line {line}: key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("bisection bracket lost: residual has the same sign at both ends ({lo:e}, {hi:e})")]
    Bracket { lo: f64, hi: f64 },

    #[error("degenerate bifurcation: branching point collapsed onto an endpoint")]
    DegenerateSolution,

    #[error("tree file line {line}: {fault}: {message}")]
    TreeFormat {
        line: usize,
        fault: TreeFileFault,
        message: String,
    },

    #[error("seed tree rejected: {0}")]
    InvalidSeed(String),

    #[error("growth stalled after {discarded} consecutive discarded candidates at {terminals} terminals")]
    GrowthStalled {
        discarded: usize,
        terminals: usize,
        partial: Box<VesselTree>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Category of a rejected tree file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeFileFault {
    Malformed,
    DanglingParent,
    MultipleRoots,
    MissingRoot,
    /// An internal node without exactly two children.
    Arity,
    /// Stored beta or flow disagrees with the value recomputed from geometry.
    Mismatch,
}

impl std::fmt::Display for TreeFileFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TreeFileFault::Malformed => "malformed row",
            TreeFileFault::DanglingParent => "dangling parent",
            TreeFileFault::MultipleRoots => "multiple roots",
            TreeFileFault::MissingRoot => "missing root",
            TreeFileFault::Arity => "internal node without two children",
            TreeFileFault::Mismatch => "consistency mismatch",
        })
    }
}

impl CcoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CcoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(key: &str, message: impl Into<String>) -> Self {
        CcoError::Param {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
