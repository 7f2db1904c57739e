use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: no edges found")]
    EmptyEdgeList(PathBuf),

    #[error("node index {index} out of range for a network of {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("{} unknown node id(s): {}", .0.len(), preview(.0))]
    UnknownNodes(Vec<String>),

    #[error("node {node} assigned to both cluster {first} and cluster {second}")]
    ConflictingAssignment {
        node: String,
        first: String,
        second: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("markers are not co-clustered in run {run}")]
    NotCoclustered { run: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn preview(ids: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = ids
        .iter()
        .take(SHOWN)
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(", ");
    if ids.len() > SHOWN {
        out.push_str(", ...");
    }
    out
}
