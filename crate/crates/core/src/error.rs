use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}, {z}) lies outside the normalized domain [-1, 1]^3")]
    OutOfDomain { x: f64, y: f64, z: f64 },

    #[error("mesh is not watertight: {boundary_edges} boundary edges, {non_manifold_edges} non-manifold edges")]
    NotWatertight {
        boundary_edges: usize,
        non_manifold_edges: usize,
    },

    #[error("face id {face} out of range (face count {face_count})")]
    InvalidFace { face: usize, face_count: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero level set reaches the domain boundary at {nodes} boundary nodes")]
    OpenBoundary { nodes: usize },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
