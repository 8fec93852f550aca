use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by mesh construction, file I/O, and the denoising
/// pipeline. Structural and numeric failures are reported eagerly; the
/// library never silently repairs a broken mesh.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Malformed file content. `line` is 1-based for text formats; binary
    /// formats report the byte offset in the message and set `line` to 0.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("non-manifold edge ({a}, {b}): shared by more than two faces")]
    NonManifoldEdge { a: u32, b: u32 },

    #[error(
        "face {face} has invalid vertex indices [{}, {}, {}] (mesh has {vertex_count} vertices; indices must be distinct and in range)",
        indices[0], indices[1], indices[2]
    )]
    InvalidFace {
        face: usize,
        indices: [u32; 3],
        vertex_count: usize,
    },

    #[error("mesh has no edges")]
    NoEdges,

    #[error("vertex count mismatch: expected {expected}, got {got}")]
    VertexCountMismatch { expected: usize, got: usize },

    #[error("face count mismatch: {left} vs {right} (meshes must share connectivity)")]
    FaceCountMismatch { left: usize, right: usize },

    #[error("vertex {vertex} became non-finite during the update step")]
    NonFiniteVertex { vertex: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, MeshError>;

impl MeshError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        MeshError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        MeshError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
