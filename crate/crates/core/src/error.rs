use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the geometry, assembly, spectral and analysis stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate panel {index}: area {area:e}")]
    DegeneratePanel { index: usize, area: f64 },

    #[error("mesh is not a closed orientable surface: {0}")]
    OpenMesh(String),

    #[error("coincident points passed to a singular kernel")]
    CoincidentPoints,

    #[error("evaluation point {index} at {point:?} lies within {distance:e} of the surface (minimum {min_distance:e})")]
    PointTooClose {
        index: usize,
        point: [f64; 3],
        distance: f64,
        min_distance: f64,
    },

    #[error("region is empty after excluding the {epsilon} tube")]
    EmptyRegion { epsilon: f64 },

    #[error("single layer matrix is not positive definite (failed pivot {pivot}, smallest eigenvalue {smallest_eigenvalue:e})")]
    NotPositiveDefinite {
        pivot: usize,
        smallest_eigenvalue: f64,
    },

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("delta range tops out at {hi:e}, below the smallest resolved |lambda| {floor:e}")]
    TruncationDominated { hi: f64, floor: f64 },

    #[error("mesh carries no structured (u, v) labels")]
    Unstructured,

    #[error("malformed matrix dump: {0}")]
    MalformedDump(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
