use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires dimension >= {min}, got d = {d}")]
    RecurrentDimension { d: usize, min: usize },

    #[error("dimension {d} exceeds the supported maximum {max}")]
    DimensionTooLarge { d: usize, max: usize },

    #[error("points of dimension {got} mixed with dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph is not connected; a sampling walk would not terminate")]
    Disconnected,

    #[error("vertex count {vertices} exceeds the configured cap {cap}")]
    TooLarge { vertices: u128, cap: u64 },

    #[error("vertex {0} is not in the tree")]
    UnknownVertex(u32),

    #[error("intrinsic sphere of radius {radius} around vertex {center} is empty; use a larger box")]
    EmptySphere { center: u32, radius: u32 },

    #[error("the past of the root (wired supernode) is undefined")]
    RootHasNoPast,

    #[error("tree has no vertex coordinates")]
    MissingCoords,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path is not simple")]
    NotSimple,

    #[error("linear system is singular or ill-conditioned (pivot ratio {pivot_ratio:.3e})")]
    IllConditioned { pivot_ratio: f64 },

    #[error("no accepted samples in {trials} trials (rejected {rejected}, leaked {leaked} past the step cutoff)")]
    NoAcceptedSamples {
        trials: u64,
        rejected: u64,
        leaked: u64,
    },

    #[error("set of points is empty")]
    EmptySet,

    #[error("set is not contained in the required box")]
    SetOutsideBox,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
