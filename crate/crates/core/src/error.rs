use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("unknown polytope preset `{0}`")]
    UnknownPreset(String),

    #[error("vertex index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid neighborhood scheme: {0}")]
    InvalidScheme(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("point {point:?} lies outside the polytope")]
    OutsidePolytope { point: Vec<f64> },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("removed arcs interfere: half-angle {theta} must be below half the minimum gap {gap}")]
    Interference { theta: f64, gap: f64 },

    #[error("window at ({row}, {col}) of size {size} does not fit a {height}x{width} raster")]
    WindowOutOfBounds {
        row: usize,
        col: usize,
        size: usize,
        height: usize,
        width: usize,
    },

    #[error("no invariant region found below the cap {cap}")]
    NoPassBelowCap { cap: f64 },

    #[error("orbit did not enter the region within {steps} steps (final distance {distance})")]
    NoEntry { steps: usize, distance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("netpbm: {0}")]
    Netpbm(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
