use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map parse error at line {line}, column {column}: {message}")]
    MapParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("point ({x:.3}, {y:.3}) lies outside the grid")]
    OutsideGrid { x: f64, y: f64 },
    #[error("grid has no occupied cell; distance field undefined")]
    NoOccupiedCell,
    #[error("grid has no traversable cell")]
    NoTraversableCell,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("belief collapsed: every particle weight underflowed")]
    BeliefCollapsed,
    #[error("orientation undefined: weighted sine and cosine sums vanish")]
    OrientationUndefined,
    #[error("no path between cells {from:?} and {to:?}")]
    NoPath { from: (usize, usize), to: (usize, usize) },
    #[error("parameter dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("policy file error: {0}")]
    PolicyFormat(String),
    #[error("episode failed at step {step}: {source}")]
    Episode {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
