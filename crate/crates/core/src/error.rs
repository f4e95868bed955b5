use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex set must be non-empty")]
    EmptyVertexSet,
    #[error("stretch parameter k must be at least 1, got {0}")]
    InvalidStretchParameter(u32),
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("vertex {vertex} has level {level} outside 0..{k}")]
    LevelOutOfRange { vertex: u32, level: u32, k: u32 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("invalid edge weight {0}")]
    InvalidWeight(f64),
    #[error("weight order violated at stream position {position}: {weight} after {previous}")]
    WeightOrder { position: usize, previous: f64, weight: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has {n} vertices, oracle guard allows at most {limit}")]
    GuardExceeded { n: usize, limit: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Runtime(#[from] crate::streamsort::runtime::RuntimeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
