use thiserror::Error;

/// Errors raised by the library. Contract failures inside the coloring
/// engine are reported here too, with enough context to diagnose them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge {index} has {found} vertices, expected {expected}")]
    WrongArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("edge {index} contains vertex {vertex} outside [0, {n})")]
    VertexOutOfRange { index: usize, vertex: u32, n: usize },
    #[error("edge {index} repeats vertex {vertex}")]
    RepeatedVertex { index: usize, vertex: u32 },
    #[error("duplicate edge {edge:?}")]
    DuplicateEdge { edge: Vec<u32> },
    #[error("uniformity k must be at least 2, got {0}")]
    BadUniformity(usize),
    #[error("vertex {vertex} out of range (n = {n})")]
    NoSuchVertex { vertex: u32, n: usize },
    #[error("hypergraph is not simple: edges {0} and {1} share two or more vertices")]
    NotSimple(usize, usize),
    #[error("hypergraph contains a triangle (edges {0}, {1}, {2})")]
    HasTriangle(usize, usize, usize),
    #[error("vertex {0} is uncolored")]
    Uncolored(u32),
    #[error("color {color} at vertex {vertex} is outside the palette of size {palette}")]
    ColorOutOfPalette { vertex: u32, color: u32, palette: u32 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("resample cap of {cap} reached after {resamples} resamples")]
    ResampleCapExceeded { cap: u64, resamples: u64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
