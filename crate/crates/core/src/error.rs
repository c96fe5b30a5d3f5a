use thiserror::Error;

/// Errors raised by graph construction, spectral routines and the basis solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vertex index {index} out of range for graph with {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: usize, dst: usize },

    #[error("invalid edge weight {weight} on {src} -> {dst}: weights must be finite and non-negative")]
    InvalidWeight { src: usize, dst: usize, weight: f64 },

    #[error("graph is not weakly connected")]
    NotWeaklyConnected,

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("stationary distribution did not converge within {0} iterations")]
    PowerIterationDiverged(usize),

    #[error("no coordinate for vertex `{0}`")]
    MissingCoordinate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigendecomposition failed to converge")]
    ConvergenceFailure,

    #[error("graph is not a dipath, directed cycle or unidirectional bipartite graph")]
    UnrecognizedFamily,

    #[error("element {value} outside [0, {ceiling}]")]
    ElementOutOfRange { value: f64, ceiling: f64 },

    #[error("signal entry {0} is zero, its phase is undefined")]
    ZeroEntryPhaseUndefined(usize),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("Cayley system is singular")]
    SingularSystem,

    #[error("line search found no Armijo step")]
    LineSearchFailed,

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),

    #[error("underlying undirected graph is disconnected (repeated zero Laplacian eigenvalue)")]
    DisconnectedGraph,

    #[error("{pairs} candidate pairs exceed the exhaustive limit of {limit}")]
    TooManyPairs { pairs: usize, limit: usize },

    #[error("selection does not match the eigendecomposition: {0}")]
    InconsistentSelection(String),

    #[error("signal has zero energy")]
    ZeroSignal,

    #[error("columns are not orthonormal (||U^T U - I||_F = {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input data.
    Input,
    /// Input is well-formed but violates an operation's precondition.
    Precondition,
    /// A numerical routine failed.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Parse { .. } | SelfLoop(_) | DuplicateEdge { .. } | InvalidWeight { .. }
            | VertexOutOfRange { .. } | MissingCoordinate(_) => ErrorClass::Input,
            PowerIterationDiverged(_) | ConvergenceFailure | SingularSystem | LineSearchFailed
            | AllRestartsFailed(_) | NotOrthonormal(_) => ErrorClass::Numerical,
            _ => ErrorClass::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
