use std::io;

use crate::eval::SimilarityReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph has {components} connected components")]
    DisconnectedGraph { components: usize },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is not connected")]
    NotConnected,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node {node} out of range for graph with {n} nodes")]
    OutOfRange { node: usize, n: usize },

    #[error("endpoints coincide at node {0}")]
    SameNode(usize),

    #[error("edge weight {0} is not strictly positive")]
    NonPositiveWeight(f64),

    #[error("krylov subspace degenerated to {kept} vectors")]
    DegenerateSubspace { kept: usize },

    #[error("dense operation on {n} nodes exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("embedder built for {embedder} nodes, graph has {graph}")]
    EmbedderMismatch { embedder: usize, graph: usize },

    #[error("graphs have different node counts: {0} vs {1}")]
    NodeSetMismatch(usize, usize),

    #[error("invalid eigen-subspace size k={k} for n={n}")]
    BadK { k: usize, n: usize },

    #[error("target condition number {0} must be at least 2")]
    InvalidTarget(f64),

    #[error("target density {target} is below spanning-tree density {min}")]
    DensityTooLow { target: f64, min: f64 },

    #[error("only {available} candidate edges available, {requested} requested")]
    NotEnoughCandidates { available: usize, requested: usize },

    #[error("setup artifact version mismatch: {0}")]
    VersionMismatch(String),

    #[error("setup artifact checksum failure in section {0}")]
    ChecksumFailure(String),

    #[error("iterative eigensolver did not converge (best kappa {:.4})", .0.kappa)]
    NoConvergence(Box<SimilarityReport>),

    #[error("laplacian solve failed: {0}")]
    SolverFailure(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
