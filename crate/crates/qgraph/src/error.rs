//! Error types shared across the crate.

use thiserror::Error;

/// Failures while building, parsing or normalising a metric graph.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("document parse error: {0}")]
    Parse(String),
    #[error("duplicate vertex or edge name `{0}`")]
    DuplicateName(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("edge `{0}` has non-positive length")]
    NonPositiveLength(String),
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("boundary vertex `{vertex}` has degree {degree} (must be 1)")]
    BoundaryDegree { vertex: String, degree: usize },
    #[error("interior vertex `{vertex}` has degree {degree} (must be ≥ 2)")]
    InteriorDegree { vertex: String, degree: usize },
    #[error("graph is not connected (vertex `{0}` unreachable)")]
    Disconnected(String),
    #[error("vertex `{vertex}` has a non-finite coupling value")]
    NonFiniteCoupling { vertex: String },
    #[error("edge `{edge}`: invalid potential: {reason}")]
    InvalidPotential { edge: String, reason: String },
    #[error("magnetic phase given for unknown edge `{0}`")]
    UnknownMagneticEdge(String),
    #[error("graph has no vertices or no edges")]
    Empty,
    #[error("split position {x} is not strictly inside edge `{edge}` of length {length}")]
    SplitOutsideEdge { edge: String, x: f64, length: f64 },
    #[error("edge `{0}` listed for parallel-edge normalisation is not a multi-link")]
    NotParallel(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
}

/// Failures of the spectral machinery.
#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("energy {energy} is exceptional for edge `{edge}` (Wronskian ≈ 0)")]
    ExceptionalEnergy { edge: String, energy: f64 },
    #[error("graph has parallel edges; normalise it before the vertex reduction")]
    ParallelEdges,
    #[error("graph has no interior vertices; the vertex reduction is empty")]
    NoInteriorVertices,
    #[error("coupling `{0}` is not supported by this solver")]
    UnsupportedCoupling(String),
    #[error("invalid solver parameter: {0}")]
    BadParameter(String),
    #[error("requested energy range is empty after removing exclusion windows")]
    EmptySearchRange,
    #[error("exceptional wavenumber: {0}")]
    ExceptionalWavenumber(String),
    #[error("flux must be a rational multiple 2π·p/q of the flux quantum with q ≤ {max}, got {given}")]
    IrrationalFlux { given: String, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
