//! Spectral analysis of Schrödinger operators on metric graphs.
//!
//! A metric graph carries a one-dimensional Schrödinger operator
//! `-ψ'' + Vψ` on every edge, glued at the vertices by δ or δ′_s
//! couplings and Robin conditions at the boundary. For energies away
//! from a discrete exceptional set, the eigenvalue problem reduces to
//! a finite energy-dependent Jacobi-type matrix `M(E)` indexed by the
//! interior vertices: `E` is an eigenvalue of the graph operator
//! exactly when `M(E)` is singular, and eigenfunctions are recovered
//! edge by edge from the kernel vectors.
//!
//! The crate provides
//!
//! * [`graph`]: the metric-graph data model, validation and the
//!   normalisations that remove parallel edges and insert point
//!   interactions;
//! * [`edge`]: per-edge solution bases, transfer matrices, Wronskians
//!   and the exceptional-energy scan;
//! * [`dual`]: assembly of `M(E)`, wavefunction reconstruction and
//!   residual/norm diagnostics;
//! * [`spectral`]: the secular solver (inertia scan plus bisection)
//!   and band tests for rectangular lattices, with and without flux;
//! * [`models`]: closed-form rows for rectangular-lattice and
//!   comb-shaped models (Harper and Maryland-type operators);
//! * [`oracle`]: duality-free reference solvers (finite differences
//!   and direct vertex-condition matching) and spectrum comparison.
//!
//! ```
//! use qgraph::graph::{star_graph, CouplingKind};
//! use qgraph::spectral::{spectrum, SpectrumOptions};
//!
//! // Three unit arms with Dirichlet tips and a free central vertex:
//! // the lowest eigenvalue is (π/2)².
//! let g = star_graph(3, 1.0, 0.0, 0.0, CouplingKind::Delta);
//! let res = spectrum(&g, CouplingKind::Delta, &SpectrumOptions::new(0.0, 10.0)).unwrap();
//! let lowest = res.roots[0].energy;
//! assert!((lowest - std::f64::consts::FRAC_PI_2.powi(2)).abs() < 1e-9);
//! ```

#![forbid(unsafe_code)]
// Negated float comparisons like `!(x > 0.0)` are parameter guards that
// deliberately treat NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod edge;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod special;
pub mod spectral;

pub use error::{GraphError, SolveError};
pub use graph::{CouplingKind, Graph, GraphDocument, Potential};
