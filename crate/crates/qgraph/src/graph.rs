//! Metric-graph data model: vertices with coupling data, edges with
//! lengths, piecewise-constant potentials and optional Peierls phases.
//!
//! A graph is immutable once built. Construction validates the standing
//! assumptions the spectral machinery relies on: positive edge lengths,
//! bounded potentials, finite maximal degree, connectedness, and the
//! degree rules for boundary (exactly 1) and interior (at least 2)
//! vertices. The witnesses are collected in [`AssumptionSummary`].
//!
//! Parallel edges are representable but flagged; the vertex reduction
//! requires a simple graph, and [`Graph::normalize`] removes multi-links
//! by inserting free (zero-coupling) midpoint vertices. The same pass
//! can insert point interactions as degree-2 interior vertices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Vertex coupling family used by an analysis run: `Delta` couplings
/// keep the wavefunction continuous at interior vertices and constrain
/// the derivative sum; `DeltaPrimeS` keeps the outward derivative
/// continuous and constrains the value sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Delta,
    DeltaPrimeS,
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingKind::Delta => write!(f, "delta"),
            CouplingKind::DeltaPrimeS => write!(f, "delta_prime_s"),
        }
    }
}

/// Index of a vertex within its [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub(crate) usize);

/// Index of an edge within its [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub(crate) usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Vertex data: interior vertices carry the coupling constant of the
/// run's [`CouplingKind`]; boundary vertices carry the Robin angle ω of
/// `ψ cos ω + ψ' sin ω = 0` (ω = 0 is Dirichlet, ω = π/2 Neumann).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexKind {
    Interior { coupling: f64 },
    Boundary { omega: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, VertexKind::Boundary { .. })
    }
}

/// Potential on an edge, expressed in the edge coordinate `x ∈ [0, ℓ]`
/// with `x = 0` at the `from` endpoint. Restricted to piecewise-constant
/// functions: they stay essentially bounded, propagate exactly through
/// interval transfer matrices, and any bounded potential can be sampled
/// into this class at a chosen resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// `breakpoints` strictly increase from `0` to the edge length;
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Potential {
    /// Essential supremum of `|V|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => v.abs(),
            Potential::PiecewiseConstant { values, .. } => {
                values.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }
    }

    /// Canonical interval decomposition `(x0, x1, V)` covering `[0, length]`.
    pub fn intervals(&self, length: f64) -> Vec<(f64, f64, f64)> {
        match self {
            Potential::Zero => vec![(0.0, length, 0.0)],
            Potential::Constant(v) => vec![(0.0, length, *v)],
            Potential::PiecewiseConstant {
                breakpoints,
                values,
            } => (0..values.len())
                .map(|i| (breakpoints[i], breakpoints[i + 1], values[i]))
                .collect(),
        }
    }

    /// Value at `x` (right-continuous at breakpoints).
    pub fn value_at(&self, x: f64, length: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => *v,
            Potential::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let _ = length;
                let mut i = 0;
                while i + 1 < values.len() && x >= breakpoints[i + 1] {
                    i += 1;
                }
                values[i]
            }
        }
    }

    /// Mean of `V` over `[a, b]` (exact for piecewise-constant data).
    pub fn mean(&self, a: f64, b: f64, length: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(v) => *v,
            Potential::PiecewiseConstant { .. } => {
                let mut acc = 0.0;
                for (x0, x1, v) in self.intervals(length) {
                    let lo = x0.max(a);
                    let hi = x1.min(b);
                    if hi > lo {
                        acc += v * (hi - lo);
                    }
                }
                acc / (b - a)
            }
        }
    }

    /// Split into the potentials of `[0, x]` and `[x, length]`, each
    /// re-based to start at 0.
    pub fn split_at(&self, x: f64, length: f64) -> (Potential, Potential) {
        match self {
            Potential::Zero => (Potential::Zero, Potential::Zero),
            Potential::Constant(v) => (Potential::Constant(*v), Potential::Constant(*v)),
            Potential::PiecewiseConstant { .. } => {
                let mut left_bp = vec![0.0];
                let mut left_val = Vec::new();
                let mut right_bp = vec![0.0];
                let mut right_val = Vec::new();
                for (x0, x1, v) in self.intervals(length) {
                    if x0 < x {
                        left_val.push(v);
                        left_bp.push(x1.min(x));
                    }
                    if x1 > x {
                        right_val.push(v);
                        right_bp.push(x1.max(x) - x);
                    }
                }
                (
                    Potential::PiecewiseConstant {
                        breakpoints: left_bp,
                        values: left_val,
                    },
                    Potential::PiecewiseConstant {
                        breakpoints: right_bp,
                        values: right_val,
                    },
                )
            }
        }
    }

    fn validate(&self, edge: &str, length: f64) -> Result<(), GraphError> {
        let err = |reason: &str| GraphError::InvalidPotential {
            edge: edge.to_string(),
            reason: reason.to_string(),
        };
        match self {
            Potential::Zero => Ok(()),
            Potential::Constant(v) => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(err("non-finite value"))
                }
            }
            Potential::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.len() != values.len() + 1 || values.is_empty() {
                    return Err(err("need n+1 breakpoints for n values"));
                }
                if breakpoints[0].abs() > 1e-12 * length.max(1.0) {
                    return Err(err("first breakpoint must be 0"));
                }
                if (breakpoints[breakpoints.len() - 1] - length).abs() > 1e-12 * length.max(1.0) {
                    return Err(err("last breakpoint must equal the edge length"));
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(err("breakpoints must strictly increase"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(err("non-finite value"));
                }
                Ok(())
            }
        }
    }
}

/// Edge of the metric graph. The coordinate runs from `x = 0` at `from`
/// to `x = length` at `to`; `phase` is the Peierls phase picked up when
/// traversing `from → to` (the reverse traversal contributes `-phase`).
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    pub potential: Potential,
    pub phase: f64,
}

impl Edge {
    /// Other endpoint of the edge.
    pub fn opposite(&self, v: VertexId) -> VertexId {
        if v == self.from {
            self.to
        } else {
            self.from
        }
    }

    /// A free-standing edge for per-edge computations outside a graph
    /// (its endpoint ids are placeholders).
    pub fn standalone(length: f64, potential: Potential) -> Edge {
        Edge {
            name: "edge".to_string(),
            from: VertexId(0),
            to: VertexId(1),
            length,
            potential,
            phase: 0.0,
        }
    }
}

/// Witnesses of the standing assumptions: sup of the potential bounds,
/// extreme edge lengths and the maximal vertex degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionSummary {
    pub potential_bound: f64,
    pub min_length: f64,
    pub max_length: f64,
    pub max_degree: usize,
}

/// One incidence record of the adjacency index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub edge: EdgeId,
    pub other: VertexId,
}

/// A point interaction to be inserted by [`Graph::normalize`]: a
/// degree-2 interior vertex of the given coupling strength at position
/// `x` inside the edge.
#[derive(Debug, Clone, Copy)]
pub struct PointInteraction {
    pub edge: EdgeId,
    pub x: f64,
    pub strength: f64,
}

/// Immutable validated metric graph.
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
    interior: Vec<VertexId>,
    interior_row: Vec<Option<usize>>,
    summary: AssumptionSummary,
    coupling: CouplingKind,
    parallel_free: bool,
}

impl Graph {
    /// Build a graph from raw parts, running the full validation.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        coupling: CouplingKind,
    ) -> Result<Graph, GraphError> {
        if vertices.is_empty() || edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut names = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if names.insert(v.name.clone(), i).is_some() {
                return Err(GraphError::DuplicateName(v.name.clone()));
            }
            match v.kind {
                VertexKind::Interior { coupling } if !coupling.is_finite() => {
                    return Err(GraphError::NonFiniteCoupling {
                        vertex: v.name.clone(),
                    });
                }
                VertexKind::Boundary { omega } if !omega.is_finite() => {
                    return Err(GraphError::NonFiniteCoupling {
                        vertex: v.name.clone(),
                    });
                }
                _ => {}
            }
        }
        let mut edge_names = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if edge_names.insert(e.name.clone(), i).is_some() {
                return Err(GraphError::DuplicateName(e.name.clone()));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(GraphError::NonPositiveLength(e.name.clone()));
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop(e.name.clone()));
            }
            for v in [e.from, e.to] {
                if v.0 >= vertices.len() {
                    return Err(GraphError::DanglingEndpoint {
                        edge: e.name.clone(),
                        vertex: format!("#{}", v.0),
                    });
                }
            }
            if !e.phase.is_finite() {
                return Err(GraphError::InvalidPotential {
                    edge: e.name.clone(),
                    reason: "non-finite magnetic phase".to_string(),
                });
            }
            e.potential.validate(&e.name, e.length)?;
        }

        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.from.0].push(Incidence {
                edge: EdgeId(i),
                other: e.to,
            });
            adjacency[e.to.0].push(Incidence {
                edge: EdgeId(i),
                other: e.from,
            });
        }

        // Degree rules: boundary vertices have exactly one incident edge,
        // interior vertices at least two.
        for (i, v) in vertices.iter().enumerate() {
            let deg = adjacency[i].len();
            match v.kind {
                VertexKind::Boundary { .. } if deg != 1 => {
                    return Err(GraphError::BoundaryDegree {
                        vertex: v.name.clone(),
                        degree: deg,
                    });
                }
                VertexKind::Interior { .. } if deg < 2 => {
                    return Err(GraphError::InteriorDegree {
                        vertex: v.name.clone(),
                        degree: deg,
                    });
                }
                _ => {}
            }
        }

        // Connectivity by breadth-first search.
        let mut seen = vec![false; vertices.len()];
        let mut queue = vec![VertexId(0)];
        seen[0] = true;
        while let Some(v) = queue.pop() {
            for inc in &adjacency[v.0] {
                if !seen[inc.other.0] {
                    seen[inc.other.0] = true;
                    queue.push(inc.other);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(GraphError::Disconnected(vertices[i].name.clone()));
        }

        let mut pairs = BTreeMap::new();
        for e in &edges {
            let key = (e.from.min(e.to), e.from.max(e.to));
            *pairs.entry(key).or_insert(0usize) += 1;
        }
        let parallel_free = pairs.values().all(|&c| c == 1);

        let summary = AssumptionSummary {
            potential_bound: edges
                .iter()
                .fold(0.0, |m: f64, e| m.max(e.potential.sup_norm())),
            min_length: edges.iter().fold(f64::INFINITY, |m, e| m.min(e.length)),
            max_length: edges.iter().fold(0.0, |m: f64, e| m.max(e.length)),
            max_degree: adjacency.iter().map(Vec::len).max().unwrap_or(0),
        };

        let mut interior = Vec::new();
        let mut interior_row = vec![None; vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_boundary() {
                interior_row[i] = Some(interior.len());
                interior.push(VertexId(i));
            }
        }

        Ok(Graph {
            vertices,
            edges,
            adjacency,
            interior,
            interior_row,
            summary,
            coupling,
            parallel_free,
        })
    }

    /// Parse and build from the TOML graph description format.
    pub fn from_toml_str(text: &str) -> Result<Graph, GraphError> {
        let doc: GraphDocument =
            toml::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        doc.build()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> {
        self.vertices.iter().enumerate().map(|(i, v)| (VertexId(i), v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn adjacency(&self, v: VertexId) -> &[Incidence] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    /// Interior vertices in index order; these index the rows of the
    /// energy-dependent vertex matrix.
    pub fn interior_vertices(&self) -> &[VertexId] {
        &self.interior
    }

    /// Row of `v` in the vertex matrix, if `v` is interior.
    pub fn interior_row(&self, v: VertexId) -> Option<usize> {
        self.interior_row[v.0]
    }

    pub fn summary(&self) -> &AssumptionSummary {
        &self.summary
    }

    /// Coupling kind declared by the source document (the run default).
    pub fn coupling(&self) -> CouplingKind {
        self.coupling
    }

    /// True when no two vertices are joined by more than one edge.
    pub fn is_parallel_free(&self) -> bool {
        self.parallel_free
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|v| v.name == name)
            .map(VertexId)
    }

    /// Does any edge carry a nonzero Peierls phase?
    pub fn has_phases(&self) -> bool {
        self.edges.iter().any(|e| e.phase != 0.0)
    }

    /// Split parallel edges by free midpoint vertices and insert point
    /// interactions as degree-2 interior vertices. With empty inputs the
    /// graph is returned unchanged.
    pub fn normalize(
        &self,
        parallel_edges: &[EdgeId],
        point_interactions: &[PointInteraction],
    ) -> Result<Graph, GraphError> {
        if parallel_edges.is_empty() && point_interactions.is_empty() {
            return Ok(self.clone());
        }
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        // Map original edge index -> current list of (edge index, offset)
        // pieces so that several interactions can target the same edge.
        let mut splits: Vec<PointInteraction> = Vec::new();

        for &eid in parallel_edges {
            let e = self
                .edges
                .get(eid.0)
                .ok_or_else(|| GraphError::UnknownEdge(format!("#{}", eid.0)))?;
            let key = (e.from.min(e.to), e.from.max(e.to));
            let count = self
                .edges
                .iter()
                .filter(|f| (f.from.min(f.to), f.from.max(f.to)) == key)
                .count();
            if count < 2 {
                return Err(GraphError::NotParallel(e.name.clone()));
            }
            splits.push(PointInteraction {
                edge: eid,
                x: e.length / 2.0,
                strength: 0.0,
            });
        }
        splits.extend_from_slice(point_interactions);

        // Process splits per edge from the far end, so earlier pieces keep
        // their coordinates valid for the remaining positions.
        splits.sort_by(|a, b| a.edge.0.cmp(&b.edge.0).then(b.x.total_cmp(&a.x)));

        for (serial, s) in splits.iter().enumerate() {
            let e = edges
                .get(s.edge.0)
                .ok_or_else(|| GraphError::UnknownEdge(format!("#{}", s.edge.0)))?
                .clone();
            if !(s.x > 0.0 && s.x < e.length) {
                return Err(GraphError::SplitOutsideEdge {
                    edge: e.name.clone(),
                    x: s.x,
                    length: e.length,
                });
            }
            if !s.strength.is_finite() {
                return Err(GraphError::NonFiniteCoupling {
                    vertex: format!("{}~{}", e.name, serial),
                });
            }
            let new_vertex = VertexId(vertices.len());
            vertices.push(Vertex {
                name: format!("{}~{}", e.name, serial),
                kind: VertexKind::Interior {
                    coupling: s.strength,
                },
            });
            let (pot_left, pot_right) = e.potential.split_at(s.x, e.length);
            let frac = s.x / e.length;
            // The lower piece replaces the original edge in place so that
            // remaining splits on the same edge (at smaller x) stay valid.
            edges[s.edge.0] = Edge {
                name: format!("{}~a{}", e.name, serial),
                from: e.from,
                to: new_vertex,
                length: s.x,
                potential: pot_left,
                phase: e.phase * frac,
            };
            edges.push(Edge {
                name: format!("{}~b{}", e.name, serial),
                from: new_vertex,
                to: e.to,
                length: e.length - s.x,
                potential: pot_right,
                phase: e.phase * (1.0 - frac),
            });
        }

        Graph::new(vertices, edges, self.coupling)
    }

    /// Gauge transform: add `χ(to) − χ(from)` to every edge phase. The
    /// vertex matrix of the result is the diagonal-unitary conjugate of
    /// the original, so all secular data is preserved.
    pub fn gauge_transformed(&self, chi: &[f64]) -> Graph {
        assert_eq!(chi.len(), self.vertices.len(), "one χ per vertex");
        let mut g = self.clone();
        for e in &mut g.edges {
            e.phase += chi[e.to.0] - chi[e.from.0];
        }
        g
    }
}

// ---------------------------------------------------------------------------
// Graph description document (TOML)
// ---------------------------------------------------------------------------

/// Top-level graph description document. See `docs/graph-format.md` for
/// the schema; unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub coupling: CouplingKind,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    /// Optional per-edge Peierls phases, keyed by edge name.
    #[serde(default)]
    pub magnetic: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub name: String,
    pub kind: VertexDocKind,
    /// Coupling constant of an interior vertex (α or β per run kind).
    #[serde(default)]
    pub constant: Option<f64>,
    /// Robin angle of a boundary vertex, radians.
    #[serde(default)]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexDocKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub from: String,
    pub to: String,
    pub length: f64,
    #[serde(default)]
    pub potential: Option<PotentialDoc>,
}

/// Potential field of an edge: a bare number (constant) or a table with
/// `breakpoints`/`values` arrays (piecewise constant).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PotentialDoc {
    Constant(f64),
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl GraphDocument {
    /// Validate and build the graph.
    pub fn build(&self) -> Result<Graph, GraphError> {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let kind = match v.kind {
                VertexDocKind::Interior => {
                    if v.omega.is_some() {
                        return Err(GraphError::InvalidPotential {
                            edge: v.name.clone(),
                            reason: "interior vertex must not set `omega`".to_string(),
                        });
                    }
                    VertexKind::Interior {
                        coupling: v.constant.unwrap_or(0.0),
                    }
                }
                VertexDocKind::Boundary => {
                    if v.constant.is_some() {
                        return Err(GraphError::InvalidPotential {
                            edge: v.name.clone(),
                            reason: "boundary vertex must not set `constant`".to_string(),
                        });
                    }
                    VertexKind::Boundary {
                        omega: v.omega.unwrap_or(0.0),
                    }
                }
            };
            vertices.push(Vertex {
                name: v.name.clone(),
                kind,
            });
        }
        let find = |name: &str, edge: &str| {
            vertices
                .iter()
                .position(|v| v.name == name)
                .map(VertexId)
                .ok_or_else(|| GraphError::DanglingEndpoint {
                    edge: edge.to_string(),
                    vertex: name.to_string(),
                })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let name = e.name.clone().unwrap_or_else(|| format!("e{i}"));
            let from = find(&e.from, &name)?;
            let to = find(&e.to, &name)?;
            let potential = match &e.potential {
                None => Potential::Zero,
                Some(PotentialDoc::Constant(v)) => Potential::Constant(*v),
                Some(PotentialDoc::Piecewise {
                    breakpoints,
                    values,
                }) => Potential::PiecewiseConstant {
                    breakpoints: breakpoints.clone(),
                    values: values.clone(),
                },
            };
            let phase = self.magnetic.get(&name).copied().unwrap_or(0.0);
            edges.push(Edge {
                name,
                from,
                to,
                length: e.length,
                potential,
                phase,
            });
        }
        for name in self.magnetic.keys() {
            if !edges.iter().any(|e| &e.name == name) {
                return Err(GraphError::UnknownMagneticEdge(name.clone()));
            }
        }
        Graph::new(vertices, edges, self.coupling)
    }
}

// ---------------------------------------------------------------------------
// Programmatic builder
// ---------------------------------------------------------------------------

/// Incremental builder used by tests, presets and the model generators.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    coupling: Option<CouplingKind>,
}

impl GraphBuilder {
    pub fn new(coupling: CouplingKind) -> Self {
        GraphBuilder {
            vertices: Vec::new(),
            edges: Vec::new(),
            coupling: Some(coupling),
        }
    }

    pub fn interior(&mut self, name: impl Into<String>, coupling: f64) -> VertexId {
        let id = VertexId(self.vertices.len());
        self.vertices.push(Vertex {
            name: name.into(),
            kind: VertexKind::Interior { coupling },
        });
        id
    }

    pub fn boundary(&mut self, name: impl Into<String>, omega: f64) -> VertexId {
        let id = VertexId(self.vertices.len());
        self.vertices.push(Vertex {
            name: name.into(),
            kind: VertexKind::Boundary { omega },
        });
        id
    }

    pub fn edge(&mut self, from: VertexId, to: VertexId, length: f64) -> EdgeId {
        self.edge_full(from, to, length, Potential::Zero, 0.0)
    }

    pub fn edge_full(
        &mut self,
        from: VertexId,
        to: VertexId,
        length: f64,
        potential: Potential,
        phase: f64,
    ) -> EdgeId {
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge {
            name: format!("e{}", id.0),
            from,
            to,
            length,
            potential,
            phase,
        });
        id
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        Graph::new(
            self.vertices,
            self.edges,
            self.coupling.unwrap_or(CouplingKind::Delta),
        )
    }
}

/// Star graph: one interior hub with `arms` boundary tips.
pub fn star_graph(
    arms: usize,
    length: f64,
    alpha: f64,
    omega: f64,
    kind: CouplingKind,
) -> Graph {
    let mut b = GraphBuilder::new(kind);
    let hub = b.interior("hub", alpha);
    for i in 0..arms {
        let tip = b.boundary(format!("tip{i}"), omega);
        b.edge(hub, tip, length);
    }
    b.build().expect("star graph is valid")
}

/// Path graph `boundary – v1 – … – vn – boundary` with unit couplings
/// per interior vertex and the given per-segment lengths.
pub fn path_graph(
    lengths: &[f64],
    interior_coupling: f64,
    omega: f64,
    kind: CouplingKind,
) -> Graph {
    assert!(lengths.len() >= 2, "need at least two segments");
    let mut b = GraphBuilder::new(kind);
    let left = b.boundary("bl", omega);
    let mut prev = left;
    for (i, &len) in lengths[..lengths.len() - 1].iter().enumerate() {
        let v = b.interior(format!("v{i}"), interior_coupling);
        b.edge(prev, v, len);
        prev = v;
    }
    let right = b.boundary("br", omega);
    b.edge(prev, right, lengths[lengths.len() - 1]);
    b.build().expect("path graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_doc() -> &'static str {
        r#"
coupling = "delta"

[[vertices]]
name = "hub"
kind = "interior"
constant = 0.0

[[vertices]]
name = "a"
kind = "boundary"
omega = 0.0

[[vertices]]
name = "b"
kind = "boundary"

[[vertices]]
name = "c"
kind = "boundary"

[[edges]]
from = "hub"
to = "a"
length = 1.0

[[edges]]
from = "hub"
to = "b"
length = 1.0

[[edges]]
from = "hub"
to = "c"
length = 1.0
"#
    }

    #[test]
    fn builds_star_with_summary() {
        let g = Graph::from_toml_str(star_doc()).unwrap();
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.n_edges(), 3);
        let s = g.summary();
        assert_eq!(s.max_degree, 3);
        assert_eq!(s.min_length, 1.0);
        assert_eq!(s.max_length, 1.0);
        assert_eq!(s.potential_bound, 0.0);
        assert_eq!(g.interior_vertices().len(), 1);
        assert!(g.is_parallel_free());
    }

    #[test]
    fn rejects_boundary_of_wrong_degree() {
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v = b.interior("v", 0.0);
        let w = b.boundary("w", 0.0);
        let u = b.boundary("u", 0.0);
        b.edge(v, w, 1.0);
        b.edge(v, u, 1.0);
        b.edge(w, u, 1.0); // w now has degree 2
        match b.build() {
            Err(GraphError::BoundaryDegree { degree: 2, .. }) => {}
            other => panic!("expected boundary-degree error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_structural_defects() {
        // self-loop
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v = b.interior("v", 0.0);
        let w = b.boundary("w", 0.0);
        b.edge(v, v, 1.0);
        b.edge(v, w, 1.0);
        assert!(matches!(b.build(), Err(GraphError::SelfLoop(_))));

        // non-positive length
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v = b.interior("v", 0.0);
        let w = b.boundary("w", 0.0);
        let u = b.boundary("u", 0.0);
        b.edge(v, w, 0.0);
        b.edge(v, u, 1.0);
        assert!(matches!(b.build(), Err(GraphError::NonPositiveLength(_))));

        // duplicate vertex name
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v = b.boundary("x", 0.0);
        let w = b.boundary("x", 0.0);
        b.edge(v, w, 1.0);
        assert!(matches!(b.build(), Err(GraphError::DuplicateName(_))));

        // disconnected
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let a = b.boundary("a", 0.0);
        let b2 = b.boundary("b", 0.0);
        let c = b.boundary("c", 0.0);
        let d = b.boundary("d", 0.0);
        b.edge(a, b2, 1.0);
        b.edge(c, d, 1.0);
        assert!(matches!(b.build(), Err(GraphError::Disconnected(_))));
    }

    #[test]
    fn rejects_unknown_document_keys() {
        let doc = r#"
coupling = "delta"
grid = 4
[[vertices]]
name = "a"
kind = "boundary"
[[vertices]]
name = "b"
kind = "boundary"
[[edges]]
from = "a"
to = "b"
length = 1.0
"#;
        assert!(Graph::from_toml_str(doc).is_err());
    }

    #[test]
    fn rectangular_patch_summary() {
        // 2×2 block of a rectangular lattice with boundary stubs, ℓ1 = 1
        // horizontal, ℓ2 = 0.5 vertical.
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let mut core = Vec::new();
        for n in 0..2 {
            for m in 0..2 {
                core.push(b.interior(format!("v{n}{m}"), 0.0));
            }
        }
        b.edge(core[0], core[1], 0.5); // (0,0)-(0,1) vertical
        b.edge(core[2], core[3], 0.5);
        b.edge(core[0], core[2], 1.0); // horizontal
        b.edge(core[1], core[3], 1.0);
        for (i, &v) in core.iter().enumerate() {
            let t1 = b.boundary(format!("s{i}a"), 0.0);
            let t2 = b.boundary(format!("s{i}b"), 0.0);
            b.edge(v, t1, 1.0);
            b.edge(v, t2, 0.5);
        }
        let g = b.build().unwrap();
        let s = g.summary();
        assert_eq!(s.min_length, 0.5);
        assert_eq!(s.max_length, 1.0);
        assert_eq!(s.max_degree, 4);
        // Degree-sum identity.
        let total: usize = g.vertices().map(|(v, _)| g.degree(v)).sum();
        assert_eq!(total, 2 * g.n_edges());
    }

    #[test]
    fn normalize_splits_parallel_edges() {
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v1 = b.interior("v1", 1.0);
        let v2 = b.interior("v2", -1.0);
        let e1 = b.edge(v1, v2, 2.0);
        let e2 = b.edge(v1, v2, 2.0);
        let g = b.build().unwrap();
        assert!(!g.is_parallel_free());

        let n = g.normalize(&[e1, e2], &[]).unwrap();
        assert!(n.is_parallel_free());
        assert_eq!(n.n_edges(), 4);
        assert_eq!(n.n_vertices(), 4);
        for (_, e) in n.edges() {
            assert!((e.length - 1.0).abs() < 1e-15);
        }
        let added: Vec<_> = n
            .vertices()
            .filter(|(_, v)| v.name.contains('~'))
            .collect();
        assert_eq!(added.len(), 2);
        for (_, v) in added {
            assert_eq!(v.kind, VertexKind::Interior { coupling: 0.0 });
        }
    }

    #[test]
    fn normalize_inserts_point_interaction() {
        let mut b = GraphBuilder::new(CouplingKind::Delta);
        let v = b.interior("v", 0.0);
        let w = b.boundary("w", 0.0);
        let u = b.boundary("u", 0.0);
        let e = b.edge_full(v, w, 1.0, Potential::Constant(2.0), 0.0);
        b.edge(v, u, 1.0);
        let g = b.build().unwrap();

        let n = g
            .normalize(
                &[],
                &[PointInteraction {
                    edge: e,
                    x: 0.3,
                    strength: 5.0,
                }],
            )
            .unwrap();
        assert_eq!(n.n_edges(), 3);
        let lengths: Vec<f64> = n
            .edges()
            .filter(|(_, e)| e.name.contains('~'))
            .map(|(_, e)| e.length)
            .collect();
        assert_eq!(lengths.len(), 2);
        assert!((lengths[0] - 0.3).abs() < 1e-15 || (lengths[0] - 0.7).abs() < 1e-15);
        for (_, e) in n.edges().filter(|(_, e)| e.name.contains('~')) {
            assert_eq!(e.potential, Potential::Constant(2.0));
        }
        let (_, nv) = n
            .vertices()
            .find(|(_, v)| v.name.contains('~'))
            .expect("inserted vertex");
        assert_eq!(nv.kind, VertexKind::Interior { coupling: 5.0 });
    }

    #[test]
    fn normalize_with_empty_lists_is_identity() {
        let g = Graph::from_toml_str(star_doc()).unwrap();
        let n = g.normalize(&[], &[]).unwrap();
        assert_eq!(n.n_vertices(), g.n_vertices());
        assert_eq!(n.n_edges(), g.n_edges());
        assert_eq!(n.summary(), g.summary());
        for ((_, a), (_, b)) in n.edges().zip(g.edges()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn normalize_rejects_split_at_endpoint() {
        let g = Graph::from_toml_str(star_doc()).unwrap();
        let e = g.edge_by_name("e0").unwrap();
        let r = g.normalize(
            &[],
            &[PointInteraction {
                edge: e,
                x: 1.0,
                strength: 1.0,
            }],
        );
        assert!(matches!(r, Err(GraphError::SplitOutsideEdge { .. })));
    }

    #[test]
    fn piecewise_potential_split_rebases_coordinates() {
        let p = Potential::PiecewiseConstant {
            breakpoints: vec![0.0, 0.5, 1.0],
            values: vec![4.0, 0.0],
        };
        let (l, r) = p.split_at(0.3, 1.0);
        assert_eq!(
            l,
            Potential::PiecewiseConstant {
                breakpoints: vec![0.0, 0.3],
                values: vec![4.0],
            }
        );
        assert_eq!(
            r,
            Potential::PiecewiseConstant {
                breakpoints: vec![0.0, 0.2, 0.7],
                values: vec![4.0, 0.0],
            }
        );
    }

    #[test]
    fn magnetic_section_sets_phases() {
        let doc = r#"
coupling = "delta"
[[vertices]]
name = "a"
kind = "interior"
[[vertices]]
name = "b"
kind = "interior"
[[vertices]]
name = "c"
kind = "interior"
[[edges]]
name = "ab"
from = "a"
to = "b"
length = 1.0
[[edges]]
name = "bc"
from = "b"
to = "c"
length = 1.0
[[edges]]
name = "ca"
from = "c"
to = "a"
length = 1.0
[magnetic]
ab = 0.7
"#;
        let g = Graph::from_toml_str(doc).unwrap();
        let e = g.edge_by_name("ab").unwrap();
        assert_eq!(g.edge(e).phase, 0.7);
        assert!(g.has_phases());
    }
}
