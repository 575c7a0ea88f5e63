//! Closed-form dual rows for the rectangular-lattice and comb model
//! families, finite truncation windows, and explicit-graph generators
//! that mirror them.
//!
//! These rows are the scaled vertex-matrix rows of the periodic models.
//! For a lattice vertex with uniform data the generic row of
//! [`crate::dual::assemble_dual`], multiplied by `−sin kℓ1 sin kℓ2 / k`
//! (δ) or `−k sin kℓ1 sin kℓ2` (δ′_s), equals
//!
//! ```text
//! (φ_{n,m+1} + φ_{n,m−1}) sin kℓ1 + (φ_{n+1,m} + φ_{n−1,m}) sin kℓ2
//!   + (V(k) ∓ 2 sin k(ℓ1+ℓ2)) φ_{nm} = 0,
//! V(k) = −(α/k) sin kℓ1 sin kℓ2   or   −βk sin kℓ1 sin kℓ2,
//! ```
//!
//! and the comb row, scaled by `−sin kL/k` (δ) or `−k sin kL` (δ′_s), is
//!
//! ```text
//! φ_{j+1} + φ_{j−1} + (V_j(k) ∓ 2 cos kL) φ_j = 0,
//! V_j(k) = −(v'_j(ℓ_j)/v_j(ℓ_j) + α_j)·sin(kL)/k   (δ)
//!        = −(v_j(ℓ_j)/v'_j(ℓ_j) + β_j)·k·sin(kL)   (δ′_s)
//! ```
//!
//! with `v_j` the tooth solution obeying the Robin condition at the
//! tip. For a potential-free tooth `v'_j/v_j = k·cot(kℓ_j − η_j)` with
//! `η_j = arctan(k tan ω_j)`, giving the Maryland-type diagonal for the
//! `ℓ_j = |j|ℓ` rule.
//!
//! Magnetic hops carry Peierls phases with flux `Φ` per unit cell: the
//! product of hop phases around a cell, traversed counterclockwise, is
//! `e^{iΦ}` in both supported gauges, which keeps every finite window
//! Hermitian and reduces to the Harper form for `ℓ1 = ℓ2` at zero
//! coupling.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::edge::{directed_coupling, edge_basis, FarVertex};
use crate::error::SolveError;
use crate::graph::{
    CouplingKind, Edge, Graph, GraphBuilder, Potential, VertexId,
};
use crate::linalg::HermMatrix;

/// Coupling constants over lattice sites: uniform or a per-site rule.
#[derive(Clone)]
pub enum SiteCoupling {
    Uniform(f64),
    PerSite(Arc<dyn Fn(i64, i64) -> f64 + Send + Sync>),
}

impl SiteCoupling {
    pub fn at(&self, n: i64, m: i64) -> f64 {
        match self {
            SiteCoupling::Uniform(a) => *a,
            SiteCoupling::PerSite(f) => f(n, m),
        }
    }
}

impl fmt::Debug for SiteCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteCoupling::Uniform(a) => write!(f, "Uniform({a})"),
            SiteCoupling::PerSite(_) => write!(f, "PerSite(..)"),
        }
    }
}

/// Magnetic gauge of the stored hop phases. Both give flux `Φ` per
/// cell; finite windows of the two are related by a diagonal unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// Symmetric gauge: half-integer phases on both hop families.
    Circular,
    /// Phases `e^{±iΦm}` on the east/west family only.
    Landau,
}

/// Rectangular lattice: sites `(n, m)` at `(n·ℓ1, m·ℓ2)`, so east/west
/// hops traverse edges of length ℓ1 (row coefficient `sin kℓ2`) and
/// north/south hops edges of length ℓ2 (coefficient `sin kℓ1`).
#[derive(Debug, Clone)]
pub struct RectLatticeParams {
    pub l1: f64,
    pub l2: f64,
    pub coupling: SiteCoupling,
    pub kind: CouplingKind,
    /// Flux per unit cell.
    pub flux: f64,
    pub gauge: Gauge,
}

/// One closed-form lattice row: matrix elements toward the four
/// neighbours plus the diagonal.
#[derive(Debug, Clone, Copy)]
pub struct RectRow {
    /// Element toward `(n+1, m)`.
    pub east: Complex64,
    /// Element toward `(n−1, m)`.
    pub west: Complex64,
    /// Element toward `(n, m+1)`.
    pub north: Complex64,
    /// Element toward `(n, m−1)`.
    pub south: Complex64,
    pub diagonal: Complex64,
}

/// Closed-form row of the (possibly magnetic) rectangular lattice at
/// site `(n, m)` and wavenumber `k > 0`.
pub fn rect_row(p: &RectLatticeParams, n: i64, m: i64, k: f64) -> Result<RectRow, SolveError> {
    if !(k > 0.0) {
        return Err(SolveError::BadParameter("wavenumber must be positive".into()));
    }
    let s1 = (k * p.l1).sin();
    let s2 = (k * p.l2).sin();
    if s1.abs() < 1e-14 || s2.abs() < 1e-14 {
        return Err(SolveError::ExceptionalWavenumber(format!(
            "sin kℓ vanishes at k = {k}"
        )));
    }
    let alpha = p.coupling.at(n, m);
    let v = match p.kind {
        CouplingKind::Delta => -(alpha / k) * s1 * s2,
        CouplingKind::DeltaPrimeS => -alpha * k * s1 * s2,
    };
    let diag = match p.kind {
        CouplingKind::Delta => v - 2.0 * (k * (p.l1 + p.l2)).sin(),
        CouplingKind::DeltaPrimeS => v + 2.0 * (k * (p.l1 + p.l2)).sin(),
    };
    let (te, tn) = match p.gauge {
        // Phases of the matrix element toward the respective neighbour;
        // the opposite hops carry the conjugates.
        Gauge::Circular => (0.5 * p.flux * m as f64, -0.5 * p.flux * n as f64),
        Gauge::Landau => (p.flux * m as f64, 0.0),
    };
    Ok(RectRow {
        east: Complex64::from_polar(s2, te),
        west: Complex64::from_polar(s2, -te),
        north: Complex64::from_polar(s1, tn),
        south: Complex64::from_polar(s1, -tn),
        diagonal: Complex64::new(diag, 0.0),
    })
}

/// Tooth-length rule of a comb model; a zero length means no tooth at
/// that site (the bare line vertex keeps only its coupling term).
#[derive(Debug, Clone)]
pub enum ToothLengths {
    Uniform(f64),
    Explicit { offset: i64, lengths: Vec<f64> },
    /// `ℓ_j = |j|·unit`; with Dirichlet tips and ideal coupling this is
    /// the Maryland-type model.
    Maryland { unit: f64 },
}

impl ToothLengths {
    pub fn at(&self, j: i64) -> f64 {
        match self {
            ToothLengths::Uniform(l) => *l,
            ToothLengths::Explicit { offset, lengths } => {
                let idx = j - offset;
                if idx >= 0 && (idx as usize) < lengths.len() {
                    lengths[idx as usize]
                } else {
                    0.0
                }
            }
            ToothLengths::Maryland { unit } => j.unsigned_abs() as f64 * unit,
        }
    }
}

/// Comb model: a line of vertices at spacing `L` with a tooth of length
/// `ℓ_j` attached at site `j`, Robin angle `omega` at the tips.
#[derive(Debug, Clone)]
pub struct CombParams {
    pub spacing: f64,
    pub kind: CouplingKind,
    /// Coupling constant of every line vertex.
    pub line_coupling: f64,
    /// Robin angle at the tooth tips.
    pub omega: f64,
    pub teeth: ToothLengths,
    /// Potential on each tooth, in the coordinate starting at the line.
    pub tooth_potential: Potential,
}

/// One comb row: unit couplings to the line neighbours and the
/// energy-dependent diagonal.
#[derive(Debug, Clone, Copy)]
pub struct CombRow {
    pub left: f64,
    pub right: f64,
    pub diagonal: f64,
}

/// The tooth contribution `v'(ℓ)/v(ℓ)` (δ) or `v(ℓ)/v'(ℓ)` (δ′_s) via
/// the per-edge solver; errors at a tooth-exceptional wavenumber.
fn tooth_ratio(p: &CombParams, length: f64, k: f64) -> Result<f64, SolveError> {
    let tooth = Edge {
        name: "tooth".to_string(),
        from: VertexId(0),
        to: VertexId(1),
        length,
        potential: p.tooth_potential.clone(),
        phase: 0.0,
    };
    // Tip at x = 0 of the directed view: reverse the stored basis.
    let basis = edge_basis(&tooth, k * k).reversed();
    let d = directed_coupling(&basis, p.kind, FarVertex::Boundary { omega: p.omega });
    let scale = d.v_l.abs().max(d.vp_l.abs()).max(1e-300);
    match p.kind {
        CouplingKind::Delta => {
            if d.v_l.abs() <= 1e-14 * scale {
                Err(SolveError::ExceptionalWavenumber(format!(
                    "tooth of length {length} has v(ℓ) = 0 at k = {k}"
                )))
            } else {
                Ok(d.vp_l / d.v_l)
            }
        }
        CouplingKind::DeltaPrimeS => {
            if d.vp_l.abs() <= 1e-14 * scale {
                Err(SolveError::ExceptionalWavenumber(format!(
                    "tooth of length {length} has v'(ℓ) = 0 at k = {k}"
                )))
            } else {
                Ok(d.v_l / d.vp_l)
            }
        }
    }
}

/// Energy-dependent comb potential `V_j(k)`.
pub fn comb_potential(p: &CombParams, j: i64, k: f64) -> Result<f64, SolveError> {
    if !(k > 0.0) {
        return Err(SolveError::BadParameter("wavenumber must be positive".into()));
    }
    let sl = (k * p.spacing).sin();
    let length = p.teeth.at(j);
    Ok(match p.kind {
        CouplingKind::Delta => {
            let ratio = if length > 0.0 {
                tooth_ratio(p, length, k)?
            } else {
                0.0
            };
            -(ratio + p.line_coupling) * sl / k
        }
        CouplingKind::DeltaPrimeS => {
            let ratio = if length > 0.0 {
                tooth_ratio(p, length, k)?
            } else {
                0.0
            };
            -(ratio + p.line_coupling) * k * sl
        }
    })
}

/// Potential-free closed form: `V_j = −(cot(kℓ_j − η_j) + α_j/k) sin kL`
/// for δ and `−(tan(kℓ_j − η_j) + β_j k) sin kL` for δ′_s, with
/// `η_j = arctan(k tan ω_j)`; reduces to `cot(kℓ)` at Dirichlet tips and
/// `−tan(kℓ)` at Neumann tips.
pub fn comb_potential_closed_form(p: &CombParams, j: i64, k: f64) -> f64 {
    let sl = (k * p.spacing).sin();
    let length = p.teeth.at(j);
    let eta = (k * p.omega.tan()).atan();
    match p.kind {
        CouplingKind::Delta => {
            let cot = if length > 0.0 {
                let t = (k * length - eta).tan();
                1.0 / t
            } else {
                0.0
            };
            -(cot + p.line_coupling / k) * sl
        }
        CouplingKind::DeltaPrimeS => {
            let tan = if length > 0.0 {
                (k * length - eta).tan()
            } else {
                0.0
            };
            -(tan + p.line_coupling * k) * sl
        }
    }
}

/// Closed-form comb row at site `j`.
pub fn comb_row(p: &CombParams, j: i64, k: f64) -> Result<CombRow, SolveError> {
    let v = comb_potential(p, j, k)?;
    let cl = 2.0 * (k * p.spacing).cos();
    let diagonal = match p.kind {
        CouplingKind::Delta => v - cl,
        CouplingKind::DeltaPrimeS => v + cl,
    };
    Ok(CombRow {
        left: 1.0,
        right: 1.0,
        diagonal,
    })
}

// ---------------------------------------------------------------------------
// Finite windows
// ---------------------------------------------------------------------------

/// Inclusive site ranges of a finite lattice window.
#[derive(Debug, Clone, Copy)]
pub struct RectWindow {
    pub n_min: i64,
    pub n_max: i64,
    pub m_min: i64,
    pub m_max: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct CombWindow {
    pub j_min: i64,
    pub j_max: i64,
}

/// A model together with a finite truncation window.
#[derive(Debug, Clone)]
pub enum WindowModel {
    Rect(RectLatticeParams, RectWindow),
    Comb(CombParams, CombWindow),
}

/// Matrix of the model over the window with hops leaving the window
/// dropped (open truncation); Hermitian by construction, real-symmetric
/// at zero flux. Truncation spectra only approximate the infinite
/// operator.
pub fn finite_window_matrix(model: &WindowModel, k: f64) -> Result<HermMatrix, SolveError> {
    match model {
        WindowModel::Rect(p, w) => {
            if w.n_max < w.n_min || w.m_max < w.m_min {
                return Err(SolveError::BadParameter("empty window".into()));
            }
            let nn = (w.n_max - w.n_min + 1) as usize;
            let nm = (w.m_max - w.m_min + 1) as usize;
            let idx = |n: i64, m: i64| -> Option<usize> {
                if n < w.n_min || n > w.n_max || m < w.m_min || m > w.m_max {
                    None
                } else {
                    Some(((n - w.n_min) as usize) * nm + (m - w.m_min) as usize)
                }
            };
            let dim = nn * nm;
            let mut h = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
            for n in w.n_min..=w.n_max {
                for m in w.m_min..=w.m_max {
                    let row = rect_row(p, n, m, k)?;
                    let r = idx(n, m).expect("in window");
                    h[(r, r)] = row.diagonal;
                    if let Some(c) = idx(n + 1, m) {
                        h[(r, c)] = row.east;
                    }
                    if let Some(c) = idx(n - 1, m) {
                        h[(r, c)] = row.west;
                    }
                    if let Some(c) = idx(n, m + 1) {
                        h[(r, c)] = row.north;
                    }
                    if let Some(c) = idx(n, m - 1) {
                        h[(r, c)] = row.south;
                    }
                }
            }
            if p.flux == 0.0 {
                Ok(HermMatrix::Real(h.map(|z| z.re)))
            } else {
                Ok(HermMatrix::Complex(h))
            }
        }
        WindowModel::Comb(p, w) => {
            if w.j_max < w.j_min {
                return Err(SolveError::BadParameter("empty window".into()));
            }
            let dim = (w.j_max - w.j_min + 1) as usize;
            let mut h = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            for j in w.j_min..=w.j_max {
                let row = comb_row(p, j, k)?;
                let r = (j - w.j_min) as usize;
                h[(r, r)] = row.diagonal;
                if j < w.j_max {
                    h[(r, r + 1)] = row.right;
                }
                if j > w.j_min {
                    h[(r, r - 1)] = row.left;
                }
            }
            Ok(HermMatrix::Real(h))
        }
    }
}

/// Row scalar relating generic assembly to the closed-form rows:
/// multiplying a generic interior lattice row by this factor yields the
/// [`rect_row`] coefficients (and the comb analogue with `l2 = spacing`
/// omitted; see [`comb_row_scalar`]).
pub fn rect_row_scalar(p: &RectLatticeParams, k: f64) -> f64 {
    let s1 = (k * p.l1).sin();
    let s2 = (k * p.l2).sin();
    match p.kind {
        CouplingKind::Delta => -s1 * s2 / k,
        CouplingKind::DeltaPrimeS => -k * s1 * s2,
    }
}

pub fn comb_row_scalar(p: &CombParams, k: f64) -> f64 {
    let sl = (k * p.spacing).sin();
    match p.kind {
        CouplingKind::Delta => -sl / k,
        CouplingKind::DeltaPrimeS => -k * sl,
    }
}

// ---------------------------------------------------------------------------
// Explicit graphs mirroring the windows
// ---------------------------------------------------------------------------

/// Rim-stub Robin angle that reproduces the dropped-hop truncation: the
/// decoupled edge condition is Dirichlet for δ and Neumann for δ′_s.
fn stub_omega(kind: CouplingKind) -> f64 {
    match kind {
        CouplingKind::Delta => 0.0,
        CouplingKind::DeltaPrimeS => std::f64::consts::FRAC_PI_2,
    }
}

/// Explicit metric graph of a lattice window: interior vertices at the
/// window sites, full-length edges between neighbours, and rim stubs
/// ending in boundary vertices so that every site keeps its four
/// diagonal contributions. Its vertex matrix equals the window matrix
/// divided by [`rect_row_scalar`].
pub fn rect_patch_graph(p: &RectLatticeParams, w: &RectWindow) -> Graph {
    let mut b = GraphBuilder::new(p.kind);
    let nm = (w.m_max - w.m_min + 1) as usize;
    let mut sites = Vec::new();
    for n in w.n_min..=w.n_max {
        for m in w.m_min..=w.m_max {
            sites.push(b.interior(format!("s{n}_{m}"), p.coupling.at(n, m)));
        }
    }
    let idx = |n: i64, m: i64| -> Option<usize> {
        if n < w.n_min || n > w.n_max || m < w.m_min || m > w.m_max {
            None
        } else {
            Some(((n - w.n_min) as usize) * nm + (m - w.m_min) as usize)
        }
    };
    let omega = stub_omega(p.kind);
    let (he, hn) = match p.gauge {
        Gauge::Circular => (-0.5 * p.flux, 0.5 * p.flux),
        Gauge::Landau => (-p.flux, 0.0),
    };
    for n in w.n_min..=w.n_max {
        for m in w.m_min..=w.m_max {
            let here = sites[idx(n, m).expect("in window")];
            // Horizontal edge east (length ℓ1), phase ∫ A = he·m.
            match idx(n + 1, m) {
                Some(other) => {
                    b.edge_full(here, sites[other], p.l1, Potential::Zero, he * m as f64);
                }
                None => {
                    let t = b.boundary(format!("re{n}_{m}"), omega);
                    b.edge(here, t, p.l1);
                }
            }
            if idx(n - 1, m).is_none() {
                let t = b.boundary(format!("rw{n}_{m}"), omega);
                b.edge(here, t, p.l1);
            }
            // Vertical edge north (length ℓ2), phase hn·n.
            match idx(n, m + 1) {
                Some(other) => {
                    b.edge_full(here, sites[other], p.l2, Potential::Zero, hn * n as f64);
                }
                None => {
                    let t = b.boundary(format!("rn{n}_{m}"), omega);
                    b.edge(here, t, p.l2);
                }
            }
            if idx(n, m - 1).is_none() {
                let t = b.boundary(format!("rs{n}_{m}"), omega);
                b.edge(here, t, p.l2);
            }
        }
    }
    b.build().expect("lattice window graph is valid")
}

/// Explicit comb graph of a window: line vertices with spacing edges,
/// tooth edges to Robin tips, and rim stubs matching the truncation.
pub fn comb_graph(p: &CombParams, w: &CombWindow) -> Graph {
    let mut b = GraphBuilder::new(p.kind);
    let mut line = Vec::new();
    for j in w.j_min..=w.j_max {
        line.push(b.interior(format!("j{j}"), p.line_coupling));
    }
    for (i, j) in (w.j_min..=w.j_max).enumerate() {
        if j < w.j_max {
            b.edge(line[i], line[i + 1], p.spacing);
        }
        let lj = p.teeth.at(j);
        if lj > 0.0 {
            let tip = b.boundary(format!("t{j}"), p.omega);
            b.edge_full(line[i], tip, lj, p.tooth_potential.clone(), 0.0);
        }
    }
    let omega = stub_omega(p.kind);
    let left = b.boundary("rimL", omega);
    b.edge(line[0], left, p.spacing);
    let right = b.boundary("rimR", omega);
    b.edge(line[line.len() - 1], right, p.spacing);
    b.build().expect("comb window graph is valid")
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// A named model preset selectable from the command line.
#[derive(Debug, Clone)]
pub enum Preset {
    Rect(RectLatticeParams),
    Comb(CombParams),
}

/// Presets: `square`, `rect`, `magnetic-rect`, `comb`, `maryland`.
pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "square" => Some(Preset::Rect(RectLatticeParams {
            l1: 1.0,
            l2: 1.0,
            coupling: SiteCoupling::Uniform(0.0),
            kind: CouplingKind::Delta,
            flux: 0.0,
            gauge: Gauge::Circular,
        })),
        "rect" => Some(Preset::Rect(RectLatticeParams {
            l1: 1.0,
            l2: 0.5,
            coupling: SiteCoupling::Uniform(0.0),
            kind: CouplingKind::Delta,
            flux: 0.0,
            gauge: Gauge::Circular,
        })),
        "magnetic-rect" => Some(Preset::Rect(RectLatticeParams {
            l1: 1.0,
            l2: 1.0,
            coupling: SiteCoupling::Uniform(0.0),
            kind: CouplingKind::Delta,
            flux: std::f64::consts::PI,
            gauge: Gauge::Circular,
        })),
        "comb" => Some(Preset::Comb(CombParams {
            spacing: 1.0,
            kind: CouplingKind::Delta,
            line_coupling: 0.0,
            omega: 0.0,
            teeth: ToothLengths::Uniform(1.0),
            tooth_potential: Potential::Zero,
        })),
        "maryland" => Some(Preset::Comb(CombParams {
            spacing: 1.0,
            kind: CouplingKind::Delta,
            line_coupling: 0.0,
            omega: 0.0,
            teeth: ToothLengths::Maryland { unit: 1.0 },
            tooth_potential: Potential::Zero,
        })),
        _ => None,
    }
}
