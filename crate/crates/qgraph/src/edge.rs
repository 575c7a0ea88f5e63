//! Per-edge solutions of `-f'' + V f = E f`: canonical bases, transfer
//! matrices, directed coupling data and the exceptional-energy scan.
//!
//! Everything is parametrised by the energy `E` directly (not by the
//! wavenumber), through the entire functions of [`crate::special`]; all
//! quantities below are therefore smooth across `E = V` and need no
//! complex arithmetic for `E < 0`.
//!
//! Orientation bookkeeping: an edge is stored with a coordinate running
//! from `from` (x = 0) to `to` (x = ℓ). The vertex reduction views each
//! edge *toward* one endpoint `j`, placing `j` at the right end of
//! `[0, ℓ]` and the far vertex `n` at the left end. When `j` is the
//! stored `from` vertex, the directed view uses the reversed basis,
//! obtained from the stored one by swapping the diagonal of the transfer
//! matrix.

use num_complex::Complex64;

use crate::error::SolveError;
use crate::graph::{CouplingKind, Edge, EdgeId, Graph, VertexId, VertexKind};
use crate::special::{basis_integrals, cs};

/// 2×2 real matrix in row-major order; used for (value, derivative)
/// transfer along an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

/// Transfer matrix over a constant-potential interval of length `dx`
/// with `μ = E − V`: maps `(f, f')` at the left end to the right end.
pub fn interval_transfer(mu: f64, dx: f64) -> Mat2 {
    let (c, s) = cs(mu, dx);
    Mat2([[c, s], [-mu * s, c]])
}

/// Endpoint data of the canonical solutions `c` (c(0)=1, c'(0)=0) and
/// `s` (s(0)=0, s'(0)=1) of an edge at energy `E`, in the stored
/// orientation. The transfer matrix is `[[cl, sl], [cpl, spl]]` with
/// unit determinant.
#[derive(Debug, Clone, Copy)]
pub struct EdgeBasis {
    pub energy: f64,
    /// `c(ℓ)`
    pub cl: f64,
    /// `s(ℓ)`, identical from both orientations
    pub sl: f64,
    /// `c'(ℓ)`, identical from both orientations
    pub cpl: f64,
    /// `s'(ℓ)`
    pub spl: f64,
}

impl EdgeBasis {
    pub fn det(&self) -> f64 {
        self.cl * self.spl - self.sl * self.cpl
    }

    /// Basis of the same edge traversed in the opposite direction: the
    /// diagonal entries of the transfer matrix swap, the off-diagonal
    /// data `s(ℓ)` and `c'(ℓ)` are shared.
    pub fn reversed(&self) -> EdgeBasis {
        EdgeBasis {
            energy: self.energy,
            cl: self.spl,
            sl: self.sl,
            cpl: self.cpl,
            spl: self.cl,
        }
    }
}

/// Compute the edge basis as the ordered product of interval transfer
/// matrices.
pub fn edge_basis(edge: &Edge, energy: f64) -> EdgeBasis {
    let mut t = Mat2::IDENTITY;
    for (x0, x1, v) in edge.potential.intervals(edge.length) {
        t = interval_transfer(energy - v, x1 - x0).mul(&t);
    }
    EdgeBasis {
        energy,
        cl: t.0[0][0],
        sl: t.0[0][1],
        cpl: t.0[1][0],
        spl: t.0[1][1],
    }
}

// ---------------------------------------------------------------------------
// Point evaluation and exact integration along an edge
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Segment {
    x0: f64,
    x1: f64,
    mu: f64,
    /// Transfer from the edge start to `x0`.
    to_start: Mat2,
}

/// Precomputed piecewise data of one edge at a fixed energy, supporting
/// point evaluation of the canonical basis and exact `L²` integration of
/// basis combinations.
#[derive(Debug, Clone)]
pub struct EdgePropagator {
    segments: Vec<Segment>,
    basis: EdgeBasis,
    length: f64,
}

impl EdgePropagator {
    pub fn new(edge: &Edge, energy: f64) -> EdgePropagator {
        let mut segments = Vec::new();
        let mut t = Mat2::IDENTITY;
        for (x0, x1, v) in edge.potential.intervals(edge.length) {
            segments.push(Segment {
                x0,
                x1,
                mu: energy - v,
                to_start: t,
            });
            t = interval_transfer(energy - v, x1 - x0).mul(&t);
        }
        EdgePropagator {
            segments,
            basis: EdgeBasis {
                energy,
                cl: t.0[0][0],
                sl: t.0[0][1],
                cpl: t.0[1][0],
                spl: t.0[1][1],
            },
            length: edge.length,
        }
    }

    pub fn basis(&self) -> EdgeBasis {
        self.basis
    }

    /// Values `(c(x), s(x), c'(x), s'(x))` of the canonical solutions.
    pub fn eval(&self, x: f64) -> (f64, f64, f64, f64) {
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| x >= s.x0)
            .unwrap_or(&self.segments[0]);
        let local = interval_transfer(seg.mu, x - seg.x0);
        let t = local.mul(&seg.to_start);
        (t.0[0][0], t.0[0][1], t.0[1][0], t.0[1][1])
    }

    /// Exact `∫₀^ℓ |a c(x) + b s(x)|² dx` via closed-form segment
    /// integrals of the local basis.
    pub fn norm_sq(&self, a: Complex64, b: Complex64) -> f64 {
        let mut total = 0.0;
        for seg in &self.segments {
            let m = &seg.to_start.0;
            // Value and derivative of ψ at the segment start.
            let v0 = a * m[0][0] + b * m[0][1];
            let d0 = a * m[1][0] + b * m[1][1];
            let ints = basis_integrals(seg.mu, seg.x1 - seg.x0);
            total += v0.norm_sqr() * ints.cc
                + 2.0 * (v0 * d0.conj()).re * ints.cs
                + d0.norm_sqr() * ints.ss;
        }
        total
    }

    /// Largest mismatch of value/derivative when evaluating at interior
    /// breakpoints from the two adjacent segments; a representation
    /// integrity diagnostic, ~0 for a correctly propagated basis.
    pub fn breakpoint_defect(&self, a: Complex64, b: Complex64) -> f64 {
        let mut worst = 0.0f64;
        for w in self.segments.windows(2) {
            let left = interval_transfer(w[0].mu, w[0].x1 - w[0].x0).mul(&w[0].to_start);
            let right = &w[1].to_start;
            for row in 0..2 {
                let l = a * left.0[row][0] + b * left.0[row][1];
                let r = a * right.0[row][0] + b * right.0[row][1];
                worst = worst.max((l - r).norm());
            }
        }
        worst
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

// ---------------------------------------------------------------------------
// Directed coupling data
// ---------------------------------------------------------------------------

/// Kind of the far vertex of a directed edge view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarVertex {
    Interior,
    Boundary { omega: f64 },
}

/// Endpoint data of the two normalised solutions of a directed edge
/// view toward vertex `j` (at `x = ℓ`), with the far vertex `n` at
/// `x = 0`:
///
/// * `u` is normalised at the `j` end: for δ, `u(ℓ) = 0, u'(ℓ) = 1`;
///   for δ′_s: `u(ℓ) = 1, u'(ℓ) = 0`;
/// * `v` is normalised at the `n` end: interior δ, `v(0) = 0,
///   v'(0) = 1`; interior δ′_s: `v(0) = 1, v'(0) = 0`; boundary:
///   `v(0) = sin ω, v'(0) = −cos ω` (satisfies the Robin condition);
/// * `w` is their constant Wronskian `u v' − u' v`. Its zeros are the
///   exceptional energies of the edge.
#[derive(Debug, Clone, Copy)]
pub struct DirectedCoupling {
    pub w: f64,
    /// `v(ℓ)` at the toward end.
    pub v_l: f64,
    /// `v'(ℓ)` at the toward end.
    pub vp_l: f64,
    /// `u(0)` at the far end.
    pub u_0: f64,
    /// `u'(0)` at the far end.
    pub up_0: f64,
    pub far: FarVertex,
}

/// Coupling data of a directed basis (already oriented with the toward
/// vertex at `x = ℓ`).
pub fn directed_coupling(basis: &EdgeBasis, kind: CouplingKind, far: FarVertex) -> DirectedCoupling {
    let (cl, sl, cpl, spl) = (basis.cl, basis.sl, basis.cpl, basis.spl);
    let (u_0, up_0) = match kind {
        // u = −s(ℓ)·c + c(ℓ)·s satisfies u(ℓ)=0, u'(ℓ)=1.
        CouplingKind::Delta => (-sl, cl),
        // u = s'(ℓ)·c − c'(ℓ)·s satisfies u(ℓ)=1, u'(ℓ)=0.
        CouplingKind::DeltaPrimeS => (spl, -cpl),
    };
    let (v_l, vp_l) = match far {
        FarVertex::Interior => match kind {
            CouplingKind::Delta => (sl, spl),
            CouplingKind::DeltaPrimeS => (cl, cpl),
        },
        FarVertex::Boundary { omega } => {
            let (sn, cn) = omega.sin_cos();
            (sn * cl - cn * sl, sn * cpl - cn * spl)
        }
    };
    let w = match (kind, far) {
        (CouplingKind::Delta, FarVertex::Interior) => -sl,
        (CouplingKind::DeltaPrimeS, FarVertex::Interior) => cpl,
        (_, FarVertex::Boundary { omega }) => {
            let (sn, cn) = omega.sin_cos();
            -u_0 * cn - up_0 * sn
        }
    };
    DirectedCoupling {
        w,
        v_l,
        vp_l,
        u_0,
        up_0,
        far,
    }
}

/// Graph-aware form: coupling data of edge `e` viewed toward the
/// interior vertex `toward`.
pub fn coupling_data(
    g: &Graph,
    e: EdgeId,
    energy: f64,
    kind: CouplingKind,
    toward: VertexId,
) -> Result<DirectedCoupling, SolveError> {
    let edge = g.edge(e);
    if toward != edge.from && toward != edge.to {
        return Err(SolveError::BadParameter(format!(
            "vertex `{}` is not an endpoint of edge `{}`",
            g.vertex(toward).name,
            edge.name
        )));
    }
    if g.vertex(toward).is_boundary() {
        return Err(SolveError::BadParameter(format!(
            "coupling data is defined toward interior vertices; `{}` is boundary",
            g.vertex(toward).name
        )));
    }
    let far_id = edge.opposite(toward);
    let far = match g.vertex(far_id).kind {
        VertexKind::Interior { .. } => FarVertex::Interior,
        VertexKind::Boundary { omega } => FarVertex::Boundary { omega },
    };
    let mut basis = edge_basis(edge, energy);
    if toward == edge.from {
        basis = basis.reversed();
    }
    Ok(directed_coupling(&basis, kind, far))
}

/// Wronskian of an edge's decoupled problem: Dirichlet (δ) or Neumann
/// (δ′_s) at interior endpoints, the Robin condition retained at a
/// boundary endpoint. Returns `None` for an edge with two boundary
/// endpoints (it takes no part in the vertex reduction).
pub fn edge_wronskian(g: &Graph, e: EdgeId, energy: f64, kind: CouplingKind) -> Option<f64> {
    let edge = g.edge(e);
    let toward = if !g.vertex(edge.to).is_boundary() {
        edge.to
    } else if !g.vertex(edge.from).is_boundary() {
        edge.from
    } else {
        return None;
    };
    Some(
        coupling_data(g, e, energy, kind, toward)
            .expect("toward is an interior endpoint")
            .w,
    )
}

// ---------------------------------------------------------------------------
// Exceptional energies
// ---------------------------------------------------------------------------

/// An energy where an edge's decoupled problem is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalPoint {
    pub energy: f64,
    pub edge: EdgeId,
}

/// Signed square root used for energy scans: the grid is uniform in
/// `s = sign(E)·√|E|`, where the Wronskian zeros of an edge of length ℓ
/// are asymptotically π/ℓ apart.
pub fn signed_sqrt(e: f64) -> f64 {
    e.signum() * e.abs().sqrt()
}

pub fn signed_square(s: f64) -> f64 {
    s.signum() * s * s
}

/// Locate all exceptional energies in `(e_lo, e_hi]` by a sign-change
/// scan of each edge's Wronskian with per-root bisection. The scan step
/// is `π / (L0·(16 + 8·√C·L0))` in `s`-units, at least eight nodes per
/// zero spacing of the longest edge with headroom for potential shifts.
pub fn exceptional_points(
    g: &Graph,
    kind: CouplingKind,
    range: (f64, f64),
) -> Vec<ExceptionalPoint> {
    let (e_lo, e_hi) = range;
    let mut found = Vec::new();
    if !(e_hi > e_lo) {
        return found;
    }
    let l0 = g.summary().max_length;
    let c = g.summary().potential_bound;
    let step = std::f64::consts::PI / (l0 * (16.0 + 8.0 * c.sqrt() * l0));
    for (eid, _) in g.edges() {
        let f = |e: f64| edge_wronskian(g, eid, e, kind);
        if f(e_lo).is_none() {
            continue; // boundary–boundary edge
        }
        let fe = |e: f64| f(e).expect("edge participates in the reduction");
        for root in scan_roots(fe, e_lo, e_hi, step) {
            found.push(ExceptionalPoint {
                energy: root,
                edge: eid,
            });
        }
    }
    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    found
}

/// Sign-change scan over an `s`-uniform grid with bisection refinement.
/// Roots are reported in `(e_lo, e_hi]`.
pub(crate) fn scan_roots(f: impl Fn(f64) -> f64, e_lo: f64, e_hi: f64, step_s: f64) -> Vec<f64> {
    let s_lo = signed_sqrt(e_lo);
    let s_hi = signed_sqrt(e_hi);
    let n = ((s_hi - s_lo) / step_s).ceil().max(1.0) as usize;
    let mut roots = Vec::new();
    let mut prev_e = e_lo;
    let mut prev_f = f(prev_e);
    for i in 1..=n {
        let s = s_lo + (s_hi - s_lo) * i as f64 / n as f64;
        let e = if i == n { e_hi } else { signed_square(s) };
        let fe = f(e);
        if prev_f == 0.0 {
            if prev_e > e_lo {
                roots.push(prev_e);
            }
        } else if fe != 0.0 && prev_f.signum() != fe.signum() {
            roots.push(bisect(&f, prev_e, e, prev_f));
        }
        prev_e = e;
        prev_f = fe;
    }
    if prev_f == 0.0 {
        roots.push(prev_e);
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let mut sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-14 * m.abs().max(1.0) {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
            let _ = sa;
        }
        sa = f(a).signum();
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{star_graph, Potential};
    use std::f64::consts::PI;

    fn free_edge(length: f64) -> Edge {
        Edge {
            name: "e".to_string(),
            from: VertexId(0),
            to: VertexId(1),
            length,
            potential: Potential::Zero,
            phase: 0.0,
        }
    }

    /// Fourth-order Runge–Kutta integration of `f'' = (V − E) f` as an
    /// independent check on the transfer-matrix construction. Steps are
    /// aligned with the potential breakpoints so no step straddles a
    /// discontinuity.
    fn rk4_basis(edge: &Edge, energy: f64, steps_per_unit: usize) -> EdgeBasis {
        let run = |mut y: [f64; 2]| {
            for (x0, x1, v) in edge.potential.intervals(edge.length) {
                let q = v - energy;
                let n = ((x1 - x0) * steps_per_unit as f64).ceil() as usize;
                let h = (x1 - x0) / n as f64;
                let rhs = |y: [f64; 2]| [y[1], q * y[0]];
                for _ in 0..n {
                    let k1 = rhs(y);
                    let k2 = rhs([y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
                    let k3 = rhs([y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
                    let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
                    y = [
                        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                    ];
                }
            }
            y
        };
        let c = run([1.0, 0.0]);
        let s = run([0.0, 1.0]);
        EdgeBasis {
            energy,
            cl: c[0],
            sl: s[0],
            cpl: c[1],
            spl: s[1],
        }
    }

    #[test]
    fn half_period_sine_basis() {
        let b = edge_basis(&free_edge(1.0), PI * PI);
        assert!(b.sl.abs() < 1e-14);
        assert!((b.cl + 1.0).abs() < 1e-13);
        assert!((b.spl + 1.0).abs() < 1e-13);
        assert!(b.cpl.abs() < 1e-12);
        assert!((b.det() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn negative_energy_matches_ode_integration() {
        let e = free_edge(1.0);
        let b = edge_basis(&e, -1.0);
        assert!((b.sl - 1.0f64.sinh()).abs() < 1e-14);
        assert!((b.cl - 1.0f64.cosh()).abs() < 1e-14);
        let r = rk4_basis(&e, -1.0, 4000);
        assert!((b.sl - r.sl).abs() < 1e-10);
        assert!((b.cl - r.cl).abs() < 1e-10);
    }

    #[test]
    fn piecewise_potential_matches_ode_integration() {
        let e = Edge {
            potential: Potential::PiecewiseConstant {
                breakpoints: vec![0.0, 0.5, 1.0],
                values: vec![4.0, 0.0],
            },
            ..free_edge(1.0)
        };
        let b = edge_basis(&e, 4.0);
        assert!((b.det() - 1.0).abs() < 1e-12, "det T = {}", b.det());
        let r = rk4_basis(&e, 4.0, 20000);
        for (x, y) in [(b.cl, r.cl), (b.sl, r.sl), (b.cpl, r.cpl), (b.spl, r.spl)] {
            assert!((x - y).abs() < 1e-10, "transfer entry {x} vs ODE {y}");
        }
    }

    #[test]
    fn propagator_eval_agrees_with_basis_and_integrates() {
        let e = Edge {
            potential: Potential::PiecewiseConstant {
                breakpoints: vec![0.0, 0.3, 1.0],
                values: vec![-2.0, 5.0],
            },
            ..free_edge(1.0)
        };
        let p = EdgePropagator::new(&e, 1.5);
        let (c, s, cp, sp) = p.eval(1.0);
        let b = p.basis();
        assert!((c - b.cl).abs() < 1e-13);
        assert!((s - b.sl).abs() < 1e-13);
        assert!((cp - b.cpl).abs() < 1e-13);
        assert!((sp - b.spl).abs() < 1e-13);
        // Exact norm against Simpson quadrature of the sampled function.
        let (a, bb) = (Complex64::new(0.7, 0.0), Complex64::new(-0.4, 0.2));
        let n = 4000;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (c, s, _, _) = p.eval(i as f64 * h);
            sum += w * (a * c + bb * s).norm_sqr();
        }
        sum *= h / 3.0;
        assert!((p.norm_sq(a, bb) - sum).abs() < 1e-9);
        assert!(p.breakpoint_defect(a, bb) < 1e-13);
    }

    #[test]
    fn delta_coupling_data_at_quarter_period() {
        // V = 0, ℓ = 1, interior far vertex, E = (π/2)².
        let k = PI / 2.0;
        let b = edge_basis(&free_edge(1.0), k * k);
        let d = directed_coupling(&b, CouplingKind::Delta, FarVertex::Interior);
        assert!((d.v_l - 2.0 / PI).abs() < 1e-14, "v(ℓ) = sin(π/2)/(π/2)");
        assert!((d.w + 2.0 / PI).abs() < 1e-14, "W = −v(ℓ)");
        assert!(d.vp_l.abs() < 1e-14, "v'(ℓ) = cos(π/2)");
        // Wronskian identities from the far end.
        assert!((d.u_0 - d.w).abs() < 1e-14, "W = u(0) for δ");
    }

    #[test]
    fn delta_prime_wronskian_vanishes_at_neumann_eigenvalue() {
        let b = edge_basis(&free_edge(1.0), PI * PI);
        let d = directed_coupling(&b, CouplingKind::DeltaPrimeS, FarVertex::Interior);
        assert!(d.w.abs() < 1e-12, "W^β = c'(ℓ) = −k sin k = 0 at k = π");
        assert!((d.vp_l - d.w).abs() < 1e-14);
        assert!((-d.up_0 - d.w).abs() < 1e-14, "W = −u'(0) for δ′_s");
    }

    #[test]
    fn boundary_coupling_data_dirichlet_tip() {
        // ω = 0 tip at the far end, E = 1: W = sin(1).
        let b = edge_basis(&free_edge(1.0), 1.0);
        let d = directed_coupling(&b, CouplingKind::Delta, FarVertex::Boundary { omega: 0.0 });
        assert!((d.w - 1.0f64.sin()).abs() < 1e-14);
        // v(x) = −sin(kx)/k here, so v(ℓ) = −sin 1 and W = −v(ℓ).
        assert!((d.v_l + 1.0f64.sin()).abs() < 1e-14);
        // Robin residual of v at the far end is zero by construction:
        // v(0)cos ω + v'(0)sin ω with v(0) = sin ω, v'(0) = −cos ω.
        let (sn, cn) = (0.0f64, 1.0f64);
        assert_eq!(sn * cn - cn * sn, 0.0);
    }

    #[test]
    fn wronskian_is_orientation_symmetric() {
        let e = Edge {
            potential: Potential::PiecewiseConstant {
                breakpoints: vec![0.0, 0.4, 1.3],
                values: vec![3.0, -1.5],
            },
            ..free_edge(1.3)
        };
        for &energy in &[-7.0, 0.3, 11.0, 60.0] {
            let b = edge_basis(&e, energy);
            let r = b.reversed();
            for kind in [CouplingKind::Delta, CouplingKind::DeltaPrimeS] {
                let d1 = directed_coupling(&b, kind, FarVertex::Interior);
                let d2 = directed_coupling(&r, kind, FarVertex::Interior);
                assert!(
                    (d1.w - d2.w).abs() <= 1e-12 * d1.w.abs().max(1.0),
                    "W_jn = W_nj violated at E={energy}"
                );
            }
        }
    }

    #[test]
    fn star_exceptional_points_delta() {
        let g = star_graph(3, 1.0, 0.0, 0.0, CouplingKind::Delta);
        let pts = exceptional_points(&g, CouplingKind::Delta, (0.0, 20.0));
        // One zero per edge at E = π².
        assert_eq!(pts.len(), 3);
        for p in &pts {
            assert!((p.energy - PI * PI).abs() < 1e-9, "E = {}", p.energy);
        }
    }

    #[test]
    fn star_exceptional_points_delta_prime() {
        let g = star_graph(3, 1.0, 0.0, 0.0, CouplingKind::DeltaPrimeS);
        let pts = exceptional_points(&g, CouplingKind::DeltaPrimeS, (0.0, 20.0));
        assert_eq!(pts.len(), 3, "only (π/2)² lies in range");
        for p in &pts {
            assert!((p.energy - PI * PI / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_range_has_no_exceptional_points() {
        let g = star_graph(3, 1.0, 0.0, 0.0, CouplingKind::Delta);
        assert!(exceptional_points(&g, CouplingKind::Delta, (5.0, 5.0)).is_empty());
    }

    #[test]
    fn negative_exceptional_energy_from_a_well() {
        // A length-2 interior edge with V = −3: its Dirichlet spectrum
        // is (mπ/2)² − 3, so the first exceptional energy is negative.
        let g = crate::graph::path_graph(&[1.0, 2.0, 1.0], 0.0, 0.0, CouplingKind::Delta);
        let mid = g.edge_by_name("e1").unwrap();
        let mut edges: Vec<Edge> = g.edges().map(|(_, e)| e.clone()).collect();
        edges[mid.index()].potential = Potential::Constant(-3.0);
        let vertices = g.vertices().map(|(_, v)| v.clone()).collect();
        let g = crate::graph::Graph::new(vertices, edges, CouplingKind::Delta).unwrap();

        let pts = exceptional_points(&g, CouplingKind::Delta, (-2.0, 8.0));
        let expect = [
            (PI / 2.0) * (PI / 2.0) - 3.0, // ≈ −0.533
            PI * PI - 3.0,                 // ≈ 6.87
        ];
        assert_eq!(pts.len(), expect.len(), "{pts:?}");
        for (p, e) in pts.iter().zip(expect.iter()) {
            assert!((p.energy - e).abs() < 1e-9, "{} vs {e}", p.energy);
            assert_eq!(p.edge, mid);
        }
    }
}
