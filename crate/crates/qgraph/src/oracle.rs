//! Reference solvers that avoid the vertex reduction entirely, used to
//! cross-check every secular result.
//!
//! Two oracles with independent failure modes:
//!
//! * [`fd_spectrum`]: a variational finite-difference discretisation
//!   (lumped-mass linear elements). It shares no transfer-matrix code
//!   with the rest of the crate, converges at `O(h²)` with an even error
//!   expansion (so one Richardson step gives `O(h⁴)` estimates) and
//!   handles δ couplings and Robin boundaries. Eigenvalues are extracted
//!   by spectrum slicing: the inertia of `A − E·B` is computed per edge
//!   by tridiagonal elimination plus a small vertex Schur complement, so
//!   no dense eigensolve of the mesh matrix is ever needed.
//! * [`matching_spectrum`]: impose the vertex conditions directly on
//!   per-edge solution coefficients. The resulting square matrix `S(E)`
//!   is entire in `E`, so this oracle is valid at exceptional energies
//!   too; roots are located by determinant sign changes plus
//!   singular-value dips (for even-multiplicity roots).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dual::VertexVector;
use crate::edge::{edge_basis, signed_sqrt};
use crate::error::SolveError;
use crate::graph::{CouplingKind, Graph, VertexKind};
use crate::linalg::{det_sign, golden_min, sigma_extremes, svd_kernel, HermMatrix};
use crate::spectral::SpectrumResult;

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Mesh and extraction parameters of the finite-difference oracle.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    /// Target mesh step; each edge uses `ceil(ℓ/mesh)` equal intervals.
    /// Must satisfy `mesh < ℓ0/8`.
    pub mesh: f64,
    /// Number of lowest eigenvalues requested.
    pub count: usize,
    /// Combine `h` and `h/2` runs into `(4λ_{h/2} − λ_h)/3`.
    pub richardson: bool,
}

struct FdEdge {
    n: usize,
    h: f64,
    /// Element-average potential, one entry per interval.
    vbar: Vec<f64>,
    from_slot: Option<usize>,
    to_slot: Option<usize>,
}

struct FdMesh {
    edges: Vec<FdEdge>,
    /// Static diagonal of the vertex block (stiffness + potential +
    /// coupling terms) and its lumped mass.
    vertex_a: Vec<f64>,
    vertex_b: Vec<f64>,
}

fn is_dirichlet(omega: f64) -> bool {
    omega.sin().abs() < 1e-12
}

impl FdMesh {
    fn build(g: &Graph, mesh: f64) -> FdMesh {
        let mut slot = vec![None; g.n_vertices()];
        let mut vertex_a = Vec::new();
        let mut vertex_b = Vec::new();
        for (vid, v) in g.vertices() {
            let coupling_term = match v.kind {
                VertexKind::Interior { coupling } => coupling,
                VertexKind::Boundary { omega } => {
                    if is_dirichlet(omega) {
                        continue;
                    }
                    -omega.cos() / omega.sin()
                }
            };
            slot[vid.index()] = Some(vertex_a.len());
            vertex_a.push(coupling_term);
            vertex_b.push(0.0);
        }
        let mut edges = Vec::new();
        for (_, e) in g.edges() {
            let n = (e.length / mesh).ceil() as usize;
            let h = e.length / n as f64;
            let vbar: Vec<f64> = (0..n)
                .map(|i| e.potential.mean(i as f64 * h, (i + 1) as f64 * h, e.length))
                .collect();
            let from_slot = slot[e.from.index()];
            let to_slot = slot[e.to.index()];
            if let Some(s) = from_slot {
                vertex_a[s] += 1.0 / h + vbar[0] * h / 2.0;
                vertex_b[s] += h / 2.0;
            }
            if let Some(s) = to_slot {
                vertex_a[s] += 1.0 / h + vbar[n - 1] * h / 2.0;
                vertex_b[s] += h / 2.0;
            }
            edges.push(FdEdge {
                n,
                h,
                vbar,
                from_slot,
                to_slot,
            });
        }
        FdMesh {
            edges,
            vertex_a,
            vertex_b,
        }
    }

    fn dim(&self) -> usize {
        self.edges.iter().map(|e| e.n - 1).sum::<usize>() + self.vertex_a.len()
    }

    /// Count of pencil eigenvalues below `energy`: inertia of
    /// `A − E·B`, accumulated per edge block plus the vertex Schur
    /// complement.
    fn count_below(&self, energy: f64) -> usize {
        let nv = self.vertex_a.len();
        let mut schur = DMatrix::<f64>::zeros(nv, nv);
        for s in 0..nv {
            schur[(s, s)] = self.vertex_a[s] - energy * self.vertex_b[s];
        }
        let mut negatives = 0usize;
        for e in &self.edges {
            let n_int = e.n - 1;
            if n_int == 0 {
                // Excluded by the mesh precondition; direct coupling
                // between the endpoint slots would be needed here.
                unreachable!("mesh guarantees at least 8 intervals per edge");
            }
            let off = -1.0 / e.h;
            let pivot_floor = 1e-12 * (2.0 / e.h);
            let mut d = vec![0.0f64; n_int];
            let mut l = vec![0.0f64; n_int];
            for i in 0..n_int {
                let t = 2.0 / e.h + (e.vbar[i] + e.vbar[i + 1]) * e.h / 2.0 - energy * e.h;
                let mut di = if i == 0 { t } else { t - off * off / d[i - 1] };
                if di.abs() < pivot_floor {
                    di = if di < 0.0 { -pivot_floor } else { pivot_floor };
                }
                if di < 0.0 {
                    negatives += 1;
                }
                if i + 1 < n_int {
                    l[i + 1] = off / di;
                }
                d[i] = di;
            }
            // Corner entries of T⁻¹ via the factorisation: solve for
            // e₁ and e_N right-hand sides.
            let solve_corner = |first: bool| -> (f64, f64) {
                let mut y = vec![0.0f64; n_int];
                if first {
                    y[0] = 1.0;
                    for i in 1..n_int {
                        y[i] = -l[i] * y[i - 1];
                    }
                } else {
                    y[n_int - 1] = 1.0;
                }
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi /= d[i];
                }
                let mut u = y;
                for i in (0..n_int - 1).rev() {
                    u[i] -= l[i + 1] * u[i + 1];
                }
                (u[0], u[n_int - 1])
            };
            let c2 = 1.0 / (e.h * e.h);
            if e.from_slot.is_some() || e.to_slot.is_some() {
                let (u_first, u_last) = solve_corner(true);
                let (_, w_last) = solve_corner(false);
                if let Some(f) = e.from_slot {
                    schur[(f, f)] -= c2 * u_first;
                }
                if let Some(t) = e.to_slot {
                    schur[(t, t)] -= c2 * w_last;
                }
                if let (Some(f), Some(t)) = (e.from_slot, e.to_slot) {
                    schur[(f, t)] -= c2 * u_last;
                    schur[(t, f)] -= c2 * u_last;
                }
            }
        }
        if nv > 0 {
            negatives += HermMatrix::Real(schur).negative_count();
        }
        negatives
    }

    fn lowest(&self, count: usize) -> Vec<f64> {
        let count = count.min(self.dim());
        if count == 0 {
            return Vec::new();
        }
        let mut e_lo = -1.0;
        while self.count_below(e_lo) > 0 {
            e_lo = 2.0 * e_lo - 10.0;
        }
        let mut e_hi = 10.0;
        while self.count_below(e_hi) < count {
            e_hi = 2.0 * e_hi + 10.0;
        }
        let mut out = Vec::with_capacity(count);
        let mut lo = e_lo;
        for idx in 0..count {
            let mut a = lo;
            let mut b = e_hi;
            while b - a > 1e-12 * b.abs().max(1.0) {
                let m = 0.5 * (a + b);
                if self.count_below(m) > idx {
                    b = m;
                } else {
                    a = m;
                }
            }
            out.push(0.5 * (a + b));
            lo = a; // eigenvalues are sorted; reuse the bracket
        }
        out
    }
}

/// Lowest eigenvalues of the δ-coupled graph by the variational
/// finite-difference discretisation. The graph's declared coupling must
/// be δ; magnetic phases are not supported.
pub fn fd_spectrum(g: &Graph, cfg: &FdConfig) -> Result<Vec<f64>, SolveError> {
    if g.coupling() != CouplingKind::Delta {
        return Err(SolveError::UnsupportedCoupling(
            "finite differences realise δ couplings only".to_string(),
        ));
    }
    if g.has_phases() {
        return Err(SolveError::BadParameter(
            "finite-difference oracle requires zero magnetic phases".to_string(),
        ));
    }
    let l0 = g.summary().min_length;
    if !(cfg.mesh > 0.0) || cfg.mesh >= l0 / 8.0 {
        return Err(SolveError::BadParameter(format!(
            "mesh {} too coarse for shortest edge {} (need mesh < ℓ0/8)",
            cfg.mesh, l0
        )));
    }
    let coarse = FdMesh::build(g, cfg.mesh).lowest(cfg.count);
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = FdMesh::build(g, cfg.mesh / 2.0).lowest(cfg.count);
    Ok(coarse
        .iter()
        .zip(fine.iter())
        .map(|(l1, l2)| (4.0 * l2 - l1) / 3.0)
        .collect())
}

// ---------------------------------------------------------------------------
// Vertex-condition matching
// ---------------------------------------------------------------------------

/// The square matching matrix `S(E)` over per-edge coefficients
/// `(a_e, b_e)` of `ψ_e = a_e·c + b_e·s`. Rows per interior vertex:
/// `deg − 1` continuity rows (δ) or derivative-matching rows (δ′_s) and
/// one coupling-sum row; one Robin row per boundary vertex. The total
/// is `Σ deg = 2·|edges|`, so `S` is square.
pub fn matching_matrix(g: &Graph, kind: CouplingKind, energy: f64) -> Result<DMatrix<f64>, SolveError> {
    if g.has_phases() {
        return Err(SolveError::BadParameter(
            "matching oracle requires zero magnetic phases".to_string(),
        ));
    }
    let ne = g.n_edges();
    let dim = 2 * ne;
    let bases: Vec<_> = g.edges().map(|(_, e)| edge_basis(e, energy)).collect();
    // Value and outward-derivative linear forms of an edge end at the
    // given vertex, as (coeff of a, coeff of b).
    let value_form = |eidx: usize, at_from: bool| -> (f64, f64) {
        if at_from {
            (1.0, 0.0)
        } else {
            (bases[eidx].cl, bases[eidx].sl)
        }
    };
    let deriv_form = |eidx: usize, at_from: bool| -> (f64, f64) {
        if at_from {
            (0.0, 1.0)
        } else {
            (-bases[eidx].cpl, -bases[eidx].spl)
        }
    };
    let mut s = DMatrix::<f64>::zeros(dim, dim);
    let mut row = 0usize;
    for (vid, v) in g.vertices() {
        let ends: Vec<(usize, bool)> = g
            .adjacency(vid)
            .iter()
            .map(|inc| (inc.edge.index(), g.edge(inc.edge).from == vid))
            .collect();
        match v.kind {
            VertexKind::Interior { coupling } => {
                type EndForm<'a> = &'a dyn Fn(usize, bool) -> (f64, f64);
                let (primary, secondary): (EndForm, EndForm) = match kind {
                    // Continuity of values, flux sum tied to the value.
                    CouplingKind::Delta => (&value_form, &deriv_form),
                    // Continuity of derivatives, value sum tied to it.
                    CouplingKind::DeltaPrimeS => (&deriv_form, &value_form),
                };
                let (e0, f0) = ends[0];
                let (p0a, p0b) = primary(e0, f0);
                for &(ei, fi) in &ends[1..] {
                    let (pa, pb) = primary(ei, fi);
                    s[(row, 2 * e0)] += p0a;
                    s[(row, 2 * e0 + 1)] += p0b;
                    s[(row, 2 * ei)] -= pa;
                    s[(row, 2 * ei + 1)] -= pb;
                    row += 1;
                }
                for &(ei, fi) in &ends {
                    let (qa, qb) = secondary(ei, fi);
                    s[(row, 2 * ei)] += qa;
                    s[(row, 2 * ei + 1)] += qb;
                }
                s[(row, 2 * e0)] -= coupling * p0a;
                s[(row, 2 * e0 + 1)] -= coupling * p0b;
                row += 1;
            }
            VertexKind::Boundary { omega } => {
                let (ei, fi) = ends[0];
                let (va, vb) = value_form(ei, fi);
                let (da, db) = deriv_form(ei, fi);
                s[(row, 2 * ei)] = va * omega.cos() + da * omega.sin();
                s[(row, 2 * ei + 1)] = vb * omega.cos() + db * omega.sin();
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, dim, "matching matrix must be square");
    Ok(s)
}

/// Eigenvalues in `(e_lo, e_hi]` as roots of `det S(E) = 0`, one list
/// entry per multiplicity. Valid for both couplings and at exceptional
/// energies. `grid_step` (s-units) defaults to the exceptional-scan
/// heuristic.
pub fn matching_spectrum(
    g: &Graph,
    kind: CouplingKind,
    range: (f64, f64),
    grid_step: Option<f64>,
) -> Result<Vec<f64>, SolveError> {
    let (e_lo, e_hi) = range;
    if !(e_hi > e_lo) {
        return Ok(Vec::new());
    }
    let summary = g.summary();
    let step = grid_step.unwrap_or_else(|| {
        std::f64::consts::PI
            / (summary.max_length * (16.0 + 8.0 * summary.potential_bound.sqrt() * summary.max_length))
    });
    let s_lo = signed_sqrt(e_lo);
    let s_hi = signed_sqrt(e_hi);
    let n = ((s_hi - s_lo) / step).ceil().max(2.0) as usize;

    let ratio_at = |e: f64| -> Result<f64, SolveError> {
        let m = matching_matrix(g, kind, e)?;
        let (lo, hi) = sigma_extremes(&m);
        Ok(if hi > 0.0 { lo / hi } else { 0.0 })
    };

    // Determinant signs on a refined subgrid (cheap LU), so that several
    // odd-multiplicity roots inside one coarse cell are still separated;
    // singular-value ratios only on the coarse grid (SVD).
    const REFINE: usize = 32;
    let nf = n * REFINE;
    let mut fine_e = Vec::with_capacity(nf + 1);
    let mut fine_sign = Vec::with_capacity(nf + 1);
    for i in 0..=nf {
        let e = if i == 0 {
            e_lo
        } else if i == nf {
            e_hi
        } else {
            crate::edge::signed_square(s_lo + (s_hi - s_lo) * i as f64 / nf as f64)
        };
        fine_e.push(e);
        fine_sign.push(det_sign(&matching_matrix(g, kind, e)?));
    }
    let mut energies = Vec::with_capacity(n + 1);
    let mut ratios = Vec::with_capacity(n + 1);
    for i in 0..=n {
        energies.push(fine_e[i * REFINE]);
        ratios.push(ratio_at(fine_e[i * REFINE])?);
    }

    let mut roots: Vec<(f64, usize)> = Vec::new();
    let mut push_root = |e: f64, g: &Graph, kind| -> Result<(), SolveError> {
        let m = matching_matrix(g, kind, e)?;
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0f64, f64::max);
        let mult = sv.iter().filter(|&&x| x < 1e-7 * top).count().max(1);
        roots.push((e, mult));
        Ok(())
    };

    for i in 0..=nf {
        // A grid point landing exactly on a singular matrix is itself a
        // root (the sign scan skips zero-sign endpoints).
        if fine_sign[i] == 0 {
            push_root(fine_e[i], g, kind)?;
        }
    }
    for i in 1..=nf {
        if fine_sign[i - 1] != 0 && fine_sign[i] != 0 && fine_sign[i - 1] != fine_sign[i] {
            // Simple (odd) crossing: bisect the determinant sign.
            let (mut a, mut b) = (fine_e[i - 1], fine_e[i]);
            let mut sa = fine_sign[i - 1];
            for _ in 0..200 {
                if (b - a) <= 1e-13 * b.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (a + b);
                let sm = det_sign(&matching_matrix(g, kind, mid)?);
                if sm == 0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if sm == sa {
                    a = mid;
                } else {
                    b = mid;
                }
                let _ = sa;
                sa = det_sign(&matching_matrix(g, kind, a)?);
            }
            push_root(0.5 * (a + b), g, kind)?;
        }
    }
    // Even-multiplicity roots: singular-value dips without any sign
    // change on the refined grid across the coarse bracket.
    for i in 1..n {
        let dip = ratios[i] < ratios[i - 1] && ratios[i] <= ratios[i + 1] && ratios[i] < 0.1;
        let no_cross = fine_sign[(i - 1) * REFINE..=(i + 1) * REFINE]
            .windows(2)
            .all(|w| w[0] == w[1]);
        if dip && no_cross {
            let (e_min, r_min) = golden_min(
                |e| ratio_at(e).unwrap_or(1.0),
                energies[i - 1],
                energies[i + 1],
                1e-13 * energies[i + 1].abs().max(1.0),
            );
            if r_min < 1e-9 {
                push_root(e_min, g, kind)?;
            }
        }
    }

    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (e, m) in roots {
        match merged.last_mut() {
            Some((pe, pm)) if (e - *pe).abs() <= 1e-8 * e.abs().max(1.0) => {
                *pm = (*pm).max(m);
            }
            _ => merged.push((e, m)),
        }
    }
    let mut out = Vec::new();
    for (e, m) in merged {
        if e > e_lo && e <= e_hi {
            for _ in 0..m {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Kernel of `S(E)` at a root: per-edge coefficient vectors.
pub fn matching_kernel(
    g: &Graph,
    kind: CouplingKind,
    energy: f64,
) -> Result<Vec<DVector<f64>>, SolveError> {
    let m = matching_matrix(g, kind, energy)?;
    let (_, top) = sigma_extremes(&m);
    Ok(svd_kernel(&m, 1e-7 * top))
}

/// Interior-vertex trace of a matching eigenfunction: values for δ,
/// outward derivatives for δ′_s; the vector the reduction acts on.
pub fn vertex_trace(
    g: &Graph,
    kind: CouplingKind,
    coeffs: &DVector<f64>,
    energy: f64,
) -> VertexVector {
    let mut values = Vec::new();
    for &j in g.interior_vertices() {
        let inc = g.adjacency(j)[0];
        let e = g.edge(inc.edge);
        let b = edge_basis(e, energy);
        let (a_c, b_c) = (coeffs[2 * inc.edge.index()], coeffs[2 * inc.edge.index() + 1]);
        let at_from = e.from == j;
        let val = match kind {
            CouplingKind::Delta => {
                if at_from {
                    a_c
                } else {
                    a_c * b.cl + b_c * b.sl
                }
            }
            CouplingKind::DeltaPrimeS => {
                if at_from {
                    b_c
                } else {
                    -(a_c * b.cpl + b_c * b.spl)
                }
            }
        };
        values.push(val);
    }
    VertexVector::from_real(&values)
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

/// Classified comparison of a secular spectrum against a reference list.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub tol: f64,
    /// `(duality, reference)` pairs within tolerance.
    pub matched: Vec<(f64, f64)>,
    /// Reference roots missed inside exclusion windows (expected).
    pub expected_window_misses: Vec<f64>,
    /// Reference roots missed outside any window (failures).
    pub missing: Vec<f64>,
    /// Duality roots with no reference counterpart (failures).
    pub spurious: Vec<f64>,
    pub ok: bool,
}

/// Match duality roots (with multiplicity) greedily against a reference
/// eigenvalue list; `tol` is an absolute energy tolerance.
pub fn compare(duality: &SpectrumResult, reference: &[f64], tol: f64) -> CompareReport {
    let mut copies: Vec<(f64, bool)> = Vec::new();
    for r in &duality.roots {
        for _ in 0..r.multiplicity {
            copies.push((r.energy, false));
        }
    }
    let mut reference = reference.to_vec();
    reference.sort_by(f64::total_cmp);

    let mut matched = Vec::new();
    let mut expected = Vec::new();
    let mut missing = Vec::new();
    for &r in &reference {
        let best = copies
            .iter_mut()
            .filter(|(e, used)| !used && (e - r).abs() <= tol)
            .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()));
        match best {
            Some(slot) => {
                slot.1 = true;
                matched.push((slot.0, r));
            }
            None if duality.in_window(r) => expected.push(r),
            None => missing.push(r),
        }
    }
    let spurious: Vec<f64> = copies
        .iter()
        .filter(|(_, used)| !used)
        .map(|(e, _)| *e)
        .collect();
    let ok = missing.is_empty() && spurious.is_empty();
    CompareReport {
        tol,
        matched,
        expected_window_misses: expected,
        missing,
        spurious,
        ok,
    }
}
