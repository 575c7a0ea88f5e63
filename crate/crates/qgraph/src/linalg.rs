//! Dense Hermitian matrices (real-symmetric storage when possible) and
//! the few factorisation helpers the secular solvers need: eigenvalue
//! inertia, kernel extraction, sign-tracked determinants and singular
//! value extremes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Hermitian matrix kept in real-symmetric storage when every entry is
/// real (cheaper eigensolves), complex otherwise.
#[derive(Debug, Clone)]
pub enum HermMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl HermMatrix {
    pub fn dim(&self) -> usize {
        match self {
            HermMatrix::Real(m) => m.nrows(),
            HermMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, HermMatrix::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self {
            HermMatrix::Real(m) => Complex64::new(m[(i, j)], 0.0),
            HermMatrix::Complex(m) => m[(i, j)],
        }
    }

    /// Largest entry magnitude.
    pub fn norm_inf(&self) -> f64 {
        match self {
            HermMatrix::Real(m) => m.iter().fold(0.0, |a, x| a.max(x.abs())),
            HermMatrix::Complex(m) => m.iter().fold(0.0, |a, x| a.max(x.norm())),
        }
    }

    /// Largest deviation from Hermitian symmetry, entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order (real, by Hermitian symmetry).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = match self {
            HermMatrix::Real(m) => m.clone().symmetric_eigen().eigenvalues.iter().copied().collect(),
            HermMatrix::Complex(m) => m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect(),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Count of eigenvalues `< 0`, the matrix inertia used for secular
    /// root counting (immune to determinant overflow).
    pub fn negative_count(&self) -> usize {
        self.eigenvalues().iter().filter(|&&x| x < 0.0).count()
    }

    /// Eigenvectors whose eigenvalue magnitude is at most `tol`,
    /// as complex vectors.
    ///
    /// Eigenvectors from the QR iteration carry a residual well above
    /// machine precision on some matrices, so each candidate is
    /// sharpened by inverse iteration (an LU solve amplifies the
    /// near-null direction by `1/λ`); the refined set is then
    /// re-orthonormalised.
    pub fn kernel_vectors(&self, tol: f64) -> Vec<DVector<Complex64>> {
        let mut out = match self {
            HermMatrix::Real(m) => {
                let eig = m.clone().symmetric_eigen();
                let mut out = Vec::new();
                for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                    if lam.abs() <= tol {
                        out.push(DVector::from_iterator(
                            m.nrows(),
                            eig.eigenvectors.column(i).iter().map(|&x| Complex64::new(x, 0.0)),
                        ));
                    }
                }
                out
            }
            HermMatrix::Complex(m) => {
                let eig = m.clone().symmetric_eigen();
                let mut out = Vec::new();
                for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                    if lam.abs() <= tol {
                        out.push(DVector::from_iterator(
                            m.nrows(),
                            eig.eigenvectors.column(i).iter().copied(),
                        ));
                    }
                }
                out
            }
        };
        for v in &mut out {
            self.sharpen_null_vector(v);
        }
        // Modified Gram–Schmidt across the refined kernel basis.
        for i in 0..out.len() {
            let (head, tail) = out.split_at_mut(i);
            let v = &mut tail[0];
            for u in head.iter() {
                let proj = u.dotc(v);
                *v -= u * proj;
            }
            let n = v.norm();
            if n > 0.0 {
                *v /= Complex64::new(n, 0.0);
            }
        }
        out
    }

    /// Two inverse-iteration steps toward the null space; keeps the
    /// input when a solve fails or does not reduce the residual.
    fn sharpen_null_vector(&self, v: &mut DVector<Complex64>) {
        let solve = |rhs: &DVector<Complex64>| -> Option<DVector<Complex64>> {
            let sol = match self {
                HermMatrix::Real(m) => {
                    let re = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.re));
                    let im = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.im));
                    let lu = m.clone().full_piv_lu();
                    let xr = lu.solve(&re)?;
                    let xi = lu.solve(&im)?;
                    DVector::from_iterator(
                        rhs.len(),
                        xr.iter().zip(xi.iter()).map(|(&r, &i)| Complex64::new(r, i)),
                    )
                }
                HermMatrix::Complex(m) => m.clone().full_piv_lu().solve(rhs)?,
            };
            sol.iter().all(|z| z.is_finite()).then_some(sol)
        };
        for _ in 0..2 {
            let Some(next) = solve(v) else { return };
            let n = next.norm();
            if n == 0.0 {
                return;
            }
            let candidate = next / Complex64::new(n, 0.0);
            if self.apply_residual(&candidate) < self.apply_residual(v) {
                *v = candidate;
            } else {
                return;
            }
        }
    }

    /// `‖M x‖₂ / ‖x‖₂`, the residual of a candidate kernel vector.
    pub fn apply_residual(&self, x: &DVector<Complex64>) -> f64 {
        let nx = x.norm();
        if nx == 0.0 {
            return 0.0;
        }
        match self {
            HermMatrix::Real(m) => {
                let xr = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
                let xi = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
                let yr = m * xr;
                let yi = m * xi;
                (yr.norm_squared() + yi.norm_squared()).sqrt() / nx
            }
            HermMatrix::Complex(m) => (m * x).norm() / nx,
        }
    }
}

/// Sign of `det M` via partially pivoted LU with row equilibration;
/// only pivot signs and the permutation parity are accumulated, so no
/// overflow can occur in the sign. Returns 0 for an exactly singular
/// pivot.
pub fn det_sign(m: &DMatrix<f64>) -> i8 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut sign = 1i8;
    for i in 0..n {
        let scale = a.row(i).iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if scale == 0.0 {
            return 0;
        }
        for j in 0..n {
            a[(i, j)] /= scale;
        }
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].abs();
        for r in col + 1..n {
            if a[(r, col)].abs() > best {
                best = a[(r, col)].abs();
                piv = r;
            }
        }
        if best == 0.0 {
            return 0;
        }
        if piv != col {
            a.swap_rows(piv, col);
            sign = -sign;
        }
        if a[(col, col)] < 0.0 {
            sign = -sign;
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            for c in col + 1..n {
                a[(r, c)] -= f * a[(col, c)];
            }
        }
    }
    sign
}

/// Smallest and largest singular values.
pub fn sigma_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().singular_values();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &s in sv.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

/// Right singular vectors whose singular value is at most `tol`.
pub fn svd_kernel(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            out.push(DVector::from_iterator(
                m.ncols(),
                vt.row(i).iter().copied(),
            ));
        }
    }
    out
}

/// Golden-section minimisation of a unimodal scalar function on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_inertia_counts_negatives() {
        let m = HermMatrix::Real(DMatrix::from_row_slice(3, 3, &[
            2.0, 1.0, 0.0, //
            1.0, -3.0, 0.5, //
            0.0, 0.5, -1.0,
        ]));
        let ev = m.eigenvalues();
        let negs = ev.iter().filter(|&&x| x < 0.0).count();
        assert_eq!(m.negative_count(), negs);
        assert!(m.hermiticity_defect() == 0.0);
    }

    #[test]
    fn complex_hermitian_eigenvalues_are_real_sorted() {
        let i = Complex64::i();
        let m = HermMatrix::Complex(DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            0.5 * i,
            -0.5 * i,
            Complex64::new(-1.0, 0.0),
        ]));
        assert!(m.hermiticity_defect() < 1e-15);
        let ev = m.eigenvalues();
        assert_eq!(ev.len(), 2);
        assert!(ev[0] < ev[1]);
        // Eigenvalues of [[1, i/2], [-i/2, -1]] are ±√(1 + 1/4).
        let r = (1.25f64).sqrt();
        assert!((ev[0] + r).abs() < 1e-12);
        assert!((ev[1] - r).abs() < 1e-12);
    }

    #[test]
    fn det_sign_tracks_pivots_and_permutations() {
        let m = DMatrix::from_row_slice(3, 3, &[
            0.0, 2.0, 0.0, //
            1.0, 0.0, 0.0, //
            0.0, 0.0, 3.0,
        ]);
        // det = −6
        assert_eq!(det_sign(&m), -1);
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(det_sign(&id), 1);
        let mut sing = id.clone();
        sing[(2, 2)] = 0.0;
        assert_eq!(det_sign(&sing), 0);
    }

    #[test]
    fn kernel_vector_extraction() {
        let m = HermMatrix::Real(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let kers = m.kernel_vectors(1e-12);
        assert_eq!(kers.len(), 1);
        let k = &kers[0];
        assert!((k[0] + k[1]).norm() < 1e-12, "kernel is (1, −1)/√2");
        assert!(m.apply_residual(k) < 1e-12);
    }

    #[test]
    fn golden_section_finds_v_shaped_minimum() {
        let (x, fx) = golden_min(|x| (x - 0.3).abs() + 1.0, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-10);
        assert!((fx - 1.0).abs() < 1e-10);
    }
}
