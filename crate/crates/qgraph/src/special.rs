//! Canonical solutions of `f'' + μ f = 0` as entire functions of `μ`.
//!
//! On an interval with constant potential `V0`, the equation
//! `-f'' + V0 f = E f` becomes `f'' + μ f = 0` with `μ = E − V0`. Its
//! canonical solutions with data at `x = 0` are
//!
//! * `C(x; μ)` with `C(0) = 1, C'(0) = 0`: `cos(√μ x)` for `μ > 0`,
//!   `cosh(√−μ x)` for `μ < 0`, `1` at `μ = 0`;
//! * `S(x; μ)` with `S(0) = 0, S'(0) = 1`: `sin(√μ x)/√μ`, `x`, or
//!   `sinh(√−μ x)/√−μ` accordingly.
//!
//! Both are entire in `μ`, so no branch cut appears at `E ≤ V0`. Near
//! `μ = 0` the closed forms suffer cancellation and the truncated
//! Taylor series in `t = μ x²` is used instead.
//!
//! Derivatives follow from `S' = C` and `C' = -μ S`, and the constant
//! Wronskian gives `C² + μ S² = 1`.

/// Series/closed-form switch: the Taylor branch is used for `|μ| x² < T`.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Evaluate `(C(x; μ), S(x; μ))`.
pub fn cs(mu: f64, x: f64) -> (f64, f64) {
    let t = mu * x * x;
    if t.abs() < SERIES_THRESHOLD {
        return cs_series(t, x);
    }
    if mu > 0.0 {
        let w = mu.sqrt();
        ((w * x).cos(), (w * x).sin() / w)
    } else {
        let w = (-mu).sqrt();
        ((w * x).cosh(), (w * x).sinh() / w)
    }
}

fn cs_series(t: f64, x: f64) -> (f64, f64) {
    // C = Σ (−t)^n / (2n)!,  S = x Σ (−t)^n / (2n+1)!,  six terms each.
    let c = 1.0
        + t * (-1.0 / 2.0
            + t * (1.0 / 24.0
                + t * (-1.0 / 720.0 + t * (1.0 / 40320.0 + t * (-1.0 / 3628800.0)))));
    let s = 1.0
        + t * (-1.0 / 6.0
            + t * (1.0 / 120.0
                + t * (-1.0 / 5040.0 + t * (1.0 / 362880.0 + t * (-1.0 / 39916800.0)))));
    (c, x * s)
}

/// Exact integrals of products of the canonical solutions over `[0, x]`.
#[derive(Debug, Clone, Copy)]
pub struct BasisIntegrals {
    /// `∫ C² dx`
    pub cc: f64,
    /// `∫ C S dx`
    pub cs: f64,
    /// `∫ S² dx`
    pub ss: f64,
}

/// Integrate `C²`, `CS` and `S²` over `[0, x]` in closed form.
///
/// From `d(S²)/dx = 2SC` and `d(SC)/dx = C² − μS²` together with the
/// Wronskian identity `C² + μS² = 1`:
///
/// `∫CS = S²/2`, `∫C² = (x + SC)/2`, `∫S² = (x − SC)/(2μ)`,
///
/// the last one evaluated by series for small `|μ| x²`.
pub fn basis_integrals(mu: f64, x: f64) -> BasisIntegrals {
    let (c, s) = cs(mu, x);
    let icc = 0.5 * (x + s * c);
    let ics = 0.5 * s * s;
    let t = mu * x * x;
    let iss = if t.abs() < SERIES_THRESHOLD {
        // ∫S² = x³ (1/3 − t/15 + 2t²/315 − t³/2835 + 2t⁴/155925 − …)
        x * x
            * x
            * (1.0 / 3.0
                + t * (-1.0 / 15.0
                    + t * (2.0 / 315.0 + t * (-1.0 / 2835.0 + t * (2.0 / 155925.0)))))
    } else {
        (x - s * c) / (2.0 * mu)
    };
    BasisIntegrals {
        cc: icc,
        cs: ics,
        ss: iss,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms_positive_mu() {
        let (c, s) = cs(PI * PI, 1.0);
        assert!((c + 1.0).abs() < 1e-14, "C(1; π²) = cos π = −1, got {c}");
        assert!(s.abs() < 1e-14, "S(1; π²) = sin π / π = 0, got {s}");
    }

    #[test]
    fn closed_forms_negative_mu() {
        let (c, s) = cs(-1.0, 1.0);
        assert!((c - 1.0f64.cosh()).abs() < 1e-14);
        assert!((s - 1.0f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn wronskian_identity_across_branches() {
        for &mu in &[-30.0, -1.0, -1e-6, 0.0, 1e-6, 0.3, 9.0, 144.0] {
            for &x in &[0.1, 0.5, 1.0, 2.5] {
                let (c, s) = cs(mu, x);
                let w = c * c + mu * s * s;
                let scale = (c * c + mu.abs() * s * s).max(1.0);
                assert!(
                    (w - 1.0).abs() < 1e-12 * scale,
                    "C² + μS² = {w} at μ={mu}, x={x}"
                );
            }
        }
    }

    #[test]
    fn series_branch_is_smooth_in_mu() {
        // Central finite difference of S(1; μ) across μ = 0 against the
        // series derivative dS/dμ|₀ = −x³/6.
        let x = 1.3;
        let h = 5e-4; // far side of both branches
        let (_, sp) = cs(h, x);
        let (_, sm) = cs(-h, x);
        let fd = (sp - sm) / (2.0 * h);
        let exact = -x * x * x / 6.0;
        assert!(
            (fd - exact).abs() < 1e-8,
            "dS/dμ mismatch across branches: fd={fd}, exact={exact}"
        );
    }

    #[test]
    fn integrals_match_simpson_quadrature() {
        // Composite Simpson with a fine mesh as an independent check.
        let quad = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let n = 4000;
            let h = (b - a) / n as f64;
            let mut sum = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * f(a + i as f64 * h);
            }
            sum * h / 3.0
        };
        for &mu in &[-9.0, -2e-5, 0.0, 3e-5, 2.0, 50.0] {
            let x = 1.7;
            let ints = basis_integrals(mu, x);
            let icc = quad(&|y| cs(mu, y).0.powi(2), 0.0, x);
            let ics = quad(&|y| cs(mu, y).0 * cs(mu, y).1, 0.0, x);
            let iss = quad(&|y| cs(mu, y).1.powi(2), 0.0, x);
            assert!((ints.cc - icc).abs() < 1e-9, "cc at μ={mu}");
            assert!((ints.cs - ics).abs() < 1e-9, "cs at μ={mu}");
            assert!((ints.ss - iss).abs() < 1e-9, "ss at μ={mu}");
        }
    }
}
