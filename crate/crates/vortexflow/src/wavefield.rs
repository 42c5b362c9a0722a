//! Eigenstates, superpositions, the Bohmian velocity field, and local
//! quadratic expansions for 2D anisotropic harmonic-oscillator wavefunctions.
//!
//! Every supported wavefunction has the form
//! `psi(x, y, t) = env(x, y) * P(x, y, t)` with the real envelope
//! `env = exp(-(x^2 + c y^2)/2)` and a polynomial part
//! `P = sum_k coeff_k e^{-i E_k t} He_{n1}(x) He_{n2}(sqrt(c) y)`.
//! The velocity field `Im(grad psi / psi)` equals `Im(grad P / P)` because the
//! envelope is real, so all flow quantities are evaluated on `P` alone; this
//! keeps the numerics well conditioned far from the origin where `env`
//! underflows.

use num_complex::Complex64;
use thiserror::Error;

use crate::hermite::{he, he_d2};

/// Default cancellation threshold declaring a point (numerically) nodal.
pub const TOL_SINGULAR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("velocity field is singular at ({x}, {y}): |psi| below tolerance (nodal point)")]
    SingularField { x: f64, y: f64 },
    #[error("invalid wavefunction spec: {0}")]
    InvalidSpec(String),
}

/// One eigenstate term of a superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub n1: u32,
    pub n2: u32,
    pub coeff: Complex64,
}

/// A superposition of 2D oscillator eigenstates with frequency ratio `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpec {
    terms: Vec<Term>,
    c: f64,
    tol_singular: f64,
}

impl WaveSpec {
    pub fn new(terms: Vec<Term>, c: f64) -> Result<Self, FieldError> {
        if terms.is_empty() {
            return Err(FieldError::InvalidSpec("term list is empty".into()));
        }
        if !(c > 0.0) {
            return Err(FieldError::InvalidSpec(format!("c must be positive, got {c}")));
        }
        for (i, a) in terms.iter().enumerate() {
            for b in terms.iter().skip(i + 1) {
                if a.n1 == b.n1 && a.n2 == b.n2 {
                    return Err(FieldError::InvalidSpec(format!(
                        "duplicate quantum numbers ({}, {})",
                        a.n1, a.n2
                    )));
                }
            }
        }
        Ok(Self { terms, c, tol_singular: TOL_SINGULAR })
    }

    pub fn with_tol_singular(mut self, tol: f64) -> Self {
        self.tol_singular = tol;
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tol_singular(&self) -> f64 {
        self.tol_singular
    }

    /// True when the superposition can carry moving nodal lines: the terms
    /// must not all share the same `n1`, nor all the same `n2` (otherwise
    /// zeros exist only at isolated times).
    pub fn supports_moving_nodes(&self) -> bool {
        let n1 = self.terms[0].n1;
        let n2 = self.terms[0].n2;
        self.terms.iter().any(|t| t.n1 != n1) && self.terms.iter().any(|t| t.n2 != n2)
    }

    fn energy(&self, n1: u32, n2: u32) -> f64 {
        (0.5 + n1 as f64) + (0.5 + n2 as f64) * self.c
    }

    /// Polynomial part `P` together with first and second derivatives and a
    /// magnitude scale (sum of term moduli) used for cancellation tests.
    pub fn poly_derivs(&self, x: f64, y: f64, t: f64) -> PolyDerivs {
        let s = self.c.sqrt();
        let sy = s * y;
        let mut out = PolyDerivs::default();
        for term in &self.terms {
            let phase = Complex64::from_polar(1.0, -self.energy(term.n1, term.n2) * t);
            let w = term.coeff * phase;
            let (hx, hx1, hx2) = he_d2(term.n1, x);
            let (hy, hy1, hy2) = he_d2(term.n2, sy);
            out.p += w * (hx * hy);
            out.px += w * (hx1 * hy);
            out.py += w * (hx * s * hy1);
            out.pxx += w * (hx2 * hy);
            out.pyy += w * (hx * self.c * hy2);
            out.pxy += w * (hx1 * s * hy1);
            out.scale += w.norm() * (hx * hy).abs();
        }
        out
    }

    /// Real Gaussian envelope `exp(-(x^2 + c y^2)/2)`.
    pub fn envelope(&self, x: f64, y: f64) -> f64 {
        (-(x * x + self.c * y * y) / 2.0).exp()
    }

    /// Full wavefunction value.
    pub fn eval_psi(&self, x: f64, y: f64, t: f64) -> Complex64 {
        self.envelope(x, y) * self.poly_derivs(x, y, t).p
    }

    /// True when `(x, y)` is numerically a node: the polynomial part cancels
    /// below `tol_singular` relative to the sum of term magnitudes.
    pub fn is_singular_at(&self, x: f64, y: f64, t: f64) -> bool {
        let d = self.poly_derivs(x, y, t);
        d.p.norm() < self.tol_singular * d.scale.max(f64::MIN_POSITIVE)
    }

    /// Bohmian velocity `v = Im(grad psi / psi)`.
    pub fn velocity(&self, x: f64, y: f64, t: f64) -> Result<(f64, f64), FieldError> {
        let d = self.poly_derivs(x, y, t);
        if d.p.norm() < self.tol_singular * d.scale.max(f64::MIN_POSITIVE) {
            return Err(FieldError::SingularField { x, y });
        }
        Ok(((d.px / d.p).im, (d.py / d.p).im))
    }

    /// Velocity together with its (symmetric) spatial Jacobian, for the
    /// variational equations of motion.
    pub fn velocity_and_jacobian(
        &self,
        x: f64,
        y: f64,
        t: f64,
    ) -> Result<((f64, f64), [[f64; 2]; 2]), FieldError> {
        let d = self.poly_derivs(x, y, t);
        if d.p.norm() < self.tol_singular * d.scale.max(f64::MIN_POSITIVE) {
            return Err(FieldError::SingularField { x, y });
        }
        let gx = d.px / d.p;
        let gy = d.py / d.p;
        let jxx = (d.pxx / d.p - gx * gx).im;
        let jyy = (d.pyy / d.p - gy * gy).im;
        let jxy = (d.pxy / d.p - gx * gy).im;
        Ok(((gx.im, gy.im), [[jxx, jxy], [jxy, jyy]]))
    }

    /// Probability density and current `j = Re psi grad Im psi - Im psi grad Re psi`.
    ///
    /// Satisfies `j = rho * v` wherever the velocity is defined.
    pub fn density_and_current(&self, x: f64, y: f64, t: f64) -> (f64, (f64, f64)) {
        let d = self.poly_derivs(x, y, t);
        let env2 = {
            let e = self.envelope(x, y);
            e * e
        };
        let rho = env2 * d.p.norm_sqr();
        // Im(conj(P) grad P); the real envelope's log-gradient drops out.
        let jx = env2 * (d.p.conj() * d.px).im;
        let jy = env2 * (d.p.conj() * d.py).im;
        (rho, (jx, jy))
    }

    /// Quadratic expansion of `psi` about `(x0, y0)` in a frame of velocity `v_frame`.
    ///
    /// Coefficients are the analytic Taylor coefficients of `psi`; when the
    /// center is a node they are normalized to the divergence-free gauge (see
    /// [`LocalExpansion`]), which is the convention under which the co-moving
    /// frame formulas of [`crate::xcomplex`] hold.
    pub fn local_expansion(
        &self,
        x0: f64,
        y0: f64,
        t: f64,
        v_frame: (f64, f64),
    ) -> LocalExpansion {
        let d = self.poly_derivs(x0, y0, t);
        let env = self.envelope(x0, y0);
        let c = self.c;
        let psi0 = env * d.p;
        // derivative combinations of env * P
        let dx = env * (d.px - x0 * d.p);
        let dy = env * (d.py - c * y0 * d.p);
        let dxx = env * (d.pxx - 2.0 * x0 * d.px + (x0 * x0 - 1.0) * d.p);
        let dyy = env * (d.pyy - 2.0 * c * y0 * d.py + (c * c * y0 * y0 - c) * d.p);
        let dxy = env * (d.pxy - x0 * d.py - c * y0 * d.px + c * x0 * y0 * d.p);
        let mut exp = LocalExpansion {
            psi0,
            alpha: dx,
            beta: dy,
            gamma: dxx,
            delta: dyy,
            eps: dxy,
            center: (x0, y0),
            v_frame,
            t,
            gauge: (0.0, 0.0),
        };
        let is_node = d.p.norm() < 1e-8 * d.scale.max(f64::MIN_POSITIVE);
        if is_node {
            exp.apply_divergence_free_gauge();
        }
        exp
    }

    // --- named model families -------------------------------------------------

    /// `Psi_00 + a Psi_10 + b Psi_11`: the single-moving-node model.
    pub fn ekc(a: f64, b: f64, c: f64) -> WaveSpec {
        WaveSpec::new(
            vec![
                Term { n1: 0, n2: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { n1: 1, n2: 0, coeff: Complex64::new(a, 0.0) },
                Term { n1: 1, n2: 1, coeff: Complex64::new(b, 0.0) },
            ],
            c,
        )
        .expect("valid ekc spec")
    }

    /// `Psi_00 + a Psi_10 + b Psi_11 + eps Psi_20`: perturbed single node.
    pub fn case_eps20(a: f64, b: f64, eps: f64, c: f64) -> WaveSpec {
        WaveSpec::new(
            vec![
                Term { n1: 0, n2: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { n1: 1, n2: 0, coeff: Complex64::new(a, 0.0) },
                Term { n1: 1, n2: 1, coeff: Complex64::new(b, 0.0) },
                Term { n1: 2, n2: 0, coeff: Complex64::new(eps, 0.0) },
            ],
            c,
        )
        .expect("valid eps20 spec")
    }

    /// `Psi_00 + a Psi_20 + b Psi_11`: zero or two simultaneous nodes.
    pub fn case20(a: f64, b: f64, c: f64) -> WaveSpec {
        WaveSpec::new(
            vec![
                Term { n1: 0, n2: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { n1: 2, n2: 0, coeff: Complex64::new(a, 0.0) },
                Term { n1: 1, n2: 1, coeff: Complex64::new(b, 0.0) },
            ],
            c,
        )
        .expect("valid case20 spec")
    }

    /// `Psi_00 + a Psi_30 + b Psi_11`: one or three simultaneous nodes.
    pub fn case30(a: f64, b: f64, c: f64) -> WaveSpec {
        WaveSpec::new(
            vec![
                Term { n1: 0, n2: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { n1: 3, n2: 0, coeff: Complex64::new(a, 0.0) },
                Term { n1: 1, n2: 1, coeff: Complex64::new(b, 0.0) },
            ],
            c,
        )
        .expect("valid case30 spec")
    }
}

/// Polynomial part of the wavefunction with derivatives at a point.
#[derive(Debug, Default, Clone, Copy)]
pub struct PolyDerivs {
    pub p: Complex64,
    pub px: Complex64,
    pub py: Complex64,
    pub pxx: Complex64,
    pub pyy: Complex64,
    pub pxy: Complex64,
    /// Sum of individual term magnitudes; `|p| << scale` flags a node.
    pub scale: f64,
}

/// Single eigenstate value `e^{-i E t} e^{-x^2/2} He_{n1}(x) e^{-c y^2/2} He_{n2}(sqrt(c) y)`.
pub fn eval_eigenstate(n1: u32, n2: u32, x: f64, y: f64, t: f64, c: f64) -> Complex64 {
    let energy = (0.5 + n1 as f64) + (0.5 + n2 as f64) * c;
    let env = (-(x * x + c * y * y) / 2.0).exp();
    Complex64::from_polar(1.0, -energy * t) * env * he(n1, x) * he(n2, c.sqrt() * y)
}

/// Degree-2 expansion of `psi` about a point, in a frame moving with `v_frame`.
///
/// `psi(x0+u, y0+v) ~ e^{-(ru u + rv v)} [psi0 + (a10+ib10) u + (a01+ib01) v
/// + (a20+ib20) u^2/2 + (a02+ib02) v^2/2 + (a11+ib11) u v]`.
///
/// The real exponential prefactor (`gauge`) is the divergence-free gauge: at a
/// nodal center the pair `(ru, rv)` is chosen so that `a02 = -a20` and
/// `b02 = -b20` hold exactly. The gauge factor is positive real, so it changes
/// no flow quantity; away from nodes it is identity.
#[derive(Debug, Clone, Copy)]
pub struct LocalExpansion {
    pub psi0: Complex64,
    /// d psi / du
    pub alpha: Complex64,
    /// d psi / dv
    pub beta: Complex64,
    /// d^2 psi / du^2
    pub gamma: Complex64,
    /// d^2 psi / dv^2
    pub delta: Complex64,
    /// d^2 psi / du dv
    pub eps: Complex64,
    pub center: (f64, f64),
    pub v_frame: (f64, f64),
    pub t: f64,
    /// `(ru, rv)` of the divergence-free gauge factor.
    pub gauge: (f64, f64),
}

impl LocalExpansion {
    pub fn a10(&self) -> f64 { self.alpha.re }
    pub fn b10(&self) -> f64 { self.alpha.im }
    pub fn a01(&self) -> f64 { self.beta.re }
    pub fn b01(&self) -> f64 { self.beta.im }
    pub fn a20(&self) -> f64 { self.gamma.re }
    pub fn b20(&self) -> f64 { self.gamma.im }
    pub fn a02(&self) -> f64 { self.delta.re }
    pub fn b02(&self) -> f64 { self.delta.im }
    pub fn a11(&self) -> f64 { self.eps.re }
    pub fn b11(&self) -> f64 { self.eps.im }

    /// `d0 = a10 b01 - a01 b10`; nonzero exactly when the node is simple.
    pub fn d0(&self) -> f64 {
        (self.beta * self.alpha.conj()).im
    }

    /// Rescale the expansion by a real linear envelope `e^{ru u + rv v}` so
    /// that `gamma + delta = 0` (divergence-free constraint). Requires
    /// `d0 != 0`; leaves the expansion untouched on a degenerate node. A real
    /// envelope changes no flow quantity derived from the expansion.
    pub fn apply_divergence_free_gauge(&mut self) {
        let d0 = self.d0();
        if d0.abs() < 1e-300 {
            return;
        }
        let rhs = -(self.gamma + self.delta);
        // solve [2 Re a, 2 Re b; 2 Im a, 2 Im b] (ru, rv)^T = (Re rhs, Im rhs)^T
        let det = 4.0 * (self.alpha.re * self.beta.im - self.beta.re * self.alpha.im);
        let ru = (rhs.re * 2.0 * self.beta.im - rhs.im * 2.0 * self.beta.re) / det;
        let rv = (rhs.im * 2.0 * self.alpha.re - rhs.re * 2.0 * self.alpha.im) / det;
        // exact Taylor coefficients of e^{ru u + rv v} psi
        self.gamma += 2.0 * ru * self.alpha + ru * ru * self.psi0;
        self.delta += 2.0 * rv * self.beta + rv * rv * self.psi0;
        self.eps += rv * self.alpha + ru * self.beta + ru * rv * self.psi0;
        self.alpha += ru * self.psi0;
        self.beta += rv * self.psi0;
        self.gauge.0 += ru;
        self.gauge.1 += rv;
    }

    /// Value of the expansion at offset `(u, v)` from the center, including
    /// the gauge prefactor, approximating `psi(x0+u, y0+v)` to `O(R^3)`.
    pub fn reconstruct(&self, u: f64, v: f64) -> Complex64 {
        let poly = self.psi0
            + self.alpha * u
            + self.beta * v
            + 0.5 * self.gamma * (u * u)
            + 0.5 * self.delta * (v * v)
            + self.eps * (u * v);
        (-(self.gauge.0 * u + self.gauge.1 * v)).exp() * poly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn eigenstate_ground_state_at_origin() {
        let v = eval_eigenstate(0, 0, 0.0, 0.0, 0.0, C);
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenstate_20_vanishes_at_unit_x() {
        let v = eval_eigenstate(2, 0, 1.0, 0.0, 0.0, C);
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenstate_30_matches_explicit_formula() {
        // e^{-i(7+c)t/2} e^{-(x^2+c y^2)/2} (x^3 - 3x), frozen independent evaluation
        let (x, y, t) = (0.5, 0.3, 1.7);
        let expected_phase = -(7.0 + C) * t / 2.0;
        let expected = Complex64::from_polar(
            (-(x * x + C * y * y) / 2.0_f64).exp() * (x * x * x - 3.0 * x),
            expected_phase,
        );
        let got = eval_eigenstate(3, 0, x, y, t, C);
        assert_abs_diff_eq!(got.re, expected.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, expected.im, epsilon = 1e-14);
    }

    #[test]
    fn psi_single_term_equals_eigenstate() {
        let spec = WaveSpec::new(
            vec![Term { n1: 2, n2: 1, coeff: Complex64::new(0.3, -0.7) }],
            C,
        )
        .unwrap();
        let (x, y, t) = (0.4, -1.1, 2.3);
        let a = spec.eval_psi(x, y, t);
        let b = Complex64::new(0.3, -0.7) * eval_eigenstate(2, 1, x, y, t, C);
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn psi_00_plus_20_cancels_at_origin() {
        let spec = WaveSpec::new(
            vec![
                Term { n1: 0, n2: 0, coeff: Complex64::new(1.0, 0.0) },
                Term { n1: 2, n2: 0, coeff: Complex64::new(1.0, 0.0) },
            ],
            C,
        )
        .unwrap();
        assert_abs_diff_eq!(spec.eval_psi(0.0, 0.0, 0.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ekc_vanishes_on_analytic_nodal_line() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        let t = 1.25;
        let x0 = -((1.0 + C) * t).sin() / (C * t).sin();
        let y0 = -t.sin() / (C.sqrt() * ((1.0 + C) * t).sin());
        assert!(spec.eval_psi(x0, y0, t).norm() < 1e-12);
    }

    #[test]
    fn pure_eigenstate_velocity_vanishes() {
        let spec = WaveSpec::new(
            vec![Term { n1: 2, n2: 1, coeff: Complex64::new(1.0, 0.0) }],
            C,
        )
        .unwrap();
        let (vx, vy) = spec.velocity(0.7, 0.4, 3.1).unwrap();
        assert_abs_diff_eq!(vx, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(vy, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn velocity_errors_at_node() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        let t = 1.25;
        let x0 = -((1.0 + C) * t).sin() / (C * t).sin();
        let y0 = -t.sin() / (C.sqrt() * ((1.0 + C) * t).sin());
        assert!(matches!(
            spec.velocity(x0, y0, t),
            Err(FieldError::SingularField { .. })
        ));
    }

    #[test]
    fn current_equals_density_times_velocity() {
        let spec = WaveSpec::case20(1.23, 1.15, C);
        for &(x, y, t) in &[(0.3, 0.8, 1.1), (-1.2, 0.4, 5.9), (2.0, -0.7, 0.33)] {
            let (rho, (jx, jy)) = spec.density_and_current(x, y, t);
            let (vx, vy) = spec.velocity(x, y, t).unwrap();
            assert_abs_diff_eq!(jx, rho * vx, epsilon = 1e-10);
            assert_abs_diff_eq!(jy, rho * vy, epsilon = 1e-10);
        }
    }

    #[test]
    fn pure_eigenstate_current_is_zero() {
        let spec = WaveSpec::new(
            vec![Term { n1: 1, n2: 2, coeff: Complex64::new(1.0, 0.0) }],
            C,
        )
        .unwrap();
        let (_, (jx, jy)) = spec.density_and_current(0.5, -0.3, 2.0);
        assert_abs_diff_eq!(jx, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(jy, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expansion_psi0_matches_eval_psi_at_non_node() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        let exp = spec.local_expansion(0.3, 0.4, 1.0, (0.0, 0.0));
        let direct = spec.eval_psi(0.3, 0.4, 1.0);
        assert_abs_diff_eq!((exp.psi0 - direct).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expansion_is_divergence_free_at_node() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        for &t in &[0.7, 1.25, 2.6, 5.3] {
            let x0 = -((1.0 + C) * t).sin() / (C * t).sin();
            let y0 = -t.sin() / (C.sqrt() * ((1.0 + C) * t).sin());
            // crude frame velocity; gauge must work for any V
            let exp = spec.local_expansion(x0, y0, t, (1.0, -0.5));
            assert!((exp.a02() + exp.a20()).abs() < 1e-10 * exp.a20().abs().max(1.0));
            assert!((exp.b02() + exp.b20()).abs() < 1e-10 * exp.b20().abs().max(1.0));
        }
    }

    #[test]
    fn expansion_residual_is_cubic_in_radius() {
        let spec = WaveSpec::case30(1.23, 1.15, C);
        let t = 1.3;
        // expansion about a generic (non-nodal) point, rest frame
        let exp = spec.local_expansion(0.42, -0.37, t, (0.0, 0.0));
        let dir = (0.6_f64, 0.8_f64);
        let mut prev_ratio = f64::INFINITY;
        for k in 3..9 {
            let r = 2.0_f64.powi(-k);
            let (u, v) = (r * dir.0, r * dir.1);
            let res = (spec.eval_psi(0.42 + u, -0.37 + v, t) - exp.reconstruct(u, v)).norm();
            let ratio = res / (r * r * r);
            // ratio must stay bounded as r -> 0 (allow roundoff floor)
            assert!(ratio < 2.0 * prev_ratio.max(1.0), "ratio {ratio} at r={r}");
            prev_ratio = ratio;
        }
    }
}
