//! The nodal point – X-point complex in the co-moving frame.
//!
//! Given a local expansion of the wavefunction about a moving nodal point,
//! this module locates the companion X-point (the saddle of the frozen
//! moving-frame flow), computes its eigenstructure, evaluates the
//! angle-averaged cubic coefficient `<f3>` whose sign decides attractor vs
//! repellor, scans for Hopf bifurcations, and checks the adiabaticity
//! conditions under which the frozen-flow picture is valid.

use num_complex::Complex64;
use thiserror::Error;

use crate::nodal::{self, NodalState};
use crate::wavefield::{LocalExpansion, WaveSpec};

/// Threshold for adiabaticity condition (a), `|V - V0|/|V| << 1`.
pub const THETA_A: f64 = 0.1;
/// Frame-velocity mismatch above which a converged X-point near a foreign
/// node is rejected as spurious.
pub const THETA_SPURIOUS: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum ComplexError {
    #[error("moving-frame field is singular at the nodal point")]
    SingularField,
    #[error("X-point guess degenerate: {0}")]
    DegenerateGuess(String),
    #[error("Newton refinement of the X-point did not converge")]
    NoConvergence,
    #[error("converged stationary point rejected as spurious: {0}")]
    SpuriousXPoint(String),
    #[error("degenerate nodal point (d0 ~ 0)")]
    DegenerateNode,
    #[error("<f3> is infinite at t = {t} (pole of the nodal line)")]
    InfiniteF3 { t: f64 },
}

/// Stability class of the nodal point in the moving frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Attractor,
    Repellor,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Clockwise,
    Counterclockwise,
}

/// A fully diagnosed nodal point – X-point complex at one instant.
#[derive(Debug, Clone)]
pub struct ComplexSnapshot {
    pub node: NodalState,
    /// X-point position in the co-moving frame.
    pub xpoint: (f64, f64),
    pub r_x: f64,
    pub eigenvalues: (f64, f64),
    pub eigenvectors: [(f64, f64); 2],
    pub f3: f64,
    pub d0: f64,
    pub classification: Classification,
    pub rotation: Rotation,
    /// `|V - V0|/|V|` for the frame the snapshot was computed in.
    pub adiabatic_a: f64,
    /// `R_X`, the size of the complex (condition (b) wants `< 1`).
    pub adiabatic_b: f64,
    pub t: f64,
    /// Newton iterations spent refining the X-point.
    pub iterations: u32,
}

// Angular polynomials of the polar-form flow near the node:
// G R' = c2(phi) R^2 + c3(phi) R^3 + ..., G phi' = d0 + d1(phi) R + ...
struct Polar {
    p: [f64; 4],
    q: [f64; 4],
    bhat: f64,
    dhat: f64,
    chat: f64,
    g3: [f64; 4],
    d0: f64,
    vx: f64,
    vy: f64,
}

fn im(z: Complex64) -> f64 {
    z.im
}

impl Polar {
    fn new(exp: &LocalExpansion) -> Polar {
        let (a, b, g, d, e) = (exp.alpha, exp.beta, exp.gamma, exp.delta, exp.eps);
        Polar {
            p: [
                im(a * b.conj()),
                0.5 * im(g * a.conj()),
                im(e * b.conj()) + 0.5 * im(a * d.conj()),
                im(g * b.conj()),
            ],
            q: [
                im(b * a.conj()),
                im(e * a.conj()) + 0.5 * im(b * g.conj()),
                0.5 * im(d * b.conj()),
                im(d * a.conj()),
            ],
            bhat: a.norm_sqr(),
            dhat: b.norm_sqr(),
            chat: (a * b.conj()).re,
            g3: [
                (a * g.conj()).re,
                2.0 * (a * e.conj()).re + (b * g.conj()).re,
                (a * d.conj()).re + 2.0 * (b * e.conj()).re,
                (b * d.conj()).re,
            ],
            d0: im(b * a.conj()),
            vx: exp.v_frame.0,
            vy: exp.v_frame.1,
        }
    }

    fn ghat(&self, co: f64, si: f64) -> f64 {
        self.bhat * co * co + self.dhat * si * si + 2.0 * self.chat * si * co
    }

    /// `(c2, c3, d1)` at angle `phi`.
    fn coeffs(&self, phi: f64) -> (f64, f64, f64) {
        let (si, co) = phi.sin_cos();
        let ghat = self.ghat(co, si);
        let w = self.vx * co + self.vy * si;
        let wt = self.vy * co - self.vx * si;
        let c2 = self.p[1] * co.powi(3)
            + (self.p[3] + self.q[1]) * co * co * si
            + (self.p[2] + self.q[3]) * co * si * si
            + self.q[2] * si.powi(3)
            - ghat * w;
        let g3 = self.g3[0] * co.powi(3)
            + self.g3[1] * co * co * si
            + self.g3[2] * co * si * si
            + self.g3[3] * si.powi(3);
        let c3 = -g3 * w;
        let d1 = self.q[1] * co.powi(3)
            + (self.q[3] - self.p[1]) * co * co * si
            + (self.q[2] - self.p[3]) * co * si * si
            - self.p[2] * si.powi(3)
            - ghat * wt;
        (c2, c3, d1)
    }
}

/// Quadratic-model moving-frame flow `(du/dt, dv/dt)` at offset `(u, v)`.
///
/// The expansion form of the equations of motion: numerators built from the
/// expansion coefficients, divided by `G = |psi_expansion|^2`, minus the frame
/// velocity. Valid near a nodal expansion center.
pub fn moving_frame_rhs(
    exp: &LocalExpansion,
    u: f64,
    v: f64,
) -> Result<(f64, f64), ComplexError> {
    if u == 0.0 && v == 0.0 {
        return Err(ComplexError::SingularField);
    }
    let pol = Polar::new(exp);
    let nu = pol.p[0] * v + pol.p[1] * u * u + pol.p[2] * v * v + pol.p[3] * u * v;
    let nv = pol.q[0] * u + pol.q[1] * u * u + pol.q[2] * v * v + pol.q[3] * u * v;
    let psi = exp.alpha * u
        + exp.beta * v
        + 0.5 * exp.gamma * (u * u)
        + 0.5 * exp.delta * (v * v)
        + exp.eps * (u * v);
    let g = psi.norm_sqr();
    if g < 1e-300 {
        return Err(ComplexError::SingularField);
    }
    Ok((nu / g - exp.v_frame.0, nv / g - exp.v_frame.1))
}

/// `<f3>` by direct angular quadrature of `c3/d0 - c2 d1 / d0^2`.
///
/// The integrand is a trigonometric polynomial of low degree, so the
/// midpoint rule over a modest number of angles is exact to roundoff. This is
/// the reference oracle for the closed-form evaluation.
pub fn f3_quadrature(exp: &LocalExpansion) -> Result<f64, ComplexError> {
    let pol = Polar::new(exp);
    if pol.d0.abs() < 1e-14 * (pol.bhat * pol.dhat).sqrt().max(1e-300) {
        return Err(ComplexError::DegenerateNode);
    }
    let n = 64;
    let mut acc = 0.0;
    for k in 0..n {
        let phi = (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / n as f64;
        let (c2, c3, d1) = pol.coeffs(phi);
        acc += c3 / pol.d0 - c2 * d1 / (pol.d0 * pol.d0);
    }
    Ok(acc / n as f64)
}

/// `<f3>` from the closed-form polynomial in the expansion coefficients.
///
/// Requires the divergence-free normalization `a02 = -a20`, `b02 = -b20`;
/// any expansion is first brought to that gauge (no flow quantity changes).
pub fn f3_generic(exp: &LocalExpansion) -> Result<f64, ComplexError> {
    let mut e = *exp;
    e.apply_divergence_free_gauge();
    let (a10, b10) = (e.a10(), e.b10());
    let (a01, b01) = (e.a01(), e.b01());
    let (a02, b02) = (e.a02(), e.b02());
    let (a11, b11) = (e.a11(), e.b11());
    let d0 = a10 * b01 - a01 * b10;
    let scale = (a10 * a10 + b10 * b10) * (a01 * a01 + b01 * b01);
    if d0 * d0 < 1e-24 * scale.max(1e-300) {
        return Err(ComplexError::DegenerateNode);
    }
    let (vx, vy) = e.v_frame;
    let tx = 2.0 * a01 * a10 * a10 * b02 + a01 * a01 * a11 * b10 - a10 * a10 * a11 * b10
        - 2.0 * a10 * a02 * a01 * b10
        + a11 * b01 * b01 * b10
        + 2.0 * a10 * b01 * b02 * b10
        - 2.0 * a02 * b01 * b10 * b10
        - a11 * b10 * b10 * b10
        - a01 * a01 * a10 * b11
        + a10 * a10 * a10 * b11
        - a10 * b01 * b01 * b11
        + a10 * b10 * b10 * b11;
    let ty = 2.0 * a01 * a02 * a10 * b01 - 2.0 * a10 * a01 * a01 * b02 + a10 * a10 * a11 * b01
        - a01 * a01 * a11 * b01
        + a11 * b10 * b10 * b01
        + 2.0 * a02 * b10 * b01 * b01
        - 2.0 * a01 * b10 * b02 * b01
        - a11 * b01 * b01 * b01
        - a10 * a10 * a01 * b11
        + a01 * a01 * a01 * b11
        - a01 * b10 * b10 * b11
        + a01 * b01 * b01 * b11;
    // (Vx^2 - Vy^2) bracket = Re(alpha conj(beta)) (|alpha|^2 + |beta|^2)
    let t2 = (a01 * a10 + b01 * b10)
        * (a01 * a01 + b01 * b01 + a10 * a10 + b10 * b10);
    // Vx Vy bracket = |beta|^4 - |alpha|^4
    let dd = a01 * a01 + b01 * b01;
    let bb = a10 * a10 + b10 * b10;
    let t3 = dd * dd - bb * bb;
    Ok((vx * tx - vy * ty + (vx * vx - vy * vy) * t2 + vx * vy * t3) / (4.0 * d0 * d0))
}

/// Closed-form `<f3>` for the single-node model, including its quartic
/// correction factor on the `x0 xdot` term.
pub fn f3_ekc(t: f64, a: f64, b: f64, c: f64) -> Result<f64, ComplexError> {
    let node = nodal::nodal_ekc(t, a, b, c).map_err(|_| ComplexError::InfiniteF3 { t })?;
    let s2 = ((1.0 + c) * t).sin();
    if s2.abs() < 1e-9 || (c * t).sin().abs() < 1e-9 {
        return Err(ComplexError::InfiniteF3 { t });
    }
    let sc = c.sqrt();
    let x0 = node.x;
    let (xd, yd) = (node.xdot, node.ydot);
    let bq = b * b * c * x0.powi(4);
    let pref = (1.0 + bq) / (4.0 * b * sc * x0.powi(4) * s2);
    let term = ((1.0 - bq) / (1.0 + bq)) * x0 * xd + xd * yd * (bq - 1.0) / (b * sc * s2)
        - x0 * x0 * (xd * xd - yd * yd) * ((1.0 + c) * t).cos() / s2;
    Ok(pref * term)
}

/// Leading-order X-point location from the expansion, used as a Newton seed.
///
/// Solved in the frame rotated so the velocity points along +u, where the
/// X-point sits on the v-axis at `v = -d0/(V |beta'|^2 - p3')`, then rotated
/// back. Reduces to `(0, -A/(D xdot))` when the velocity is already axial.
pub fn xpoint_guess(exp: &LocalExpansion) -> Result<(f64, f64), ComplexError> {
    let (vx, vy) = exp.v_frame;
    let vmag = vx.hypot(vy);
    if vmag < 1e-12 {
        return Err(ComplexError::DegenerateGuess("frame velocity is zero".into()));
    }
    let (co, si) = (vx / vmag, vy / vmag);
    // rotate coefficients into the frame with V' = (|V|, 0)
    let a = co * exp.alpha + si * exp.beta;
    let b = -si * exp.alpha + co * exp.beta;
    let _g = co * co * exp.gamma + si * si * exp.delta + 2.0 * si * co * exp.eps;
    let d = si * si * exp.gamma + co * co * exp.delta - 2.0 * si * co * exp.eps;
    let e = si * co * (exp.delta - exp.gamma) + (co * co - si * si) * exp.eps;
    let d0 = im(b * a.conj());
    if d0.abs() < 1e-14 * (a.norm() * b.norm()).max(1e-300) {
        return Err(ComplexError::DegenerateNode);
    }
    let p3 = im(e * b.conj()) + 0.5 * im(a * d.conj());
    let q3 = 0.5 * im(d * b.conj());
    let den = vmag * b.norm_sqr() - p3;
    if den.abs() < 1e-14 * (vmag * b.norm_sqr()).max(1e-300) {
        return Err(ComplexError::DegenerateGuess("guess denominator vanished".into()));
    }
    let v_rot = -d0 / den;
    let u_rot = -(q3 / d0) * v_rot * v_rot;
    Ok((co * u_rot - si * v_rot, si * u_rot + co * v_rot))
}

/// Newton-refine the X-point of the full-field moving-frame flow and build
/// the complex snapshot (eigenstructure, `<f3>`, classification).
pub fn xpoint_refine(
    spec: &WaveSpec,
    node: &NodalState,
    guess: (f64, f64),
) -> Result<ComplexSnapshot, ComplexError> {
    let (x0, y0) = node.position();
    let v = node.velocity();
    let t = node.t;
    let scale = v.0.hypot(v.1).max(1.0);
    let (mut u, mut w) = guess;
    let mut converged = false;
    let residual = |u: f64, w: f64| -> Result<((f64, f64), [[f64; 2]; 2], f64), ComplexError> {
        let ((fx, fy), jac) = spec
            .velocity_and_jacobian(x0 + u, y0 + w, t)
            .map_err(|_| ComplexError::SingularField)?;
        let (hx, hy) = (fx - v.0, fy - v.1);
        Ok(((hx, hy), jac, hx.hypot(hy)))
    };
    let mut state = residual(u, w)?;
    let mut iterations = 0u32;
    for _ in 0..100 {
        iterations += 1;
        let ((hx, hy), jac, hnorm) = state;
        // the f64 floor of the velocity evaluation: |grad v| ~ |J| times the
        // coordinate roundoff; tiny complexes cannot resolve 1e-14 * scale
        let jnorm = (jac[0][0] * jac[0][0]
            + jac[0][1] * jac[0][1]
            + jac[1][0] * jac[1][0]
            + jac[1][1] * jac[1][1])
            .sqrt();
        let floor = 4.0 * f64::EPSILON * jnorm * (x0.abs() + y0.abs() + u.hypot(w) + 1.0);
        if hnorm < (1e-14 * scale).max(floor) {
            converged = true;
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return Err(ComplexError::NoConvergence);
        }
        let mut du = (hx * jac[1][1] - hy * jac[0][1]) / det;
        let mut dw = (hy * jac[0][0] - hx * jac[1][0]) / det;
        // keep the step inside the trust region around the node frame
        let r_now = u.hypot(w).max(1e-9);
        let step = du.hypot(dw);
        if step > 0.5 * r_now {
            let f = 0.5 * r_now / step;
            du *= f;
            dw *= f;
        }
        // damped update: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..8 {
            let (un, wn) = (u - lambda * du, w - lambda * dw);
            if un.is_finite() && wn.is_finite() && un.hypot(wn) < 1e4 {
                if let Ok(next) = residual(un, wn) {
                    if next.2 < hnorm {
                        accepted = Some(((un, wn), next));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some(((un, wn), next)) => {
                // stagnation at the roundoff floor counts as converged
                if (u - un).hypot(w - wn) < 1e-13 * r_now && next.2 < 1e-9 * scale {
                    u = un;
                    w = wn;
                    state = next;
                    converged = true;
                    break;
                }
                u = un;
                w = wn;
                state = next;
            }
            None => return Err(ComplexError::NoConvergence),
        }
    }
    if !converged {
        return Err(ComplexError::NoConvergence);
    }
    let r_x = u.hypot(w);

    // eigenstructure of the (symmetric) flow Jacobian at the X-point
    let (_, jac) = spec
        .velocity_and_jacobian(x0 + u, y0 + w, t)
        .map_err(|_| ComplexError::SingularField)?;
    let j12 = 0.5 * (jac[0][1] + jac[1][0]);
    let m = 0.5 * (jac[0][0] + jac[1][1]);
    let r = (0.25 * (jac[0][0] - jac[1][1]).powi(2) + j12 * j12).sqrt();
    let (l1, l2) = (m + r, m - r);
    if l1 * l2 >= 0.0 {
        return Err(ComplexError::SpuriousXPoint(format!(
            "not a saddle: eigenvalues {l1}, {l2}"
        )));
    }
    let evec = |lam: f64| -> (f64, f64) {
        // (J - lam I) has rank 1 at an eigenvalue of a symmetric 2x2
        let r1 = (jac[0][0] - lam, j12);
        let r2 = (j12, jac[1][1] - lam);
        let (a, b) = if r1.0.hypot(r1.1) > r2.0.hypot(r2.1) { r1 } else { r2 };
        let n = a.hypot(b);
        if n < 1e-300 {
            (1.0, 0.0)
        } else {
            (-b / n, a / n)
        }
    };

    // reject a stationary point that belongs to a different node's complex
    if let Ok(near) = nodal::newton_node_position(spec, (x0 + u, y0 + w), t) {
        let d_own = r_x;
        let d_near = (near.0 - x0 - u).hypot(near.1 - y0 - w);
        let foreign = (near.0 - x0).hypot(near.1 - y0) > 1e-6;
        if foreign && d_near < d_own {
            if let Ok(v_near) = nodal::velocity_by_continuation(spec, near, t, 1e-5) {
                let mismatch =
                    (v.0 - v_near.0).hypot(v.1 - v_near.1) / v.0.hypot(v.1).max(1e-300);
                if mismatch > THETA_SPURIOUS {
                    return Err(ComplexError::SpuriousXPoint(format!(
                        "stationary point adjacent to a node with |V-V0|/|V| = {mismatch:.3}"
                    )));
                }
            }
        }
    }

    let exp = spec.local_expansion(x0, y0, t, v);
    let d0 = exp.d0();
    let f3 = f3_generic(&exp)?;
    let (classification, rotation) = classify_node(f3, d0, v)?;
    Ok(ComplexSnapshot {
        node: *node,
        xpoint: (u, w),
        r_x,
        eigenvalues: (l1, l2),
        eigenvectors: [evec(l1), evec(l2)],
        f3,
        d0,
        classification,
        rotation,
        adiabatic_a: 0.0,
        adiabatic_b: r_x,
        t,
        iterations,
    })
}

/// [`xpoint_refine`] with a retry ladder of perturbed seeds, for scans where
/// a stray Newton path (for example onto a neighboring complex) should not
/// lose the node's own X-point.
pub fn xpoint_refine_robust(
    spec: &WaveSpec,
    node: &NodalState,
    guess: (f64, f64),
) -> Result<ComplexSnapshot, ComplexError> {
    let mut last = None;
    let rotations = [0.0_f64, 0.5, -0.5];
    let scales = [1.0, 0.6, 1.7, 0.3];
    for &rot in &rotations {
        for &sc in &scales {
            let (si, co) = rot.sin_cos();
            let seed = (
                sc * (co * guess.0 - si * guess.1),
                sc * (si * guess.0 + co * guess.1),
            );
            match xpoint_refine(spec, node, seed) {
                Ok(snap) => return Ok(snap),
                Err(e) => last = Some(e),
            }
        }
    }
    Err(last.unwrap_or(ComplexError::NoConvergence))
}

/// Stability classification from `<f3>`, the rotation coefficient `d0`, and
/// the frame velocity.
///
/// Counterclockwise iff `d0 > 0`; a center iff the frame is at rest;
/// otherwise attractor iff (`<f3> < 0` and counterclockwise) or (`<f3> > 0`
/// and clockwise).
pub fn classify_node(
    f3: f64,
    d0: f64,
    v: (f64, f64),
) -> Result<(Classification, Rotation), ComplexError> {
    if d0 == 0.0 {
        return Err(ComplexError::DegenerateNode);
    }
    let rotation = if d0 > 0.0 { Rotation::Counterclockwise } else { Rotation::Clockwise };
    let class = if v.0 == 0.0 && v.1 == 0.0 {
        Classification::Center
    } else if f3 * d0 < 0.0 {
        Classification::Attractor
    } else {
        Classification::Repellor
    };
    Ok((class, rotation))
}

/// Adiabaticity check of a snapshot against a reference rest-frame velocity.
#[derive(Debug, Clone, Copy)]
pub struct AdiabaticCheck {
    pub ratio_a: f64,
    pub r_x: f64,
    pub pass_a: bool,
    pub pass_b: bool,
}

/// Conditions (a) `|V - V0|/|V| << 1` and (b) `R_X < 1`.
pub fn adiabaticity(snapshot: &ComplexSnapshot, v0: (f64, f64)) -> AdiabaticCheck {
    let v = snapshot.node.velocity();
    let vmag = v.0.hypot(v.1);
    let ratio_a = if vmag == 0.0 {
        f64::INFINITY
    } else {
        (v.0 - v0.0).hypot(v.1 - v0.1) / vmag
    };
    AdiabaticCheck {
        ratio_a,
        r_x: snapshot.r_x,
        pass_a: ratio_a < THETA_A,
        pass_b: snapshot.r_x < 1.0,
    }
}

/// Direction of a Hopf bifurcation event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopfDirection {
    /// Attractor -> repellor: the limit cycle is born at the node and moves out.
    Direct,
    /// Repellor -> attractor: the limit cycle closes in on the node.
    Inverse,
}

#[derive(Debug, Clone)]
pub struct HopfScan {
    /// Zero crossings of `<f3>` with their bifurcation direction.
    pub zeros: Vec<(f64, HopfDirection)>,
    /// Poles of `<f3>` inside the scanned range.
    pub poles: Vec<f64>,
    /// Fraction of scanned time with a repelling nodal point.
    pub repellor_fraction: f64,
}

/// Scan `<f3>` for the single-node model over `[t0, t1]`.
///
/// Sign changes between consecutive poles are bisected to `1e-6`; the
/// repellor fraction is the measure of time where the combined sign rule
/// classifies the node as a repellor.
pub fn hopf_scan_ekc(a: f64, b: f64, c: f64, t0: f64, t1: f64, dt: f64) -> HopfScan {
    let mut poles = Vec::new();
    for (freq, label_max) in [(1.0 + c, (t1 * (1.0 + c) / std::f64::consts::PI) as i64 + 1),
        (c, (t1 * c / std::f64::consts::PI) as i64 + 1)]
    {
        for k in 1..=label_max {
            let tp = k as f64 * std::f64::consts::PI / freq;
            if tp > t0 && tp < t1 {
                poles.push(tp);
            }
        }
    }
    poles.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let f = |t: f64| f3_ekc(t, a, b, c);
    let mut zeros = Vec::new();
    let mut repellor_count = 0usize;
    let mut total_count = 0usize;
    let steps = ((t1 - t0) / dt).round() as usize;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        let val = match f(t) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        let d0 = ((1.0 + c) * t).sin(); // sign of the rotation coefficient
        total_count += 1;
        if val * d0 > 0.0 {
            repellor_count += 1;
        }
        if let Some((tp, vp)) = prev {
            // no pole may sit between the two samples
            let pole_between = poles.iter().any(|&p| p > tp && p < t);
            if !pole_between && vp * val < 0.0 {
                let (mut lo, mut hi, mut flo) = (tp, t, vp);
                while hi - lo > 1e-6 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid).unwrap_or(0.0);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                let tz = 0.5 * (lo + hi);
                let slope = (val - vp).signum();
                let dir = if slope * d0.signum() > 0.0 {
                    HopfDirection::Direct
                } else {
                    HopfDirection::Inverse
                };
                zeros.push((tz, dir));
            }
        }
        prev = Some((t, val));
    }
    HopfScan {
        zeros,
        poles,
        repellor_fraction: repellor_count as f64 / total_count.max(1) as f64,
    }
}

/// Follow the frozen moving-frame flow from the midpoint of the node –
/// X-point segment; report whether it stays bounded (a limit cycle exists)
/// or escapes the complex.
fn frozen_flow_bounded(spec: &WaveSpec, node: &NodalState, max_turns: f64) -> Option<bool> {
    let exp = spec.local_expansion(node.x, node.y, node.t, node.velocity());
    let guess = xpoint_guess(&exp).ok()?;
    let snap = xpoint_refine(spec, node, guess).ok()?;
    let (ux, vx) = snap.xpoint;
    let r_x = snap.r_x;
    let (mut u, mut v) = (0.5 * ux, 0.5 * vx);
    let vel = node.velocity();
    let rhs = |u: f64, v: f64| -> Option<(f64, f64)> {
        let (fx, fy) = spec.velocity(node.x + u, node.y + v, node.t).ok()?;
        Some((fx - vel.0, fy - vel.1))
    };
    let mut phi_acc = 0.0;
    let dt_base = 1e-4;
    for _ in 0..40_000_000u64 {
        let (du, dv) = rhs(u, v)?;
        let r2 = u * u + v * v;
        let om = (u * dv - v * du).abs() / r2;
        let h = (5e-4 / om.max(1e-9)).min(dt_base);
        let k1 = (du, dv);
        let k2 = rhs(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1)?;
        let k3 = rhs(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1)?;
        let k4 = rhs(u + h * k3.0, v + h * k3.1)?;
        let un = u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let vn = v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        phi_acc += (u * vn - v * un).atan2(u * un + v * vn);
        u = un;
        v = vn;
        if u.hypot(v) > 1.6 * r_x {
            return Some(false);
        }
        if phi_acc.abs() > 2.0 * std::f64::consts::PI * max_turns {
            return Some(true);
        }
    }
    Some(true)
}

/// Bisect the instant at which the post-Hopf limit cycle reaches the X-point
/// and disappears: the first frozen time in `[t_lo, t_hi]` whose flow no
/// longer confines orbits inside the complex.
pub fn limit_cycle_vanishing_time(
    a: f64,
    b: f64,
    c: f64,
    t_lo: f64,
    t_hi: f64,
) -> Option<f64> {
    let spec = WaveSpec::ekc(a, b, c);
    let probe = |t: f64| -> Option<bool> {
        let node = nodal::nodal_ekc(t, a, b, c).ok()?;
        frozen_flow_bounded(&spec, &node, 300.0)
    };
    let mut lo = t_lo;
    let mut hi = t_hi;
    if !(probe(lo)?) || probe(hi)? {
        return None; // bracket invalid
    }
    while hi - lo > 5e-4 {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
