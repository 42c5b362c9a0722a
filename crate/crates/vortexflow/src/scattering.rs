//! The solvable point-vortex scattering model.
//!
//! `du/dt = -v/(u^2+v^2) - xdot0`, `dv/dt = u/(u^2+v^2)`: a vortex at the
//! origin seen from a frame moving with speed `xdot0` along x. The flow has
//! the exact invariant `C = e^{2 xdot0 v} (u^2 + v^2)`, an X-point at
//! `(0, -1/xdot0)`, and a separatrix on `C = C_x = e^{-2}/xdot0^2`. Orbits
//! launched at `u = 1` above/below the stable-manifold crossing `v_s`
//! surround the separatrix loop (type I) or pass below the X-point (type II);
//! their deviation vectors amplify as `1/(xdot0 * |v1 - v_s|)`.

use thiserror::Error;

use crate::rk::{self, StepAbort, StepperOpts};

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    #[error("toy field is singular at the origin")]
    SingularField,
    #[error("C is on the separatrix (C ~ C_x); quantity diverges")]
    SeparatrixC,
    #[error("launch point sits on the stable manifold (v1 ~ v_s)")]
    SeparatrixLaunch,
    #[error("power-law fit needs >= 5 positive samples spanning a decade")]
    DegenerateFit,
    #[error("invalid toy-model parameters: {0}")]
    InvalidParams(String),
    #[error("orbit failed to traverse the complex")]
    NoCrossing,
}

/// Toy-model parameters: the nodal speed in the rest frame.
///
/// Only `xdot0 > 0` is represented; the mirrored system is equivalent under
/// the reflection `u -> -u, t -> -t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    xdot0: f64,
}

impl ToyParams {
    pub fn new(xdot0: f64) -> Result<Self, ScatterError> {
        if !(xdot0 > 0.0) {
            return Err(ScatterError::InvalidParams(format!(
                "xdot0 must be positive, got {xdot0}"
            )));
        }
        Ok(ToyParams { xdot0 })
    }

    pub fn xdot0(&self) -> f64 {
        self.xdot0
    }

    /// Invariant value on the X-point's asymptotic curves, `e^{-2}/xdot0^2`.
    pub fn c_x(&self) -> f64 {
        (-2.0_f64).exp() / (self.xdot0 * self.xdot0)
    }

    /// X-point location `(0, -1/xdot0)`.
    pub fn xpoint(&self) -> (f64, f64) {
        (0.0, -1.0 / self.xdot0)
    }
}

/// Encounter type of a scattered toy orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyOrbitType {
    I,
    II,
}

/// Outcome of one scattering event.
#[derive(Debug, Clone)]
pub struct ScatterResult {
    pub v1: f64,
    /// Impact parameter `|v1 - v_s|`.
    pub delta_v1: f64,
    /// `xi/xi0` at the exit line `u = -1`.
    pub amplification: f64,
    pub kind: ToyOrbitType,
    pub t_scatter: f64,
    /// Total winding angle about the origin during the traversal.
    pub winding: f64,
    /// Time spent within 3 R_X of the vortex (the loop phase for type I).
    pub t_loop: f64,
    /// Sampled `(t, xi/xi0)` along the traversal.
    pub profile: Vec<(f64, f64)>,
}

pub fn toy_rhs(u: f64, v: f64, p: &ToyParams) -> Result<(f64, f64), ScatterError> {
    let r2 = u * u + v * v;
    if r2 < 1e-300 {
        return Err(ScatterError::SingularField);
    }
    Ok((-v / r2 - p.xdot0, u / r2))
}

/// Jacobian of the toy flow, `[[2uv, v^2-u^2], [v^2-u^2, -2uv]] / r^4`.
pub fn toy_jacobian(u: f64, v: f64) -> [[f64; 2]; 2] {
    let r2 = u * u + v * v;
    let r4 = r2 * r2;
    [
        [2.0 * u * v / r4, (v * v - u * u) / r4],
        [(v * v - u * u) / r4, -2.0 * u * v / r4],
    ]
}

/// Exact flow invariant `C = e^{2 xdot0 v} (u^2 + v^2)`.
pub fn invariant_c(u: f64, v: f64, p: &ToyParams) -> f64 {
    (2.0 * p.xdot0 * v).exp() * (u * u + v * v)
}

fn newton_root(
    mut x: f64,
    mut lo: f64,
    mut hi: f64,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> f64 {
    // bisection-guarded Newton
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || d == 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-3) {
            return next;
        }
        x = next;
    }
    x
}

/// `(v_s, v_x_up)`: the stable manifold's crossing of the line `u = 1` on the
/// lower branch, and the separatrix's positive crossing of the v-axis
/// `a_s / xdot0` with `a_s` the root of `a + ln a + 1 = 0`.
pub fn separatrix_crossings(p: &ToyParams) -> (f64, f64) {
    let cx = p.c_x();
    let s = p.xdot0;
    // g(v) = e^{2 s v}(1 + v^2) is increasing for s > 1/2; bracket and solve
    let f = |v: f64| (2.0 * s * v).exp() * (1.0 + v * v) - cx;
    let df = |v: f64| (2.0 * s * v).exp() * (2.0 * s * (1.0 + v * v) + 2.0 * v);
    let mut lo = -1.0;
    while f(lo) > 0.0 {
        lo *= 2.0;
    }
    let v_s = newton_root(0.5 * lo, lo, 0.0, f, df);
    // a + ln a + 1 = 0
    let fa = |a: f64| a + a.ln() + 1.0;
    let dfa = |a: f64| 1.0 + 1.0 / a;
    let a_s = newton_root(0.28, 1e-12, 1.0, fa, dfa);
    (v_s, a_s / s)
}

/// The `v` value on curve `C` at `u = +-1` (unique for `xdot0 > 1/2`).
pub fn v1_of_c(c: f64, p: &ToyParams) -> f64 {
    let s = p.xdot0;
    let f = |v: f64| (2.0 * s * v).exp() * (1.0 + v * v) - c;
    let df = |v: f64| (2.0 * s * v).exp() * (2.0 * s * (1.0 + v * v) + 2.0 * v);
    let mut lo = -1.0;
    while f(lo) > 0.0 {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    newton_root(0.5 * (lo + hi), lo, hi, f, df)
}

/// The `v` value on curve `C` at `u = 0`: below the X-point for type II
/// curves (`C < C_x`), on the positive v-axis for type I (`C > C_x`).
pub fn v0_of_c(c: f64, p: &ToyParams) -> Result<f64, ScatterError> {
    let s = p.xdot0;
    let cx = p.c_x();
    let g = |v: f64| (2.0 * s * v).exp() * (v * v) - c;
    let dg = |v: f64| (2.0 * s * v).exp() * (2.0 * s * v * v + 2.0 * v);
    if c < cx {
        // root in (-inf, -1/s), where g rises from 0 to c_x
        let hi = -1.0 / s;
        let mut lo = hi * 2.0;
        while g(lo) > 0.0 {
            lo *= 2.0;
        }
        // g is increasing here: g(lo) < 0 < g(hi)
        Ok(newton_root(0.5 * (lo + hi), lo, hi, g, dg))
    } else if c > cx {
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        Ok(newton_root(0.5 * hi, 1e-300, hi, g, dg))
    } else {
        Err(ScatterError::SeparatrixC)
    }
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1]
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = WGK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kron += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adaptive_quad(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b)];
    let mut total = 0.0;
    let mut splits = 0;
    while let Some((lo, hi)) = stack.pop() {
        let (val, err) = gk15(f, lo, hi);
        if err < tol * (1.0 + val.abs()) * (hi - lo) / (b - a) || splits > 4000 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
            splits += 1;
        }
    }
    total
}

/// Time to traverse the complex along the integral curve `C`, from `u = 1`
/// to `u = -1`:
/// `T(C) = 2 int_{v1}^{v0} C e^{-2 xdot0 v} dv / sqrt(C e^{-2 xdot0 v} - v^2)`.
///
/// The inverse-square-root endpoint singularity at `v0` is removed by the
/// substitution `v = v0 - s^2`; the remaining interior near-singularity at
/// the X-point level (for `C -> C_x`) is handled adaptively.
pub fn traversal_time(c: f64, p: &ToyParams) -> Result<f64, ScatterError> {
    let cx = p.c_x();
    if ((c - cx) / cx).abs() < 1e-12 {
        return Err(ScatterError::SeparatrixC);
    }
    let s = p.xdot0;
    let v1 = v1_of_c(c, p);
    let v0 = v0_of_c(c, p)?;
    let smax = (v0 - v1).sqrt();
    let integrand = |q: f64| {
        let v = v0 - q * q;
        let ce = c * (-2.0 * s * v).exp();
        let g = (ce - v * v).max(0.0);
        if g <= 0.0 {
            // removable endpoint: use the limiting value
            let gp = -2.0 * s * ce - 2.0 * v; // dG/dv at v0 (negative)
            return 4.0 * ce / (-gp).max(1e-300).sqrt();
        }
        4.0 * q * ce / g.sqrt()
    };
    // split at the X-point level where the integrand peaks for C ~ C_x
    let vx = -1.0 / s;
    let mut total = 0.0;
    if v1 < vx && vx < v0 {
        let smid = (v0 - vx).sqrt();
        total += adaptive_quad(&integrand, 0.0, smid, 1e-10);
        total += adaptive_quad(&integrand, smid, smax, 1e-10);
    } else {
        total += adaptive_quad(&integrand, 0.0, smax, 1e-10);
    }
    Ok(total)
}

/// Theoretical deviation amplification `1 + 2 xdot0^2 |dT/dC| C`, with
/// `dT/dC` by central differences respecting the separatrix singularity.
pub fn amplification_estimate(c: f64, p: &ToyParams) -> Result<f64, ScatterError> {
    let cx = p.c_x();
    if ((c - cx) / cx).abs() < 1e-10 {
        return Err(ScatterError::SeparatrixC);
    }
    let h = 1e-6 * (c - cx).abs();
    let tp = traversal_time(c + h, p)?;
    let tm = traversal_time(c - h, p)?;
    let dtdc = (tp - tm) / (2.0 * h);
    Ok(1.0 + 2.0 * p.xdot0 * p.xdot0 * dtdc.abs() * c)
}

/// Integrate a launch from `(u, v) = (1, v1)` with deviation `(1, 0)` until
/// the orbit crosses `u = -1`; report the deviation amplification.
pub fn scatter_amplification(v1: f64, p: &ToyParams) -> Result<ScatterResult, ScatterError> {
    let (v_s, _) = separatrix_crossings(p);
    if (v1 - v_s).abs() < 1e-12 {
        return Err(ScatterError::SeparatrixLaunch);
    }
    let kind = if v1 > v_s { ToyOrbitType::I } else { ToyOrbitType::II };
    let xdot0 = p.xdot0;
    let pp = *p;

    let rhs = move |_t: f64, y: &[f64; 4], dy: &mut [f64; 4]| -> Result<(), StepAbort> {
        let r2 = y[0] * y[0] + y[1] * y[1];
        if r2 < 1e-12 {
            return Err(StepAbort::Singular { t: _t });
        }
        dy[0] = -y[1] / r2 - xdot0;
        dy[1] = y[0] / r2;
        let j = toy_jacobian(y[0], y[1]);
        dy[2] = j[0][0] * y[2] + j[0][1] * y[3];
        dy[3] = j[1][0] * y[2] + j[1][1] * y[3];
        Ok(())
    };
    // rotation per step stays below ~0.1 rad: h <= 0.1/|v|^2 (|v| ~ 1/R near
    // the vortex, so this is the kappa R^2 cap)
    let cap = move |_t: f64, y: &[f64; 4]| {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let du = -y[1] / r2 - pp.xdot0;
        let dv = y[0] / r2;
        0.1 / (du * du + dv * dv).max(1e-9)
    };

    let mut crossing: Option<(f64, [f64; 4])> = None;
    let mut winding = 0.0;
    let mut last_ang: Option<f64> = None;
    let mut t_loop = 0.0;
    let r_loop = 3.0 / xdot0;
    let mut profile: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    let dt_profile = (0.01_f64).min(0.2 / (xdot0 * xdot0));
    let mut next_profile = dt_profile;
    let t_max = 200.0 * (1.0 + 1.0 / xdot0);
    let opts = StepperOpts {
        rtol: 1e-11,
        atol: 1e-13,
        h_init: 1e-5,
        h_max: 0.05,
        max_steps: 200_000_000,
    };
    let res = rk::integrate(
        rhs,
        0.0,
        [1.0, v1, 1.0, 0.0],
        t_max,
        &opts,
        cap,
        |seg| {
            // time inside the loop region and deviation profile
            let mid = seg.eval(0.5 * (seg.t0 + seg.t1));
            if mid[0].hypot(mid[1]) < r_loop {
                t_loop += seg.t1 - seg.t0;
            }
            while next_profile <= seg.t1 {
                if next_profile > seg.t0 {
                    let y = seg.eval(next_profile);
                    profile.push((next_profile, y[2].hypot(y[3])));
                }
                next_profile += dt_profile;
            }
            // accumulate winding about the origin (substep resolution)
            for k in 1..=4 {
                let tm = seg.t0 + (seg.t1 - seg.t0) * k as f64 / 4.0;
                let y = seg.eval(tm);
                let ang = y[1].atan2(y[0]);
                if let Some(prev) = last_ang {
                    let mut dphi = ang - prev;
                    while dphi > std::f64::consts::PI {
                        dphi -= 2.0 * std::f64::consts::PI;
                    }
                    while dphi < -std::f64::consts::PI {
                        dphi += 2.0 * std::f64::consts::PI;
                    }
                    winding += dphi;
                }
                last_ang = Some(ang);
            }
            if seg.y1[0] <= -1.0 {
                // bisect the crossing time of u = -1 inside the step
                let (mut lo, mut hi) = (seg.t0, seg.t1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if seg.eval(mid)[0] <= -1.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                crossing = Some((hi, seg.eval(hi)));
                return Err(StepAbort::Halt);
            }
            Ok(())
        },
    );
    let _ = res;
    let (t_cross, state) = crossing.ok_or(ScatterError::NoCrossing)?;
    Ok(ScatterResult {
        v1,
        delta_v1: (v1 - v_s).abs(),
        amplification: state[2].hypot(state[3]),
        kind,
        t_scatter: t_cross,
        winding,
        t_loop,
        profile,
    })
}

/// Least-squares fit `y = A x^{-b}` on log-log axes.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit, ScatterError> {
    if samples.len() < 5 || samples.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(ScatterError::DegenerateFit);
    }
    let xmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let xmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if xmax / xmin < 10.0 {
        return Err(ScatterError::DegenerateFit);
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in samples {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let r_num = n * sxy - sx * sy;
    let r_den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    let r = if r_den > 0.0 { r_num / r_den } else { 1.0 };
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent: -slope,
        r_squared: r * r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhs_vanishes_at_xpoint() {
        let p = ToyParams::new(3.0).unwrap();
        let (u, v) = p.xpoint();
        let (du, dv) = toy_rhs(u, v, &p).unwrap();
        assert_abs_diff_eq!(du, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dv, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rhs_on_unit_circle() {
        let p = ToyParams::new(3.0).unwrap();
        for &phi in &[0.3_f64, 1.0, 2.5, 4.0] {
            let (du, dv) = toy_rhs(phi.cos(), phi.sin(), &p).unwrap();
            assert_abs_diff_eq!(du, -phi.sin() - 3.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dv, phi.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn rhs_far_field_limit() {
        let p = ToyParams::new(3.0).unwrap();
        let (du, dv) = toy_rhs(0.0, -1e6, &p).unwrap();
        assert_abs_diff_eq!(du, -3.0, epsilon = 1e-5);
        assert_abs_diff_eq!(dv, 0.0, epsilon = 1e-5);
    }

    #[test]
    fn invariant_values() {
        let p = ToyParams::new(3.0).unwrap();
        assert_abs_diff_eq!(invariant_c(1.0, 0.0, &p), 1.0, epsilon = 1e-15);
        let (u, v) = p.xpoint();
        assert_abs_diff_eq!(invariant_c(u, v, &p), p.c_x(), epsilon = 1e-15);
    }

    #[test]
    fn separatrix_constants_match_reference() {
        let p = ToyParams::new(3.0).unwrap();
        let (v_s, v_up) = separatrix_crossings(&p);
        assert_abs_diff_eq!(v_s, -0.7785019785133789, epsilon = 1e-9);
        assert_abs_diff_eq!(v_up * 3.0, 0.27846454276107385, epsilon = 1e-9);
    }

    #[test]
    fn large_speed_separatrix_approximation() {
        // v_s ~ ln(C_x)/(2 xdot0) for large xdot0
        let p = ToyParams::new(30.0).unwrap();
        let (v_s, _) = separatrix_crossings(&p);
        let approx_vs = p.c_x().ln() / (2.0 * 30.0);
        assert!(
            ((v_s - approx_vs) / v_s).abs() < 0.05,
            "v_s {v_s} vs approx {approx_vs}"
        );
    }

    #[test]
    fn invariant_conserved_along_orbit() {
        let p = ToyParams::new(3.0).unwrap();
        let c0 = invariant_c(1.0, -0.5, &p);
        let rhs = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            let r2 = y[0] * y[0] + y[1] * y[1];
            dy[0] = -y[1] / r2 - 3.0;
            dy[1] = y[0] / r2;
            Ok(())
        };
        let opts = StepperOpts { rtol: 1e-12, atol: 1e-14, h_max: 0.01, ..Default::default() };
        let res = rk::integrate(rhs, 0.0, [1.0, -0.5], 0.6, &opts, |_, _| f64::INFINITY, |_| Ok(()));
        assert!(res.abort.is_none());
        let c1 = invariant_c(res.y[0], res.y[1], &p);
        assert!(((c1 - c0) / c0).abs() < 1e-8, "drift {}", ((c1 - c0) / c0).abs());
    }

    #[test]
    fn traversal_time_matches_ode_clock() {
        let p = ToyParams::new(3.0).unwrap();
        for &fac in &[1.01, 0.99] {
            let c = p.c_x() * fac;
            let t_quad = traversal_time(c, &p).unwrap();
            let r = scatter_amplification(v1_of_c(c, &p), &p).unwrap();
            assert!(
                ((t_quad - r.t_scatter) / r.t_scatter).abs() < 1e-4,
                "fac {fac}: quad {t_quad} vs ode {}",
                r.t_scatter
            );
        }
    }

    #[test]
    fn traversal_time_diverges_toward_separatrix() {
        let p = ToyParams::new(3.0).unwrap();
        let mut prev = 0.0;
        for k in 1..=6 {
            let c = p.c_x() * (1.0 + 4.0_f64.powi(-k));
            let t = traversal_time(c, &p).unwrap();
            assert!(t > prev, "T not monotone at k={k}");
            prev = t;
        }
    }

    #[test]
    fn far_field_scatter_time_estimate() {
        let p = ToyParams::new(3.0).unwrap();
        // launch well away from the separatrix: t_scatter ~ 2 u0 / xdot0
        let r = scatter_amplification(-1.6, &p).unwrap();
        let est = 2.0 / 3.0;
        assert!(
            (r.t_scatter - est).abs() / est < 0.3,
            "t_scatter {} vs {est}",
            r.t_scatter
        );
    }

    #[test]
    fn toy_saddle_eigenvalues() {
        let p = ToyParams::new(3.0).unwrap();
        let (u, v) = p.xpoint();
        let j = toy_jacobian(u, v);
        assert_abs_diff_eq!(j[0][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j[0][1], 9.0, epsilon = 1e-9);
        // eigenvalues of [[0, s^2], [s^2, 0]] are +- s^2
    }

    #[test]
    fn separatrix_launch_rejected() {
        let p = ToyParams::new(3.0).unwrap();
        let (v_s, _) = separatrix_crossings(&p);
        assert!(matches!(
            scatter_amplification(v_s, &p),
            Err(ScatterError::SeparatrixLaunch)
        ));
    }

    #[test]
    fn types_split_at_the_separatrix() {
        let p = ToyParams::new(3.0).unwrap();
        let (v_s, _) = separatrix_crossings(&p);
        let hi = scatter_amplification(v_s + 0.01, &p).unwrap();
        let lo = scatter_amplification(v_s - 0.005, &p).unwrap();
        assert_eq!(hi.kind, ToyOrbitType::I);
        assert_eq!(lo.kind, ToyOrbitType::II);
        // type I gains the loop turn (in the node's counterclockwise sense),
        // type II stays below a half turn and rotates the other way
        assert!(hi.winding > 2.0 * std::f64::consts::PI - 3.2, "winding {}", hi.winding);
        assert!(lo.winding.abs() < std::f64::consts::PI, "winding {}", lo.winding);
        assert!(hi.winding - lo.winding > 5.0, "loop turn missing");
    }

    #[test]
    fn v0_branch_expansion_near_separatrix() {
        // v0(C) ~ -(1/s)(1 + sqrt|C e^2 s^2 - 1|) to second order
        let p = ToyParams::new(3.0).unwrap();
        for &fac in &[0.99, 0.999] {
            let c = p.c_x() * fac;
            let v0 = v0_of_c(c, &p).unwrap();
            let est = -(1.0 / 3.0) * (1.0 + (c * (2.0_f64).exp() * 9.0 - 1.0).abs().sqrt());
            assert!(
                ((v0 - est) / v0).abs() < 2e-2 * (1.0 - fac).sqrt().recip().min(5.0) * 0.1 + 5e-3,
                "fac {fac}: v0 {v0} vs est {est}"
            );
        }
    }

    #[test]
    fn power_law_fit_exact() {
        let samples: Vec<(f64, f64)> = (1..=20)
            .map(|k| {
                let x = 1e-3 * 1.5_f64.powi(k);
                (x, 2.0 / x)
            })
            .collect();
        let fit = fit_power_law(&samples).unwrap();
        assert_abs_diff_eq!(fit.amplitude, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.exponent, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_law_fit_rejects_narrow_range() {
        let samples: Vec<(f64, f64)> = (1..=10).map(|k| (1.0 + k as f64 * 0.01, 1.0)).collect();
        assert!(matches!(fit_power_law(&samples), Err(ScatterError::DegenerateFit)));
    }

    #[test]
    fn power_law_fit_with_noise() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<(f64, f64)> = (0..60)
            .map(|k| {
                let x = 1e-4 * 10.0_f64.powf(k as f64 / 20.0);
                let noise = 1.0 + 0.1 * (rng.gen::<f64>() - 0.5);
                (x, 3.0 * x.powf(-0.9) * noise)
            })
            .collect();
        let fit = fit_power_law(&samples).unwrap();
        assert!((fit.exponent - 0.9).abs() < 0.05);
    }
}
