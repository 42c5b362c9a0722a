//! Locating and tracking nodal points (zeros of the wavefunction).
//!
//! The four model families have closed-form nodal lines; a generic 2D Newton
//! refinement works for any spec. The tracker follows branches over time and
//! emits bifurcation events when the branch count changes.

use thiserror::Error;

use crate::wavefield::WaveSpec;

/// Residual tolerance defining an accepted node: `|psi| < TOL_NODE`.
pub const TOL_NODE: f64 = 1e-10;
/// Half-width (in t) of the excluded interval around singular instants.
pub const SINGULAR_HALF_WIDTH: f64 = 1e-6;
/// Positions beyond this are treated as escaped to infinity.
pub const INFINITY_CUTOFF: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum NodalError {
    #[error("nodal point at infinity near t = {t}")]
    NodeAtInfinity { t: f64 },
    #[error("no real root at t = {t}")]
    NoRealRoot { t: f64 },
    #[error("degenerate (double) root at t = {t}: bifurcation instant")]
    DegenerateRoot { t: f64 },
    #[error("Newton iteration did not converge")]
    NoConvergence,
    #[error("Jacobian singular during Newton iteration")]
    DegenerateJacobian,
    #[error("branch lost during continuation")]
    BranchLost,
}

/// How a nodal point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    AnalyticEkc,
    AnalyticEps20,
    AnalyticCase20,
    AnalyticCase30,
    Newton,
}

/// A located nodal point with velocity.
#[derive(Debug, Clone, Copy)]
pub struct NodalState {
    pub x: f64,
    pub y: f64,
    pub xdot: f64,
    pub ydot: f64,
    pub t: f64,
    pub branch_id: i32,
    pub provenance: Provenance,
}

impl NodalState {
    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.xdot, self.ydot)
    }

    pub fn speed(&self) -> f64 {
        self.xdot.hypot(self.ydot)
    }
}

/// Kinds of nodal-line events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    PairCreation,
    PairAnnihilation,
    EscapeToInfinity,
    EntryFromInfinity,
}

/// A change in the set of tracked nodal branches.
#[derive(Debug, Clone, Copy)]
pub struct NodalEvent {
    pub kind: EventKind,
    pub t_bif: f64,
    /// `None` marks "at infinity".
    pub location: Option<(f64, f64)>,
}

fn near_sine_zero(freq: f64, t: f64) -> bool {
    let k = (freq * t / std::f64::consts::PI).round();
    (t - k * std::f64::consts::PI / freq).abs() < SINGULAR_HALF_WIDTH
}

/// Closed-form nodal point of the single-node model, with velocity.
///
/// `x0 = -sin((1+c)t)/(a sin ct)`, `y0 = -a sin t/(b sqrt(c) sin((1+c)t))`.
pub fn nodal_ekc(t: f64, a: f64, b: f64, c: f64) -> Result<NodalState, NodalError> {
    if near_sine_zero(c, t) || near_sine_zero(1.0 + c, t) {
        return Err(NodalError::NodeAtInfinity { t });
    }
    let sc = c.sqrt();
    let (s1, c1) = (c * t).sin_cos();
    let (s2, c2) = ((1.0 + c) * t).sin_cos();
    let x = -s2 / (a * s1);
    let y = -a * t.sin() / (b * sc * s2);
    let xdot = -((1.0 + c) * c2 * s1 - c * s2 * c1) / (a * s1 * s1);
    let ydot = -a * (t.cos() * s2 - t.sin() * (1.0 + c) * c2) / (b * sc * s2 * s2);
    Ok(NodalState {
        x,
        y,
        xdot,
        ydot,
        t,
        branch_id: 0,
        provenance: Provenance::AnalyticEkc,
    })
}

/// Nodal points of `Psi_00 + a Psi_10 + b Psi_11 + eps Psi_20`.
///
/// Roots of `eps sin((c-1)t) x^2 + a sin(ct) x + (sin((1+c)t) - eps sin((c-1)t)) = 0`,
/// then `y = (-a x sin t + eps (1-x^2) sin 2t) / (b sqrt(c) x sin((1+c)t))`.
pub fn nodal_eps20(
    t: f64,
    a: f64,
    b: f64,
    eps: f64,
    c: f64,
) -> Result<Vec<NodalState>, NodalError> {
    if near_sine_zero(1.0 + c, t) {
        return Err(NodalError::NodeAtInfinity { t });
    }
    let sc = c.sqrt();
    let sm = ((c - 1.0) * t).sin();
    let s1 = (c * t).sin();
    let s2 = ((1.0 + c) * t).sin();
    let qa = eps * sm;
    let qb = a * s1;
    let qc = s2 - eps * sm;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(NodalError::NoRealRoot { t });
    }
    // stable quadratic roots; tiny qa degrades one root to infinity
    let mut xs: Vec<f64> = Vec::with_capacity(2);
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    if q.abs() > 0.0 {
        xs.push(qc / q);
    }
    if qa.abs() > 1e-14 * (qb.abs() + qc.abs()).max(1.0) {
        xs.push(q / qa);
    }
    let mut out = Vec::new();
    for x in xs {
        if !x.is_finite() || x.abs() > INFINITY_CUTOFF * 1e3 {
            continue;
        }
        if x.abs() < 1e-12 {
            continue; // y-formula pole; node escaped along y
        }
        let num = -a * x * t.sin() + eps * (1.0 - x * x) * (2.0 * t).sin();
        let den = b * sc * x * s2;
        let y = num / den;
        // implicit velocity: F(x, t) = qa x^2 + qb x + qc
        let fx = 2.0 * qa * x + qb;
        let ft = eps * (c - 1.0) * ((c - 1.0) * t).cos() * x * x
            + a * c * (c * t).cos() * x
            + (1.0 + c) * ((1.0 + c) * t).cos()
            - eps * (c - 1.0) * ((c - 1.0) * t).cos();
        if fx.abs() < 1e-12 {
            return Err(NodalError::DegenerateRoot { t });
        }
        let xdot = -ft / fx;
        let ndot = -a * (xdot * t.sin() + x * t.cos())
            + eps * (-2.0 * x * xdot * (2.0 * t).sin() + (1.0 - x * x) * 2.0 * (2.0 * t).cos());
        let ddot = b * sc * (xdot * s2 + x * (1.0 + c) * ((1.0 + c) * t).cos());
        let ydot = (ndot * den - num * ddot) / (den * den);
        out.push(NodalState {
            x,
            y,
            xdot,
            ydot,
            t,
            branch_id: 0,
            provenance: Provenance::AnalyticEps20,
        });
    }
    if out.is_empty() {
        return Err(NodalError::NodeAtInfinity { t });
    }
    Ok(out)
}

/// Nodal pair of `Psi_00 + a Psi_20 + b Psi_11` (empty when absent).
///
/// `x^2 = 1 - sin((1+c)t)/(a sin((c-1)t))`, `y = sin 2t/(b sqrt(c) x sin((c-1)t))`.
pub fn nodal_case20(t: f64, a: f64, b: f64, c: f64) -> Result<Vec<NodalState>, NodalError> {
    if near_sine_zero(c - 1.0, t) {
        return Err(NodalError::NodeAtInfinity { t });
    }
    let sc = c.sqrt();
    let sm = ((c - 1.0) * t).sin();
    let s2 = ((1.0 + c) * t).sin();
    let x2 = 1.0 - s2 / (a * sm);
    if x2 < -1e-12 {
        return Ok(Vec::new());
    }
    let x = x2.max(0.0).sqrt();
    let x2dot = -((1.0 + c) * ((1.0 + c) * t).cos() * sm
        - s2 * (c - 1.0) * ((c - 1.0) * t).cos())
        / (a * sm * sm);
    let mut out = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let xs = sign * x;
        let (y, xdot, ydot) = if x < 1e-12 {
            // bifurcation instant: both nodes at the origin when sin 2t ~ 0
            if (2.0 * t).sin().abs() < 1e-9 {
                (0.0, f64::INFINITY, 0.0)
            } else {
                return Err(NodalError::NodeAtInfinity { t });
            }
        } else {
            let num = (2.0 * t).sin();
            let den = b * sc * xs * sm;
            let y = num / den;
            let xdot = x2dot / (2.0 * xs);
            let ddot = b * sc * (xdot * sm + xs * (c - 1.0) * ((c - 1.0) * t).cos());
            let ydot = (2.0 * (2.0 * t).cos() * den - num * ddot) / (den * den);
            (y, xdot, ydot)
        };
        out.push(NodalState {
            x: xs,
            y,
            xdot,
            ydot,
            t,
            branch_id: if sign > 0.0 { 0 } else { 1 },
            provenance: Provenance::AnalyticCase20,
        });
    }
    Ok(out)
}

/// Real roots of `x^3 - 3x + q = 0` (trigonometric form when all three are
/// real, hyperbolic otherwise), each polished by one Newton step.
fn depressed_cubic_roots(q: f64) -> Vec<f64> {
    let mut roots = if q.abs() <= 2.0 {
        let phi = (-q / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| 2.0 * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        let u = (q.abs() / 2.0).acosh() / 3.0;
        vec![-2.0 * q.signum() * u.cosh()]
    };
    for x in &mut roots {
        let f = *x * *x * *x - 3.0 * *x + q;
        let df = 3.0 * *x * *x - 3.0;
        if df.abs() > 1e-10 {
            *x -= f / df;
        }
    }
    roots
}

/// Nodal points of `Psi_00 + a Psi_30 + b Psi_11` (one or three).
///
/// `x^3 - 3x + sin((1+c)t)/(a sin((c-2)t)) = 0`,
/// `y = sin 3t/(b sqrt(c) x sin((c-2)t))`.
pub fn nodal_case30(t: f64, a: f64, b: f64, c: f64) -> Result<Vec<NodalState>, NodalError> {
    if near_sine_zero(c - 2.0, t) {
        return Err(NodalError::NodeAtInfinity { t });
    }
    let sc = c.sqrt();
    let sm = ((c - 2.0) * t).sin();
    let s2 = ((1.0 + c) * t).sin();
    let q = s2 / (a * sm);
    if (q.abs() - 2.0).abs() < 1e-12 {
        return Err(NodalError::DegenerateRoot { t });
    }
    let qdot = ((1.0 + c) * ((1.0 + c) * t).cos() * sm - s2 * (c - 2.0) * ((c - 2.0) * t).cos())
        / (a * sm * sm);
    let mut out = Vec::new();
    for (i, x) in depressed_cubic_roots(q).into_iter().enumerate() {
        if x.abs() < 1e-12 {
            continue; // y-formula pole
        }
        let num = (3.0 * t).sin();
        let den = b * sc * x * sm;
        let y = num / den;
        let xdot = -qdot / (3.0 * (x * x - 1.0));
        let ddot = b * sc * (xdot * sm + x * (c - 2.0) * ((c - 2.0) * t).cos());
        let ydot = (3.0 * (3.0 * t).cos() * den - num * ddot) / (den * den);
        out.push(NodalState {
            x,
            y,
            xdot,
            ydot,
            t,
            branch_id: i as i32,
            provenance: Provenance::AnalyticCase30,
        });
    }
    if out.is_empty() {
        return Err(NodalError::NodeAtInfinity { t });
    }
    Ok(out)
}

/// 2D Newton refinement of a node of `Re psi = Im psi = 0`, on the
/// polynomial part of the field (same zero set, better conditioned).
pub fn refine_node(spec: &WaveSpec, guess: (f64, f64), t: f64) -> Result<NodalState, NodalError> {
    let (x, y) = newton_node_position(spec, guess, t)?;
    let (xdot, ydot) = velocity_by_continuation(spec, (x, y), t, 1e-5)?;
    Ok(NodalState {
        x,
        y,
        xdot,
        ydot,
        t,
        branch_id: 0,
        provenance: Provenance::Newton,
    })
}

pub(crate) fn newton_node_position(
    spec: &WaveSpec,
    guess: (f64, f64),
    t: f64,
) -> Result<(f64, f64), NodalError> {
    let (mut x, mut y) = guess;
    for _ in 0..50 {
        let d = spec.poly_derivs(x, y, t);
        let scale = d.scale.max(f64::MIN_POSITIVE);
        if d.p.norm() < 1e-13 * scale {
            return Ok((x, y));
        }
        let det = d.px.re * d.py.im - d.py.re * d.px.im;
        if det.abs() < 1e-14 * (d.px.norm() * d.py.norm()).max(1e-300) {
            return Err(NodalError::DegenerateJacobian);
        }
        let dx = (d.p.re * d.py.im - d.p.im * d.py.re) / det;
        let dy = (d.p.im * d.px.re - d.p.re * d.px.im) / det;
        x -= dx;
        y -= dy;
        if !x.is_finite() || !y.is_finite() || x.abs() + y.abs() > 1e6 {
            return Err(NodalError::NoConvergence);
        }
    }
    Err(NodalError::NoConvergence)
}

/// Central-difference nodal velocity: refines the root at `t - h` and
/// `t + h` seeded from the node, `O(h^2)` accurate.
pub fn velocity_by_continuation(
    spec: &WaveSpec,
    node: (f64, f64),
    t: f64,
    h: f64,
) -> Result<(f64, f64), NodalError> {
    let jump = |p: (f64, f64)| (p.0 - node.0).hypot(p.1 - node.1);
    let plus = newton_node_position(spec, node, t + h).map_err(|_| NodalError::BranchLost)?;
    let minus = newton_node_position(spec, node, t - h).map_err(|_| NodalError::BranchLost)?;
    // continuation must stay on the same branch
    if jump(plus) > 0.5 + 1e4 * h || jump(minus) > 0.5 + 1e4 * h {
        return Err(NodalError::BranchLost);
    }
    Ok(((plus.0 - minus.0) / (2.0 * h), (plus.1 - minus.1) / (2.0 * h)))
}

/// Model families with closed-form nodal lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Ekc { a: f64, b: f64, c: f64 },
    Eps20 { a: f64, b: f64, eps: f64, c: f64 },
    Case20 { a: f64, b: f64, c: f64 },
    Case30 { a: f64, b: f64, c: f64 },
}

impl Family {
    pub fn spec(&self) -> WaveSpec {
        match *self {
            Family::Ekc { a, b, c } => WaveSpec::ekc(a, b, c),
            Family::Eps20 { a, b, eps, c } => WaveSpec::case_eps20(a, b, eps, c),
            Family::Case20 { a, b, c } => WaveSpec::case20(a, b, c),
            Family::Case30 { a, b, c } => WaveSpec::case30(a, b, c),
        }
    }

    /// All nodal points at time `t`. `NoRealRoot` and empty-pair cases map to
    /// an empty list; genuine singular instants propagate as errors.
    pub fn nodes(&self, t: f64) -> Result<Vec<NodalState>, NodalError> {
        let res = match *self {
            Family::Ekc { a, b, c } => nodal_ekc(t, a, b, c).map(|n| vec![n]),
            Family::Eps20 { a, b, eps, c } => nodal_eps20(t, a, b, eps, c),
            Family::Case20 { a, b, c } => nodal_case20(t, a, b, c),
            Family::Case30 { a, b, c } => nodal_case30(t, a, b, c),
        };
        match res {
            Err(NodalError::NoRealRoot { .. }) => Ok(Vec::new()),
            other => other,
        }
    }

    pub fn c(&self) -> f64 {
        match *self {
            Family::Ekc { c, .. }
            | Family::Eps20 { c, .. }
            | Family::Case20 { c, .. }
            | Family::Case30 { c, .. } => c,
        }
    }
}

/// A tracked nodal line: one labeled branch sampled over time.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub branch_id: i32,
    pub points: Vec<NodalState>,
}

/// Result of tracking nodal lines over a time range.
#[derive(Debug, Clone)]
pub struct TrackResult {
    pub lines: Vec<Polyline>,
    pub events: Vec<NodalEvent>,
}

/// Track the nodal lines of a family over `[t0, t1]` with step `dt`.
///
/// Branch labels are matched step to step by nearest neighbor with velocity
/// prediction; events are emitted when the branch count changes.
pub fn track_nodal_lines(family: &Family, t0: f64, t1: f64, dt: f64) -> TrackResult {
    struct Live {
        branch_id: i32,
        last: NodalState,
        line_idx: usize,
    }
    let mut lines: Vec<Polyline> = Vec::new();
    let mut live: Vec<Live> = Vec::new();
    let mut events: Vec<NodalEvent> = Vec::new();
    let mut next_id = 0;
    // branches that recently escaped; candidates for label interpolation
    let mut recently_escaped: Vec<(i32, f64)> = Vec::new();

    let steps = ((t1 - t0) / dt).round() as usize;
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        let nodes = match family.nodes(t) {
            Ok(n) => n,
            Err(_) => continue, // singular instant: skip the sample
        };
        // greedy nearest-neighbor match with velocity prediction
        let mut taken = vec![false; nodes.len()];
        let mut new_live: Vec<Live> = Vec::new();
        let mut lost: Vec<Live> = Vec::new();
        for mut lv in live.drain(..) {
            let gap = t - lv.last.t;
            let px = lv.last.x + lv.last.xdot * gap;
            let py = lv.last.y + lv.last.ydot * gap;
            let threshold = 10.0 * gap.abs() * lv.last.speed() + 0.05;
            let mut best: Option<(usize, f64)> = None;
            for (ni, n) in nodes.iter().enumerate() {
                if taken[ni] {
                    continue;
                }
                let d = (n.x - px).hypot(n.y - py);
                if d < threshold && best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((ni, d));
                }
            }
            match best {
                Some((ni, _)) => {
                    taken[ni] = true;
                    let mut node = nodes[ni];
                    node.branch_id = lv.branch_id;
                    lines[lv.line_idx].points.push(node);
                    lv.last = node;
                    new_live.push(lv);
                }
                None => lost.push(lv),
            }
        }
        // losses: a simultaneous double loss is an annihilation (the pair may
        // meet at a point or leave along y to infinity together); a single
        // loss is an escape
        let mut lost_positions: Vec<(f64, f64)> = lost.iter().map(|lv| (lv.last.x, lv.last.y)).collect();
        for lv in &lost {
            recently_escaped.push((lv.branch_id, t));
        }
        while let Some((x, y)) = lost_positions.pop() {
            if let Some(j) = lost_positions
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    let da = (a.0 - x).hypot(a.1 - y);
                    let db = (b.0 - x).hypot(b.1 - y);
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(j, _)| j)
            {
                let (ox, oy) = lost_positions.remove(j);
                let close = (ox - x).hypot(oy - y) < 1.0;
                events.push(NodalEvent {
                    kind: EventKind::PairAnnihilation,
                    t_bif: t,
                    location: close.then(|| ((x + ox) / 2.0, (y + oy) / 2.0)),
                });
            } else {
                let bounded = x.abs() < INFINITY_CUTOFF && y.abs() < INFINITY_CUTOFF;
                events.push(NodalEvent {
                    kind: EventKind::EscapeToInfinity,
                    t_bif: t,
                    location: bounded.then_some((x, y)),
                });
            }
        }
        // births: a simultaneous double birth is a pair creation, a single
        // one an entry from infinity
        let mut born: Vec<usize> = (0..nodes.len()).filter(|&ni| !taken[ni]).collect();
        while let Some(ni) = born.pop() {
            let n = nodes[ni];
            let partner = born
                .iter()
                .enumerate()
                .min_by(|(_, &a), (_, &b)| {
                    let da = (nodes[a].x - n.x).hypot(nodes[a].y - n.y);
                    let db = (nodes[b].x - n.x).hypot(nodes[b].y - n.y);
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(j, _)| j);
            let (kind, ids) = match partner {
                Some(pj) => {
                    let oj = born.remove(pj);
                    (EventKind::PairCreation, vec![ni, oj])
                }
                None => (EventKind::EntryFromInfinity, vec![ni]),
            };
            if k > 0 {
                let loc = match kind {
                    EventKind::PairCreation => {
                        let (ox, oy) = (nodes[ids[1]].x, nodes[ids[1]].y);
                        ((ox - n.x).hypot(oy - n.y) < 1.0)
                            .then(|| ((n.x + ox) / 2.0, (n.y + oy) / 2.0))
                    }
                    _ => Some((n.x, n.y)),
                };
                events.push(NodalEvent { kind, t_bif: t, location: loc });
            }
            for id in ids {
                let mut node = nodes[id];
                // label interpolation: a lone re-entry soon after an escape
                // keeps its old label
                let reuse = if kind == EventKind::EntryFromInfinity {
                    recently_escaped
                        .iter()
                        .position(|&(_, te)| t - te <= 10.0 * dt)
                        .map(|i| recently_escaped.remove(i).0)
                } else {
                    None
                };
                let branch_id = reuse.unwrap_or_else(|| {
                    let id = next_id;
                    next_id += 1;
                    id
                });
                node.branch_id = branch_id;
                lines.push(Polyline { branch_id, points: vec![node] });
                new_live.push(Live { branch_id, last: node, line_idx: lines.len() - 1 });
            }
        }
        recently_escaped.retain(|&(_, te)| t - te <= 10.0 * dt);
        live = new_live;
    }
    TrackResult { lines, events }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ekc_node_zeroes_psi() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        for &t in &[0.3, 0.7, 1.25, 2.0, 2.6, 4.0] {
            let n = nodal_ekc(t, 1.0, 1.0, C).unwrap();
            assert!(
                spec.eval_psi(n.x, n.y, t).norm() < TOL_NODE,
                "residual too large at t={t}"
            );
        }
    }

    #[test]
    fn ekc_velocity_matches_finite_difference() {
        let h = 1e-6;
        for &t in &[0.7, 1.25, 2.6] {
            let n = nodal_ekc(t, 1.0, 1.0, C).unwrap();
            let p = nodal_ekc(t + h, 1.0, 1.0, C).unwrap();
            let m = nodal_ekc(t - h, 1.0, 1.0, C).unwrap();
            assert_abs_diff_eq!(n.xdot, (p.x - m.x) / (2.0 * h), epsilon = 1e-6);
            assert_abs_diff_eq!(n.ydot, (p.y - m.y) / (2.0 * h), epsilon = 1e-6);
        }
    }

    #[test]
    fn ekc_escapes_near_sine_zero() {
        let c = C;
        let t_sing = std::f64::consts::PI / c;
        assert!(matches!(
            nodal_ekc(t_sing, 1.0, 1.0, c),
            Err(NodalError::NodeAtInfinity { .. })
        ));
        // just before the pole |x| is large
        let n = nodal_ekc(t_sing - 1e-4, 1.0, 1.0, c).unwrap();
        assert!(n.x.abs() > 1e3);
    }

    #[test]
    fn eps20_exact_roots_at_multiples_of_pi() {
        // a = 1: x = +1 at t = pi, x = -1 at t = 2 pi, both with y = 0
        let nodes = nodal_eps20(std::f64::consts::PI, 1.0, 1.0, 0.1, C).unwrap();
        assert!(nodes.iter().any(|n| (n.x - 1.0).abs() < 1e-12 && n.y.abs() < 1e-12));
        let nodes = nodal_eps20(2.0 * std::f64::consts::PI, 1.0, 1.0, 0.1, C).unwrap();
        assert!(nodes.iter().any(|n| (n.x + 1.0).abs() < 1e-12 && n.y.abs() < 1e-12));
    }

    #[test]
    fn eps20_roots_zero_psi() {
        let spec = WaveSpec::case_eps20(1.0, 1.0, 0.1, C);
        for &t in &[0.7, 1.3, 2.9, 5.1] {
            if let Ok(nodes) = nodal_eps20(t, 1.0, 1.0, 0.1, C) {
                for n in nodes {
                    assert!(
                        spec.eval_psi(n.x, n.y, t).norm() < TOL_NODE,
                        "residual at t={t}, x={}",
                        n.x
                    );
                }
            }
        }
    }

    #[test]
    fn eps20_plus_branch_tends_to_ekc() {
        let t = 0.9;
        let base = nodal_ekc(t, 1.0, 1.0, C).unwrap();
        let mut prev = f64::INFINITY;
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let nodes = nodal_eps20(t, 1.0, 1.0, eps, C).unwrap();
            let closest = nodes
                .iter()
                .map(|n| (n.x - base.x).hypot(n.y - base.y))
                .fold(f64::INFINITY, f64::min);
            assert!(closest < prev);
            prev = closest;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn case20_pair_at_half_pi() {
        // x^2 = 1 + 1/a, y = 0
        let a = 1.23;
        let nodes = nodal_case20(std::f64::consts::FRAC_PI_2, a, 1.15, C).unwrap();
        assert_eq!(nodes.len(), 2);
        let xe = (1.0 + 1.0 / a).sqrt();
        for n in &nodes {
            assert_abs_diff_eq!(n.x.abs(), xe, epsilon = 1e-12);
            assert_abs_diff_eq!(n.y, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn case20_origin_double_root_at_pi_when_a_is_one() {
        let nodes = nodal_case20(std::f64::consts::PI, 1.0, 1.15, C).unwrap();
        assert_eq!(nodes.len(), 2);
        for n in &nodes {
            assert!(n.x.abs() < 1e-7 && n.y.abs() < 1e-7);
        }
    }

    #[test]
    fn case20_pair_symmetric_and_zeroing() {
        let spec = WaveSpec::case20(1.23, 1.15, C);
        for &t in &[0.4, 1.0, 1.9, 3.3, 6.2] {
            let nodes = nodal_case20(t, 1.23, 1.15, C).unwrap();
            if nodes.len() == 2 {
                assert_abs_diff_eq!(nodes[0].x, -nodes[1].x, epsilon = 1e-12);
                assert_abs_diff_eq!(nodes[0].y, -nodes[1].y, epsilon = 1e-12);
                for n in &nodes {
                    assert!(spec.eval_psi(n.x, n.y, t).norm() < TOL_NODE);
                }
            }
        }
    }

    #[test]
    fn case30_root_count_follows_discriminant() {
        for &t in &[0.5, 1.1, 2.0, 2.5, 3.0, 4.0, 4.7, 5.5] {
            let sm = ((C - 2.0) * t).sin();
            let s2 = ((1.0 + C) * t).sin();
            let q = s2 / (1.23 * sm);
            match nodal_case30(t, 1.23, 1.15, C) {
                Ok(nodes) => {
                    let expected = if q.abs() <= 2.0 { 3 } else { 1 };
                    // roots at x ~ 0 are skipped (y at infinity), so allow <=
                    assert!(nodes.len() <= expected);
                    assert!(!nodes.is_empty());
                    let spec = WaveSpec::case30(1.23, 1.15, C);
                    for n in &nodes {
                        assert!(spec.eval_psi(n.x, n.y, t).norm() < TOL_NODE);
                    }
                }
                Err(e) => panic!("unexpected error at t={t}: {e}"),
            }
        }
    }

    #[test]
    fn case30_degenerate_root_at_bifurcation() {
        // double root x = -1 when q = -2: x^3 - 3x - 2 = (x+1)^2 (x-2)
        let roots = depressed_cubic_roots(-2.0 + 1e-15);
        assert!(roots.iter().any(|&x| (x - 2.0).abs() < 1e-6));
        assert!(roots.iter().filter(|&&x| (x + 1.0).abs() < 1e-6).count() >= 1);
    }

    #[test]
    fn refine_from_analytic_seed_converges_immediately() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        let t = 1.25;
        let n = nodal_ekc(t, 1.0, 1.0, C).unwrap();
        let r = refine_node(&spec, (n.x, n.y), t).unwrap();
        assert!((r.x - n.x).hypot(r.y - n.y) < 1e-10);
    }

    #[test]
    fn refine_from_perturbed_seed_finds_same_root() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        let t = 1.25;
        let n = nodal_ekc(t, 1.0, 1.0, C).unwrap();
        let r = refine_node(&spec, (n.x + 0.05, n.y - 0.05), t).unwrap();
        assert!((r.x - n.x).hypot(r.y - n.y) < 1e-9);
    }

    #[test]
    fn refine_far_from_root_fails() {
        // Psi_00 + 0.1 Psi_11 has no simple zeros at generic times (the
        // degenerate same-n1-or-n2 family), so Newton cannot converge
        let spec = WaveSpec::new(
            vec![
                crate::wavefield::Term { n1: 0, n2: 0, coeff: num_complex::Complex64::new(1.0, 0.0) },
                crate::wavefield::Term { n1: 1, n2: 1, coeff: num_complex::Complex64::new(0.1, 0.0) },
            ],
            C,
        )
        .unwrap();
        assert!(refine_node(&spec, (2.0, 2.0), 0.4).is_err());
    }

    #[test]
    fn fd_velocity_matches_analytic_for_ekc() {
        let spec = WaveSpec::ekc(1.0, 1.0, C);
        for &t in &[0.7, 1.25, 2.6] {
            let n = nodal_ekc(t, 1.0, 1.0, C).unwrap();
            let (vx, vy) = velocity_by_continuation(&spec, (n.x, n.y), t, 1e-5).unwrap();
            assert_abs_diff_eq!(vx, n.xdot, epsilon = 1e-6);
            assert_abs_diff_eq!(vy, n.ydot, epsilon = 1e-6);
        }
    }

    #[test]
    fn tracker_case30_entry_near_t1() {
        let fam = Family::Case30 { a: 1.23, b: 1.15, c: C };
        let res = track_nodal_lines(&fam, 2.0, 3.0, 0.005);
        let t1 = 2.43;
        assert!(
            res.events
                .iter()
                .any(|e| e.kind == EventKind::EntryFromInfinity && (e.t_bif - t1).abs() < 0.05),
            "events: {:?}",
            res.events
        );
        // pair creation near 2.75
        assert!(res
            .events
            .iter()
            .any(|e| e.kind == EventKind::PairCreation && (e.t_bif - 2.754).abs() < 0.05));
    }

    #[test]
    fn tracker_ekc_single_branch_quiet_between_singularities() {
        let fam = Family::Ekc { a: 1.0, b: 1.0, c: C };
        let res = track_nodal_lines(&fam, 0.05, std::f64::consts::PI / C - 0.05, 0.005);
        // no events away from the singular instants k pi/(1+c)
        for e in &res.events {
            let k = ((1.0 + C) * e.t_bif / std::f64::consts::PI).round();
            let ts = k * std::f64::consts::PI / (1.0 + C);
            assert!(
                (e.t_bif - ts).abs() < 0.1,
                "unexpected event away from singular instant: {e:?}"
            );
        }
    }

    #[test]
    fn tracker_case20_pairs_at_sign_changes() {
        let fam = Family::Case20 { a: 1.23, b: 1.15, c: C };
        let res = track_nodal_lines(&fam, 0.1, 6.0, 0.005);
        assert!(res.events.iter().any(|e| e.kind == EventKind::PairCreation
            || e.kind == EventKind::PairAnnihilation));
    }
}
