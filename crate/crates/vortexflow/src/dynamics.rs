//! Bohmian trajectory integration in the rest frame, deviation-vector
//! (variational) dynamics, finite-time Lyapunov exponents, and encounter
//! detection against nodal point – X-point complexes.

use std::cell::Cell;

use crate::nodal::Family;
use crate::rk::{self, StepAbort, StepperOpts};
use crate::wavefield::WaveSpec;
use crate::xcomplex;

/// Default per-step relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Node-adaptive step cap `h <= KAPPA / |v|^2`, bounding the rotation per
/// step near a node (the angular frequency grows as `R^-2`).
pub const KAPPA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortKind {
    /// Trajectory hit a (numerically) nodal point.
    NodeCollision,
    /// Left the sanity box; field values no longer trustworthy.
    Escaped,
    /// Step-count or step-size breakdown.
    StepperStall,
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// `ln(xi(t)/xi(0))`, renormalization-free; zero for non-variational runs.
    pub log_xi: f64,
}

/// Window-based close-approach record against a complex.
#[derive(Debug, Clone, Copy)]
pub struct EncounterRecord {
    pub t_a: f64,
    pub t_b: f64,
    /// Minimum distance to an X-point inside the window.
    pub d: f64,
    /// Time of closest approach.
    pub t_min: f64,
    /// `R_X` of the complex at closest approach.
    pub r_x: f64,
    pub branch_id: i32,
    pub kind: EncounterType,
    /// `xi(t_b)/xi(t_a)` across the window (1 for non-variational runs).
    pub xi_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncounterType {
    TypeI,
    TypeII,
    Unclassified,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct RunStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
    /// Smallest relative wavefunction magnitude seen along the run.
    pub min_rel_psi: f64,
    /// X-point refinements that failed during encounter tracking.
    pub xpoint_failures: u64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub x0: (f64, f64),
    pub xi0: (f64, f64),
    pub samples: Vec<Sample>,
    pub encounters: Vec<EncounterRecord>,
    pub stats: RunStats,
    pub aborted: Option<AbortKind>,
    /// Last reached time.
    pub t_end: f64,
    /// `ln(xi(t_end)/xi(0))`.
    pub final_log_xi: f64,
}

impl TrajectoryRecord {
    /// Finite-time Lyapunov characteristic number `chi(t) = ln(xi/xi0)/t`.
    pub fn ftle(&self, t: f64) -> f64 {
        ftle(self, t)
    }

    pub fn final_ftle(&self) -> f64 {
        if self.t_end > 0.0 {
            self.final_log_xi / self.t_end
        } else {
            0.0
        }
    }
}

/// `chi(t)` from the stored samples (nearest sample at or after `t`,
/// interpolated linearly in `ln xi`).
pub fn ftle(record: &TrajectoryRecord, t: f64) -> f64 {
    assert!(t > 0.0, "ftle needs t > 0");
    let s = &record.samples;
    if s.is_empty() {
        return record.final_log_xi / record.t_end.max(f64::MIN_POSITIVE) * (record.t_end / t);
    }
    match s.binary_search_by(|p| p.t.partial_cmp(&t).unwrap()) {
        Ok(i) => s[i].log_xi / t,
        Err(0) => s[0].log_xi / s[0].t.max(f64::MIN_POSITIVE),
        Err(i) if i == s.len() => record.final_log_xi / record.t_end,
        Err(i) => {
            let (a, b) = (&s[i - 1], &s[i]);
            let w = (t - a.t) / (b.t - a.t);
            (a.log_xi + w * (b.log_xi - a.log_xi)) / t
        }
    }
}

/// Count of encounters passing the corrected index
/// `N(R_X <= 0.5, d <= R_X/2)`.
pub fn corrected_encounters(encounters: &[EncounterRecord]) -> usize {
    encounters
        .iter()
        .filter(|e| e.r_x <= 0.5 && e.d <= e.r_x / 2.0)
        .count()
}

/// How sample times are chosen for the output record.
#[derive(Debug, Clone, Copy)]
pub enum SamplePlan {
    /// Fixed spacing.
    Uniform { dt: f64 },
    /// Geometric spacing `t_k = first * ratio^k`, right for FTLE slopes.
    Geometric { first: f64, ratio: f64 },
}

impl SamplePlan {
    fn first(&self) -> f64 {
        match *self {
            SamplePlan::Uniform { dt } => dt,
            SamplePlan::Geometric { first, .. } => first,
        }
    }
    fn next(&self, t: f64) -> f64 {
        match *self {
            SamplePlan::Uniform { dt } => t + dt,
            SamplePlan::Geometric { first, ratio } => {
                let n = (t / first).max(1.0);
                (n * ratio).max(n + 1e-9) * first
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateConfig {
    pub tol: f64,
    pub kappa: f64,
    pub plan: SamplePlan,
    pub max_steps: u64,
    /// Abort when |x| or |y| exceeds this bound.
    pub escape_bound: f64,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            kappa: KAPPA,
            plan: SamplePlan::Geometric { first: 1e-2, ratio: 1.02 },
            max_steps: 500_000_000,
            escape_bound: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EncounterConfig {
    /// Count windows with approach distance `d <= d_max`.
    pub d_max: f64,
    /// Window width.
    pub window: f64,
    /// Solve for X-points only when the trajectory is this close to a node.
    pub node_gate: f64,
    /// Spacing of distance samples (and of the complex cache).
    pub sample_dt: f64,
    /// Winding-angle slack for type-I classification (radians).
    pub delta_winding: f64,
}

impl Default for EncounterConfig {
    fn default() -> Self {
        Self {
            d_max: 0.2,
            window: 0.1,
            node_gate: 4.0,
            sample_dt: 0.01,
            delta_winding: 3.2,
        }
    }
}

/// Integrate a plain trajectory (positions only).
pub fn integrate(
    spec: &WaveSpec,
    x0: f64,
    y0: f64,
    t_end: f64,
    cfg: &IntegrateConfig,
) -> TrajectoryRecord {
    run(spec, None, (x0, y0), (1.0, 0.0), t_end, cfg, None)
}

/// Integrate trajectory plus deviation vector (tangent flow), with periodic
/// renormalization and exact log bookkeeping.
pub fn integrate_variational(
    spec: &WaveSpec,
    x0: f64,
    y0: f64,
    xi0: (f64, f64),
    t_end: f64,
    cfg: &IntegrateConfig,
) -> TrajectoryRecord {
    run(spec, None, (x0, y0), xi0, t_end, cfg, None)
}

/// Variational integration with encounter detection against the complexes of
/// a model family.
pub fn integrate_with_encounters(
    family: &Family,
    x0: f64,
    y0: f64,
    xi0: (f64, f64),
    t_end: f64,
    cfg: &IntegrateConfig,
    enc: &EncounterConfig,
) -> TrajectoryRecord {
    let spec = family.spec();
    run(&spec, Some(family), (x0, y0), xi0, t_end, cfg, Some(enc))
}

// --- encounter tracking ------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct TrackedComplex {
    branch_id: i32,
    node_pos: (f64, f64),
    node_vel: (f64, f64),
    xpoint_abs: (f64, f64),
    r_x: f64,
    /// Sign of the rotation coefficient d0 (+1 counterclockwise).
    d0_sign: f64,
}

struct ComplexCache {
    t_q: f64,
    items: Vec<TrackedComplex>,
    failures: u64,
}

struct WindowState {
    index: i64,
    d_min: f64,
    t_min: f64,
    r_x_at_min: f64,
    branch_at_min: i32,
    d0_sign_at_min: f64,
    log_xi_start: f64,
    // per-branch winding accumulation: (branch, last angle, total)
    winding: Vec<(i32, f64, f64)>,
    far_side_at_min: bool,
}

impl WindowState {
    fn fresh(index: i64, log_xi: f64) -> Self {
        WindowState {
            index,
            d_min: f64::INFINITY,
            t_min: 0.0,
            r_x_at_min: f64::NAN,
            branch_at_min: -1,
            d0_sign_at_min: 1.0,
            log_xi_start: log_xi,
            winding: Vec::new(),
            far_side_at_min: false,
        }
    }
}

struct Detector<'a> {
    family: &'a Family,
    cfg: EncounterConfig,
    cache: ComplexCache,
    window: WindowState,
    out: Vec<EncounterRecord>,
}

impl<'a> Detector<'a> {
    fn new(family: &'a Family, cfg: EncounterConfig) -> Self {
        Detector {
            family,
            cfg,
            cache: ComplexCache { t_q: f64::NAN, items: Vec::new(), failures: 0 },
            window: WindowState::fresh(0, 0.0),
            out: Vec::new(),
        }
    }

    fn refresh_cache(&mut self, t: f64, pos: (f64, f64), spec: &WaveSpec) {
        let t_q = (t / self.cfg.sample_dt).round() * self.cfg.sample_dt;
        if self.cache.t_q == t_q {
            return;
        }
        let prev: Vec<TrackedComplex> = self.cache.items.drain(..).collect();
        self.cache.t_q = t_q;
        let nodes = match self.family.nodes(t_q) {
            Ok(n) => n,
            Err(_) => return,
        };
        for (i, node) in nodes.iter().enumerate() {
            let dist_node = (pos.0 - node.x).hypot(pos.1 - node.y);
            if dist_node > self.cfg.node_gate {
                continue;
            }
            // seed from the previous X-point of the nearest old complex
            let seed = prev
                .iter()
                .filter(|c| {
                    (c.node_pos.0 - node.x).hypot(c.node_pos.1 - node.y) < 0.5
                })
                .map(|c| (c.xpoint_abs.0 - node.x, c.xpoint_abs.1 - node.y))
                .next();
            let exp = spec.local_expansion(node.x, node.y, t_q, node.velocity());
            let guess = match seed.map_or_else(|| xcomplex::xpoint_guess(&exp), Ok) {
                Ok(g) => g,
                Err(_) => {
                    self.cache.failures += 1;
                    continue;
                }
            };
            let mut node_lab = *node;
            node_lab.branch_id = i as i32;
            match xcomplex::xpoint_refine_robust(spec, &node_lab, guess) {
                Ok(snap) => self.cache.items.push(TrackedComplex {
                    branch_id: i as i32,
                    node_pos: (node.x, node.y),
                    node_vel: node.velocity(),
                    xpoint_abs: (node.x + snap.xpoint.0, node.y + snap.xpoint.1),
                    r_x: snap.r_x,
                    d0_sign: snap.d0.signum(),
                }),
                Err(_) => {
                    self.cache.failures += 1;
                }
            }
        }
    }

    fn observe(&mut self, t: f64, pos: (f64, f64), log_xi: f64, spec: &WaveSpec) {
        let idx = (t / self.cfg.window).floor() as i64;
        if idx != self.window.index {
            self.close_window(log_xi);
            self.window = WindowState::fresh(idx, log_xi);
        }
        self.refresh_cache(t, pos, spec);
        let dt_off = t - self.cache.t_q;
        for item in &self.cache.items {
            // node and X-point drift with the node velocity inside the cache step
            let nx = item.node_pos.0 + item.node_vel.0 * dt_off;
            let ny = item.node_pos.1 + item.node_vel.1 * dt_off;
            let xx = item.xpoint_abs.0 + item.node_vel.0 * dt_off;
            let xy = item.xpoint_abs.1 + item.node_vel.1 * dt_off;
            let d = (pos.0 - xx).hypot(pos.1 - xy);
            if d < self.window.d_min {
                self.window.d_min = d;
                self.window.t_min = t;
                self.window.r_x_at_min = item.r_x;
                self.window.branch_at_min = item.branch_id;
                self.window.d0_sign_at_min = item.d0_sign;
                // far side of the X-point from the node
                let rx_vec = (xx - nx, xy - ny);
                let px_vec = (pos.0 - xx, pos.1 - xy);
                self.window.far_side_at_min = rx_vec.0 * px_vec.0 + rx_vec.1 * px_vec.1 > 0.0;
            }
            // winding about the node
            let ang = (pos.1 - ny).atan2(pos.0 - nx);
            match self
                .window
                .winding
                .iter_mut()
                .find(|(b, _, _)| *b == item.branch_id)
            {
                Some((_, last, total)) => {
                    let mut dphi = ang - *last;
                    while dphi > std::f64::consts::PI {
                        dphi -= 2.0 * std::f64::consts::PI;
                    }
                    while dphi < -std::f64::consts::PI {
                        dphi += 2.0 * std::f64::consts::PI;
                    }
                    *total += dphi;
                    *last = ang;
                }
                None => self.window.winding.push((item.branch_id, ang, 0.0)),
            }
        }
    }

    fn close_window(&mut self, log_xi_end: f64) {
        let w = &self.window;
        if w.d_min.is_finite() && w.d_min <= self.cfg.d_max {
            let winding = w
                .winding
                .iter()
                .find(|(b, _, _)| *b == w.branch_at_min)
                .map(|(_, _, tot)| *tot)
                .unwrap_or(0.0);
            let kind = classify_winding(
                winding,
                w.d0_sign_at_min,
                w.far_side_at_min,
                self.cfg.delta_winding,
            );
            self.out.push(EncounterRecord {
                t_a: w.index as f64 * self.cfg.window,
                t_b: (w.index + 1) as f64 * self.cfg.window,
                d: w.d_min,
                t_min: w.t_min,
                r_x: w.r_x_at_min,
                branch_id: w.branch_at_min,
                kind,
                xi_ratio: (log_xi_end - w.log_xi_start).exp(),
            });
        }
    }
}

// --- driver -------------------------------------------------------------------

fn run(
    spec: &WaveSpec,
    family: Option<&Family>,
    start: (f64, f64),
    xi0: (f64, f64),
    t_end: f64,
    cfg: &IntegrateConfig,
    enc: Option<&EncounterConfig>,
) -> TrajectoryRecord {
    let xi_norm0 = xi0.0.hypot(xi0.1);
    assert!(xi_norm0 > 0.0, "deviation vector must be nonzero");
    let speed_sq = Cell::new(1.0_f64);
    let min_rel = Cell::new(f64::INFINITY);
    let escaped_flag = Cell::new(false);
    let mut stats = RunStats { min_rel_psi: f64::INFINITY, ..Default::default() };

    let mut detector = match (family, enc) {
        (Some(f), Some(e)) => Some(Detector::new(f, *e)),
        _ => None,
    };

    let mut samples: Vec<Sample> = Vec::new();
    let mut next_sample = cfg.plan.first();
    let escape = cfg.escape_bound;

    // state: x, y, xi_x, xi_y (xi renormalized; log_acc keeps the true scale)
    let mut y = [start.0, start.1, xi0.0 / xi_norm0, xi0.1 / xi_norm0];
    let mut t = 0.0;
    let mut log_acc = 0.0; // ln |xi|/|xi0| accumulated through renormalizations
    let mut aborted = None;

    'outer: while t < t_end && aborted.is_none() {
        let mut renorm = false;
        let rhs = |tt: f64, s: &[f64; 4], ds: &mut [f64; 4]| -> Result<(), StepAbort> {
            if s[0].abs() > escape || s[1].abs() > escape {
                escaped_flag.set(true);
                return Err(StepAbort::Halt);
            }
            let d = spec.poly_derivs(s[0], s[1], tt);
            let scale = d.scale.max(f64::MIN_POSITIVE);
            let rel = d.p.norm() / scale;
            if rel < min_rel.get() {
                min_rel.set(rel);
            }
            if rel < spec.tol_singular() {
                return Err(StepAbort::Singular { t: tt });
            }
            let gx = d.px / d.p;
            let gy = d.py / d.p;
            ds[0] = gx.im;
            ds[1] = gy.im;
            speed_sq.set(ds[0] * ds[0] + ds[1] * ds[1]);
            let jxx = (d.pxx / d.p - gx * gx).im;
            let jyy = (d.pyy / d.p - gy * gy).im;
            let jxy = (d.pxy / d.p - gx * gy).im;
            ds[2] = jxx * s[2] + jxy * s[3];
            ds[3] = jxy * s[2] + jyy * s[3];
            Ok(())
        };
        let kappa = cfg.kappa;
        let cap = |_t: f64, _s: &[f64; 4]| kappa / speed_sq.get().max(1e-9);

        let opts = StepperOpts {
            rtol: cfg.tol,
            atol: cfg.tol * 1e-2,
            h_init: 1e-4,
            h_max: 0.05,
            max_steps: cfg.max_steps,
        };
        let seg_end = t_end;
        let detector_ref = &mut detector;
        let samples_ref = &mut samples;
        let next_sample_ref = &mut next_sample;
        let result = rk::integrate(
            rhs,
            t,
            y,
            seg_end,
            &opts,
            cap,
            |seg: &rk::DenseStep<4>| {
                // encounter sampling on the fine grid, plus the step endpoint
                if let Some(det) = detector_ref.as_mut() {
                    let dt_s = det.cfg.sample_dt;
                    let mut ts = (seg.t0 / dt_s).floor() * dt_s + dt_s;
                    while ts <= seg.t1 {
                        if ts > seg.t0 {
                            let v = seg.eval(ts);
                            let lx = log_acc + v[2].hypot(v[3]).ln();
                            det.observe(ts, (v[0], v[1]), lx, spec);
                        }
                        ts += dt_s;
                    }
                    let lx = log_acc + seg.y1[2].hypot(seg.y1[3]).ln();
                    det.observe(seg.t1, (seg.y1[0], seg.y1[1]), lx, spec);
                }
                // output samples
                while *next_sample_ref <= seg.t1 {
                    if *next_sample_ref > seg.t0 {
                        let v = seg.eval(*next_sample_ref);
                        samples_ref.push(Sample {
                            t: *next_sample_ref,
                            x: v[0],
                            y: v[1],
                            log_xi: log_acc + v[2].hypot(v[3]).ln(),
                        });
                    }
                    let nxt = cfg.plan.next(*next_sample_ref);
                    *next_sample_ref = if nxt > *next_sample_ref {
                        nxt
                    } else {
                        *next_sample_ref * 1.0001
                    };
                }
                // renormalize the deviation vector when it has grown 1e6-fold
                let mag = seg.y1[2].hypot(seg.y1[3]);
                if mag > 1e6 || mag < 1e-6 {
                    return Err(StepAbort::Halt);
                }
                Ok(())
            },
        );
        stats.accepted_steps += result.stats.accepted;
        stats.rejected_steps += result.stats.rejected;
        stats.rhs_evals += result.stats.rhs_evals;
        t = result.t;
        y = result.y;
        match result.abort {
            None => break 'outer,
            Some(StepAbort::Halt) => {
                let mag = y[2].hypot(y[3]);
                if escaped_flag.get() {
                    aborted = Some(AbortKind::Escaped);
                } else if mag > 1e6 || mag < 1e-6 {
                    log_acc += mag.ln();
                    y[2] /= mag;
                    y[3] /= mag;
                    renorm = true;
                } else {
                    aborted = Some(AbortKind::StepperStall);
                }
            }
            Some(StepAbort::Singular { .. }) => {
                aborted = Some(AbortKind::NodeCollision);
            }
        }
        if !renorm && aborted.is_none() {
            break;
        }
    }

    if let Some(det) = detector.as_mut() {
        let lx = log_acc + y[2].hypot(y[3]).ln();
        det.close_window(lx);
        stats.xpoint_failures = det.cache.failures;
    }
    stats.min_rel_psi = min_rel.get();
    let final_log_xi = log_acc + y[2].hypot(y[3]).ln();
    TrajectoryRecord {
        x0: start,
        xi0,
        samples,
        encounters: detector.map(|d| d.out).unwrap_or_default(),
        stats,
        aborted,
        t_end: t,
        final_log_xi,
    }
}

/// Encounter type from the winding angle about the node.
///
/// A type-I pass surrounds the separatrix loop: it gains roughly a full extra
/// turn, in the node's own rotation sense, relative to a type-II pass below
/// the X-point. `delta` is the slack on the full turn.
pub fn classify_winding(
    winding: f64,
    d0_sign: f64,
    far_side_at_min: bool,
    delta: f64,
) -> EncounterType {
    let sense = winding * d0_sign;
    if sense >= 2.0 * std::f64::consts::PI - delta {
        EncounterType::TypeI
    } else if winding.abs() < std::f64::consts::PI && far_side_at_min {
        EncounterType::TypeII
    } else {
        EncounterType::Unclassified
    }
}

/// Winding angle of a point sequence about (moving) centers.
///
/// Used by tests and by the scattering module to validate encounter types.
pub fn winding_angle(points: &[(f64, f64)], centers: &[(f64, f64)]) -> f64 {
    assert_eq!(points.len(), centers.len());
    let mut total = 0.0;
    let mut last: Option<f64> = None;
    for (p, c) in points.iter().zip(centers) {
        let ang = (p.1 - c.1).atan2(p.0 - c.0);
        if let Some(prev) = last {
            let mut dphi = ang - prev;
            while dphi > std::f64::consts::PI {
                dphi -= 2.0 * std::f64::consts::PI;
            }
            while dphi < -std::f64::consts::PI {
                dphi += 2.0 * std::f64::consts::PI;
            }
            total += dphi;
        }
        last = Some(ang);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ftle_of_constant_xi_is_zero() {
        let rec = TrajectoryRecord {
            x0: (0.0, 0.0),
            xi0: (1.0, 0.0),
            samples: vec![
                Sample { t: 1.0, x: 0.0, y: 0.0, log_xi: 0.0 },
                Sample { t: 2.0, x: 0.0, y: 0.0, log_xi: 0.0 },
            ],
            encounters: vec![],
            stats: RunStats::default(),
            aborted: None,
            t_end: 2.0,
            final_log_xi: 0.0,
        };
        assert_abs_diff_eq!(ftle(&rec, 1.5), 0.0);
    }

    #[test]
    fn ftle_of_exponential_growth_recovers_rate() {
        let lam = 0.37;
        let samples: Vec<Sample> = (1..=100)
            .map(|k| {
                let t = k as f64 * 0.1;
                Sample { t, x: 0.0, y: 0.0, log_xi: lam * t }
            })
            .collect();
        let rec = TrajectoryRecord {
            x0: (0.0, 0.0),
            xi0: (1.0, 0.0),
            samples,
            encounters: vec![],
            stats: RunStats::default(),
            aborted: None,
            t_end: 10.0,
            final_log_xi: lam * 10.0,
        };
        assert_abs_diff_eq!(ftle(&rec, 5.05), lam, epsilon = 1e-12);
    }

    #[test]
    fn corrected_index_rules() {
        let base = EncounterRecord {
            t_a: 0.0,
            t_b: 0.1,
            d: 0.1,
            t_min: 0.05,
            r_x: 0.4,
            branch_id: 0,
            kind: EncounterType::Unclassified,
            xi_ratio: 1.0,
        };
        let counted = base;
        let too_big = EncounterRecord { r_x: 0.8, ..base };
        let too_far = EncounterRecord { d: 0.3, ..base };
        assert_eq!(corrected_encounters(&[counted, too_big, too_far]), 1);
    }

    #[test]
    fn deviation_is_linear_in_initial_vector() {
        let spec = WaveSpec::case20(1.23, 1.15, C);
        let cfg = IntegrateConfig {
            plan: SamplePlan::Uniform { dt: 1.0 },
            ..Default::default()
        };
        let a = integrate_variational(&spec, -1.2, 0.8, (1.0, 0.0), 10.0, &cfg);
        let b = integrate_variational(&spec, -1.2, 0.8, (2.0, 0.0), 10.0, &cfg);
        // ln(xi/xi0) identical when xi0 is doubled
        assert_abs_diff_eq!(a.final_log_xi, b.final_log_xi, epsilon = 1e-6);
    }

    #[test]
    fn central_symmetry_of_case20_orbits() {
        let spec = WaveSpec::case20(1.23, 1.15, C);
        let cfg = IntegrateConfig {
            plan: SamplePlan::Uniform { dt: 5.0 },
            ..Default::default()
        };
        let fwd = integrate(&spec, 0.85, 1.19, 20.0, &cfg);
        let mir = integrate(&spec, -0.85, -1.19, 20.0, &cfg);
        assert!(fwd.aborted.is_none() && mir.aborted.is_none());
        for (a, b) in fwd.samples.iter().zip(mir.samples.iter()) {
            assert_abs_diff_eq!(a.x, -b.x, epsilon = 1e-6);
            assert_abs_diff_eq!(a.y, -b.y, epsilon = 1e-6);
        }
    }

    #[test]
    fn tolerance_convergence_at_t100() {
        let spec = WaveSpec::case20(1.23, 1.15, C);
        let run_tol = |tol: f64| {
            let cfg = IntegrateConfig {
                tol,
                plan: SamplePlan::Uniform { dt: 100.0 },
                ..Default::default()
            };
            let r = integrate(&spec, -1.5, 0.1275, 100.0, &cfg);
            (r.samples.last().map(|s| (s.x, s.y)).unwrap(), r.aborted)
        };
        let (coarse, ab1) = run_tol(1e-8);
        let (fine, ab2) = run_tol(1e-11);
        assert!(ab1.is_none() && ab2.is_none());
        // regular orbit: endpoints must agree tightly under tolerance refinement
        assert!((coarse.0 - fine.0).hypot(coarse.1 - fine.1) < 1e-4);
    }

    #[test]
    fn winding_angle_of_full_circle() {
        let pts: Vec<(f64, f64)> = (0..=48)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 48.0;
                (a.cos(), a.sin())
            })
            .collect();
        let centers = vec![(0.0, 0.0); pts.len()];
        assert_abs_diff_eq!(
            winding_angle(&pts, &centers),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-9
        );
    }
}
