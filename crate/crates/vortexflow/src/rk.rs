//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! The driver is deliberately small: fixed-dimension state arrays, a PI step
//! controller, an optional per-state step cap (used to resolve the `R^-2`
//! angular-frequency blow-up near wavefunction nodes), and a dense-output
//! observer that receives every accepted step segment.

/// Why the right-hand side refused a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepAbort {
    /// The proposed state hit a (numerically) singular field point.
    Singular { t: f64 },
    /// Observer-requested stop.
    Halt,
}

#[derive(Debug, Clone, Copy)]
pub struct StepperOpts {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for StepperOpts {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: u64::MAX,
        }
    }
}

/// Counters for the integration run.
#[derive(Debug, Default, Clone, Copy)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// One accepted step with its 4th-order interpolant.
pub struct DenseStep<'a, const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64; N],
    pub y1: &'a [f64; N],
    rcont: &'a [[f64; N]; 5],
}

impl<const N: usize> DenseStep<'_, N> {
    /// State at `t` within `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / (self.t1 - self.t0);
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        out
    }
}

/// Outcome of [`integrate`].
pub struct Integration<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stats: StepStats,
    /// Set when the run stopped early.
    pub abort: Option<StepAbort>,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense-output weights (Hairer, Nørsett & Wanner)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrate `dy/dt = f(t, y)` from `(t0, y0)` to `t_end`.
///
/// `f` may refuse a state (singular field); the run then stops and reports the
/// abort reason. `step_cap` bounds the step size from the current state;
/// `observer` sees every accepted step and may also halt the run.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N], &mut [f64; N]) -> Result<(), StepAbort>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &StepperOpts,
    mut step_cap: impl FnMut(f64, &[f64; N]) -> f64,
    mut observer: impl FnMut(&DenseStep<N>) -> Result<(), StepAbort>,
) -> Integration<N> {
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = [0.0; N];
    let dir = (t_end - t0).signum();

    macro_rules! eval {
        ($t:expr, $y:expr, $k:expr) => {
            stats.rhs_evals += 1;
            if let Err(reason) = f($t, $y, $k) {
                return Integration { t, y, stats, abort: Some(reason) };
            }
        };
    }

    eval!(t, &y, &mut k1);
    let mut h = opts.h_init.min(opts.h_max).copysign(dir);
    let mut facold: f64 = 1e-4;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const SAFE: f64 = 0.9;
    const FACMIN: f64 = 0.2;
    const FACMAX: f64 = 6.0;

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        ([0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N], [0.0; N]);
    let mut ytmp = [0.0; N];

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Integration { t, y, stats, abort: Some(StepAbort::Halt) };
        }
        let cap = step_cap(t, &y).max(1e-14);
        h = h.abs().min(opts.h_max).min(cap).copysign(dir);
        let mut last = false;
        if (t + 1.01 * h - t_end) * dir > 0.0 {
            h = t_end - t;
            last = true;
        }

        for i in 0..N {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        eval!(t + 0.2 * h, &ytmp, &mut k2);
        for i in 0..N {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        eval!(t + 0.3 * h, &ytmp, &mut k3);
        for i in 0..N {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        eval!(t + 0.8 * h, &ytmp, &mut k4);
        for i in 0..N {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        eval!(t + 8.0 / 9.0 * h, &ytmp, &mut k5);
        for i in 0..N {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        eval!(t + h, &ytmp, &mut k6);
        let mut ynew = [0.0; N];
        for i in 0..N {
            ynew[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        eval!(t + h, &ynew, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / sk) * (e / sk);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // accept
            let fac = (err.powf(EXPO1) / facold.powf(BETA) / SAFE)
                .clamp(1.0 / FACMAX, 1.0 / FACMIN);
            facold = err.max(1e-4);
            stats.accepted += 1;
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = ynew[i] - y[i];
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = h * k1[i] - dy;
                rcont[3][i] = dy - h * k7[i] - rcont[2][i];
                rcont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let seg = DenseStep { t0: t, t1: t + h, y0: &y, y1: &ynew, rcont: &rcont };
            if let Err(reason) = observer(&seg) {
                let t_stop = t + h;
                return Integration { t: t_stop, y: ynew, stats, abort: Some(reason) };
            }
            t += h;
            y = ynew;
            k1 = k7; // FSAL
            if last {
                return Integration { t, y, stats, abort: None };
            }
            h /= fac;
        } else {
            stats.rejected += 1;
            let fac = (err.powf(0.2) / SAFE).min(1.0 / FACMIN);
            h /= fac;
            if h.abs() < 1e-15 * t.abs().max(1.0) {
                return Integration { t, y, stats, abort: Some(StepAbort::Halt) };
            }
        }
    }
}
