//! Seeded parallel ensembles, complex scans, histograms, and CSV reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;

use crate::config::{EnsembleConfig, WaveConfig};
use crate::dynamics::{
    self, corrected_encounters, EncounterConfig, IntegrateConfig, SamplePlan,
};
use crate::nodal::Family;
use crate::xcomplex;

/// Left-closed right-open bins of fixed width, centered on multiples of the
/// width shifted by `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub anchor: f64,
    pub width: f64,
    pub bins: BTreeMap<i64, u64>,
    pub total: u64,
}

/// Bin finite `values` into intervals `[k w - w/2 + anchor, k w + w/2 + anchor)`.
pub fn histogram(values: impl IntoIterator<Item = f64>, width: f64, anchor: f64) -> Histogram {
    assert!(width > 0.0, "bin width must be positive");
    let mut bins = BTreeMap::new();
    let mut total = 0;
    for v in values {
        if !v.is_finite() {
            continue;
        }
        let idx = ((v - anchor) / width + 0.5).floor() as i64;
        *bins.entry(idx).or_insert(0) += 1;
        total += 1;
    }
    Histogram { anchor, width, bins, total }
}

impl Histogram {
    pub fn center(&self, idx: i64) -> f64 {
        self.anchor + idx as f64 * self.width
    }

    pub fn count(&self, idx: i64) -> u64 {
        self.bins.get(&idx).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitStatus {
    Ok,
    NodeCollision,
    Escaped,
    StepperStall,
}

impl OrbitStatus {
    fn as_str(&self) -> &'static str {
        match self {
            OrbitStatus::Ok => "ok",
            OrbitStatus::NodeCollision => "node-collision",
            OrbitStatus::Escaped => "escaped",
            OrbitStatus::StepperStall => "stepper-stall",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitRow {
    pub index: usize,
    pub x0: f64,
    pub y0: f64,
    /// `chi(t_end)`; `None` when the orbit failed.
    pub chi: Option<f64>,
    pub n_raw: usize,
    pub n_corrected: usize,
    pub status: OrbitStatus,
}

#[derive(Debug, Clone)]
pub struct EnsembleReport {
    pub rows: Vec<OrbitRow>,
    pub chi_hist: Histogram,
    pub failures: usize,
    pub seed: u64,
    pub t_end: f64,
}

/// Deterministic per-orbit RNG stream: mixes `(seed, index)` into a ChaCha key
/// so results are independent of worker count and scheduling.
fn orbit_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index.wrapping_add(1));
    for chunk in key.chunks_mut(8) {
        // splitmix64
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Run `n_orbits` random-initial-condition trajectories with FTLE and
/// encounter statistics. Deterministic for a fixed seed; failures are
/// recorded, never fatal.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport, String> {
    let family = match &cfg.wave {
        WaveConfig::Preset(f) => *f,
        WaveConfig::Raw(_) => {
            return Err("ensemble runs need a named preset (complex tracking)".into())
        }
    };
    let icfg = IntegrateConfig {
        tol: cfg.tol,
        plan: SamplePlan::Geometric { first: 1.0, ratio: 1.05 },
        ..Default::default()
    };
    let ecfg = EncounterConfig {
        d_max: cfg.d_max,
        window: cfg.window,
        ..Default::default()
    };
    let (x_min, x_max, y_min, y_max) = cfg.box_bounds;
    let run_one = |index: usize| -> OrbitRow {
        let mut rng = orbit_rng(cfg.seed, index as u64);
        let x0 = rng.gen_range(x_min..x_max);
        let y0 = rng.gen_range(y_min..y_max);
        let rec = dynamics::integrate_with_encounters(
            &family,
            x0,
            y0,
            (1.0, 0.0),
            cfg.t_end,
            &icfg,
            &ecfg,
        );
        let status = match rec.aborted {
            None => OrbitStatus::Ok,
            Some(dynamics::AbortKind::NodeCollision) => OrbitStatus::NodeCollision,
            Some(dynamics::AbortKind::Escaped) => OrbitStatus::Escaped,
            Some(dynamics::AbortKind::StepperStall) => OrbitStatus::StepperStall,
        };
        OrbitRow {
            index,
            x0,
            y0,
            chi: (status == OrbitStatus::Ok).then(|| rec.final_ftle()),
            n_raw: rec.encounters.len(),
            n_corrected: corrected_encounters(&rec.encounters),
            status,
        }
    };
    let rows: Vec<OrbitRow> = match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| e.to_string())?;
            pool.install(|| (0..cfg.n_orbits).into_par_iter().map(run_one).collect())
        }
        None => (0..cfg.n_orbits).into_par_iter().map(run_one).collect(),
    };
    let failures = rows.iter().filter(|r| r.status != OrbitStatus::Ok).count();
    let chi_hist = histogram(rows.iter().filter_map(|r| r.chi), cfg.bin_width, 0.0);
    Ok(EnsembleReport {
        rows,
        chi_hist,
        failures,
        seed: cfg.seed,
        t_end: cfg.t_end,
    })
}

/// `(chi, N_raw, N_corrected)` rows for the FTLE-vs-encounters scatter.
pub fn chi_vs_n_table(report: &EnsembleReport) -> Vec<(f64, usize, usize)> {
    report
        .rows
        .iter()
        .filter_map(|r| r.chi.map(|chi| (chi, r.n_raw, r.n_corrected)))
        .collect()
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut ranks = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..xs.len() {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx).powi(2);
        dy += (ry[i] - my).powi(2);
    }
    num / (dx * dy).sqrt().max(f64::MIN_POSITIVE)
}

/// Complex-scan summary over a time grid.
#[derive(Debug, Clone)]
pub struct ComplexScanReport {
    /// Nodal point – X-point complexes found with the node inside the box.
    pub count: u64,
    /// Histogram of `log10 R_X`.
    pub rx_log10_hist: Histogram,
    pub mean_rx: f64,
    pub rx_values: Vec<f64>,
    pub failures: u64,
}

/// Count complexes with node inside `bounds` at each sample time and gather
/// their `R_X` statistics.
pub fn complex_scan(
    family: &Family,
    t0: f64,
    t1: f64,
    dt: f64,
    bounds: (f64, f64, f64, f64),
) -> ComplexScanReport {
    let steps = ((t1 - t0) / dt).round() as u64;
    let n_chunks = rayon::current_num_threads().max(1) as u64 * 4;
    let chunk = (steps / n_chunks).max(1);
    let results: Vec<(Vec<f64>, u64)> = (0..steps)
        .step_by(chunk as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let spec = family.spec();
            let mut rx = Vec::new();
            let mut failures = 0;
            for k in start..(start + chunk).min(steps) {
                let t = t0 + (k + 1) as f64 * dt;
                let nodes = match family.nodes(t) {
                    Ok(n) => n,
                    Err(_) => continue,
                };
                for node in &nodes {
                    if node.x < bounds.0
                        || node.x > bounds.1
                        || node.y < bounds.2
                        || node.y > bounds.3
                    {
                        continue;
                    }
                    let exp = spec.local_expansion(node.x, node.y, t, node.velocity());
                    let snap = xcomplex::xpoint_guess(&exp)
                        .and_then(|g| xcomplex::xpoint_refine_robust(&spec, node, g));
                    match snap {
                        Ok(s) => rx.push(s.r_x),
                        Err(_) => failures += 1,
                    }
                }
            }
            (rx, failures)
        })
        .collect();
    let mut rx_values = Vec::new();
    let mut failures = 0;
    for (rx, f) in results {
        rx_values.extend(rx);
        failures += f;
    }
    let count = rx_values.len() as u64;
    let mean_rx = if rx_values.is_empty() {
        f64::NAN
    } else {
        rx_values.iter().sum::<f64>() / rx_values.len() as f64
    };
    let rx_log10_hist = histogram(rx_values.iter().map(|r| r.log10()), 0.1, 0.0);
    ComplexScanReport { count, rx_log10_hist, mean_rx, rx_values, failures }
}

// --- CSV output ----------------------------------------------------------------

/// Format a float with 17 significant digits (round-trips exactly in f64).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_orbits_csv(report: &EnsembleReport, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "index,x0,y0,chi,n_raw,n_corrected,status")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.index,
            fmt_f64(r.x0),
            fmt_f64(r.y0),
            r.chi.map(fmt_f64).unwrap_or_default(),
            r.n_raw,
            r.n_corrected,
            r.status.as_str()
        )?;
    }
    Ok(())
}

pub fn write_histogram_csv(hist: &Histogram, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "bin_center,count")?;
    for (&idx, &count) in &hist.bins {
        writeln!(w, "{},{}", fmt_f64(hist.center(idx)), count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DEFAULT_C;

    #[test]
    fn histogram_boundary_convention() {
        let h = histogram([0.0, 0.0024, 0.0026], 0.005, 0.0);
        assert_eq!(h.count(0), 2);
        assert_eq!(h.count(1), 1);
        assert_eq!(h.total, 3);
    }

    #[test]
    fn histogram_empty_input() {
        let h = histogram(std::iter::empty(), 0.005, 0.0);
        assert!(h.bins.is_empty());
        assert_eq!(h.total, 0);
    }

    #[test]
    fn histogram_skips_non_finite() {
        let h = histogram([1.0, f64::NAN, f64::INFINITY], 0.5, 0.0);
        assert_eq!(h.total, 1);
    }

    #[test]
    fn spearman_perfect_and_inverted() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let up = [10.0, 20.0, 30.0, 40.0];
        let dn = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&xs, &up) - 1.0).abs() < 1e-12);
        assert!((spearman(&xs, &dn) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn orbit_rng_streams_differ_and_are_stable() {
        let mut a = orbit_rng(1, 0);
        let mut b = orbit_rng(1, 1);
        let va: f64 = a.gen();
        let vb: f64 = b.gen();
        assert_ne!(va, vb);
        let mut a2 = orbit_rng(1, 0);
        let va2: f64 = a2.gen();
        assert_eq!(va, va2);
    }

    #[test]
    fn small_ensemble_is_deterministic_across_worker_counts() {
        let text = "\
[wavefunction]
preset = case-20
a = 1.23
b = 1.15
[ensemble]
n_orbits = 4
t_end = 50.0
seed = 7
";
        let mut cfg = EnsembleConfig::from_str(text).unwrap();
        cfg.workers = Some(1);
        let r1 = run_ensemble(&cfg).unwrap();
        cfg.workers = Some(4);
        let r4 = run_ensemble(&cfg).unwrap();
        let mut b1 = Vec::new();
        let mut b4 = Vec::new();
        write_orbits_csv(&r1, &mut b1).unwrap();
        write_orbits_csv(&r4, &mut b4).unwrap();
        assert_eq!(b1, b4);
    }

    #[test]
    fn failed_orbits_keep_their_rows() {
        // a raw spec cannot be used: ensemble requires preset
        let text = "\
[wavefunction]
term = 0, 0, 1.0, 0.0
term = 1, 0, 1.0, 0.0
term = 1, 1, 1.0, 0.0
";
        let cfg = EnsembleConfig::from_str(text).unwrap();
        assert!(run_ensemble(&cfg).is_err());
    }

    #[test]
    fn complex_scan_counts_ekc_presence() {
        let fam = Family::Ekc { a: 1.0, b: 1.0, c: DEFAULT_C };
        let rep = complex_scan(&fam, 0.0, 5.0, 0.1, (-3.0, 3.0, -3.0, 3.0));
        // single node, inside the box most of the time
        assert!(rep.count > 20 && rep.count <= 50, "count {}", rep.count);
        assert!(rep.mean_rx.is_finite());
    }
}
