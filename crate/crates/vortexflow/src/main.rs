//! `vortexflow`: command-line front end for nodal-line tracking, complex
//! diagnostics, trajectory traces, toy-model scattering sweeps, and ensembles.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use vortexflow::config::{self, EnsembleConfig};
use vortexflow::dynamics::{self, EncounterConfig, EncounterType, IntegrateConfig, SamplePlan};
use vortexflow::ensemble::{self, fmt_f64};
use vortexflow::nodal;
use vortexflow::scattering::{self, ToyOrbitType, ToyParams};
use vortexflow::xcomplex;

#[derive(Parser)]
#[command(name = "vortexflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PresetArgs {
    /// Model family: ekc, case-eps20, case-20, case-30
    #[arg(long, default_value = "ekc")]
    preset: String,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Perturbation amplitude (case-eps20 only)
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Frequency ratio omega_2/omega_1
    #[arg(long, default_value_t = config::DEFAULT_C)]
    c: f64,
}

impl PresetArgs {
    fn family(&self) -> Result<nodal::Family, String> {
        config::family_from_name(&self.preset, self.a, self.b, self.eps, self.c)
            .map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Track nodal lines over time and record bifurcation events.
    NodalLines {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 20.0)]
        t1: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Output CSV (t, branch_id, x, y, xdot, ydot)
        #[arg(long)]
        out: PathBuf,
        /// Companion events CSV (kind, t_bif, x, y); defaults to '<out>' with
        /// an `events` suffix
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Diagnose the nodal point - X-point complex at one instant or over a scan.
    Complex {
        #[command(flatten)]
        preset: PresetArgs,
        /// Single snapshot time
        #[arg(long, conflicts_with = "scan")]
        t: Option<f64>,
        /// Scan <f3> and the complex over [t0, t1]
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 10.0)]
        t1: f64,
        #[arg(long, default_value_t = 0.001)]
        dt: f64,
        /// Scan output CSV (t, f3, d0, class, u_x, v_x, r_x, lambda1, lambda2, ratio_a)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a trajectory with deviation vector and encounter records.
    Trace {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        #[arg(long, default_value_t = 1e4)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Trajectory CSV (t, x, y, xi, chi)
        #[arg(long)]
        out: PathBuf,
        /// Encounter CSV (t_a, t_b, d, r_x, type)
        #[arg(long)]
        encounters: Option<PathBuf>,
        /// Uniform output sampling step (default: geometric sampling)
        #[arg(long)]
        sample_dt: Option<f64>,
    },
    /// Sweep the toy scattering model over impact parameters.
    Scatter {
        #[arg(long, default_value_t = 3.0)]
        xdot0: f64,
        /// Smallest impact parameter |v1 - v_s|
        #[arg(long, default_value_t = 1e-4)]
        v1_min: f64,
        /// Largest impact parameter
        #[arg(long, default_value_t = 1e-1)]
        v1_max: f64,
        /// Points per side (type I above v_s, type II below)
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Sweep CSV (v1, delta_v1, type, amplification, t_scatter)
        #[arg(long)]
        out: PathBuf,
        /// Also fit A * delta_v1^-b per type; writes '<out>.fit.csv'
        #[arg(long)]
        fit: bool,
    },
    /// Run a random-initial-condition ensemble from a config file.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (orbits.csv, chi_hist.csv, rx_hist.csv, events.log)
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::NodalLines { preset, t0, t1, dt, out, events } => {
            let family = preset.family()?;
            let res = nodal::track_nodal_lines(&family, t0, t1, dt);
            let mut w = writer(&out)?;
            writeln!(w, "t,branch_id,x,y,xdot,ydot").map_err(io_err)?;
            for line in &res.lines {
                for p in &line.points {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        fmt_f64(p.t),
                        line.branch_id,
                        fmt_f64(p.x),
                        fmt_f64(p.y),
                        fmt_f64(p.xdot),
                        fmt_f64(p.ydot)
                    )
                    .map_err(io_err)?;
                }
            }
            let events_path = events.unwrap_or_else(|| sibling(&out, "events"));
            let mut we = writer(&events_path)?;
            writeln!(we, "kind,t_bif,x,y").map_err(io_err)?;
            for e in &res.events {
                let kind = match e.kind {
                    nodal::EventKind::PairCreation => "pair-creation",
                    nodal::EventKind::PairAnnihilation => "pair-annihilation",
                    nodal::EventKind::EscapeToInfinity => "escape-to-infinity",
                    nodal::EventKind::EntryFromInfinity => "entry-from-infinity",
                };
                let (x, y) = match e.location {
                    Some((x, y)) => (fmt_f64(x), fmt_f64(y)),
                    None => ("inf".into(), "inf".into()),
                };
                writeln!(we, "{},{},{},{}", kind, fmt_f64(e.t_bif), x, y).map_err(io_err)?;
            }
            eprintln!(
                "tracked {} branches, {} events -> {}, {}",
                res.lines.len(),
                res.events.len(),
                out.display(),
                events_path.display()
            );
            Ok(())
        }
        Command::Complex { preset, t, scan, t0, t1, dt, out } => {
            let family = preset.family()?;
            let spec = family.spec();
            if scan {
                let out = out.ok_or("--scan needs --out")?;
                let mut w = writer(&out)?;
                writeln!(w, "t,f3,d0,class,u_x,v_x,r_x,lambda1,lambda2,ratio_a")
                    .map_err(io_err)?;
                let steps = ((t1 - t0) / dt).round() as u64;
                for k in 0..=steps {
                    let tt = t0 + k as f64 * dt;
                    if let Some(row) = snapshot_row(&family, &spec, tt) {
                        writeln!(w, "{row}").map_err(io_err)?;
                    }
                }
                Ok(())
            } else {
                let tt = t.ok_or("need --t <time> or --scan")?;
                let nodes = family.nodes(tt).map_err(|e| e.to_string())?;
                for node in &nodes {
                    let exp = spec.local_expansion(node.x, node.y, tt, node.velocity());
                    let guess = xcomplex::xpoint_guess(&exp).map_err(|e| e.to_string())?;
                    let snap =
                        xcomplex::xpoint_refine(&spec, node, guess).map_err(|e| e.to_string())?;
                    println!(
                        "t = {tt}\nnode      = ({}, {})  V0 = ({}, {})\nX-point   = ({}, {})  R_X = {}\nlambda    = ({}, {})\nf3        = {}  d0 = {}\nclass     = {:?} ({:?})\nadiabatic: ratio_a = {}, R_X < 1: {}",
                        node.x,
                        node.y,
                        node.xdot,
                        node.ydot,
                        snap.xpoint.0,
                        snap.xpoint.1,
                        snap.r_x,
                        snap.eigenvalues.0,
                        snap.eigenvalues.1,
                        snap.f3,
                        snap.d0,
                        snap.classification,
                        snap.rotation,
                        snap.adiabatic_a,
                        snap.r_x < 1.0
                    );
                }
                Ok(())
            }
        }
        Command::Trace { preset, x0, y0, t_end, tol, out, encounters, sample_dt } => {
            let family = preset.family()?;
            let plan = match sample_dt {
                Some(dt) => SamplePlan::Uniform { dt },
                None => SamplePlan::Geometric { first: 1e-2, ratio: 1.02 },
            };
            let cfg = IntegrateConfig { tol, plan, ..Default::default() };
            let rec = dynamics::integrate_with_encounters(
                &family,
                x0,
                y0,
                (1.0, 0.0),
                t_end,
                &cfg,
                &EncounterConfig::default(),
            );
            let mut w = writer(&out)?;
            writeln!(w, "t,x,y,xi,chi").map_err(io_err)?;
            for s in &rec.samples {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_f64(s.t),
                    fmt_f64(s.x),
                    fmt_f64(s.y),
                    fmt_f64(s.log_xi.exp()),
                    fmt_f64(s.log_xi / s.t)
                )
                .map_err(io_err)?;
            }
            if let Some(path) = encounters {
                let mut we = writer(&path)?;
                writeln!(we, "t_a,t_b,d,r_x,type").map_err(io_err)?;
                for e in &rec.encounters {
                    let kind = match e.kind {
                        EncounterType::TypeI => "I",
                        EncounterType::TypeII => "II",
                        EncounterType::Unclassified => "unclassified",
                    };
                    writeln!(
                        we,
                        "{},{},{},{},{}",
                        fmt_f64(e.t_a),
                        fmt_f64(e.t_b),
                        fmt_f64(e.d),
                        fmt_f64(e.r_x),
                        kind
                    )
                    .map_err(io_err)?;
                }
            }
            eprintln!(
                "integrated to t = {} ({} steps, {} encounters, chi = {:.6e}{})",
                rec.t_end,
                rec.stats.accepted_steps,
                rec.encounters.len(),
                rec.final_ftle(),
                match rec.aborted {
                    None => String::new(),
                    Some(k) => format!(", aborted: {k:?}"),
                }
            );
            Ok(())
        }
        Command::Scatter { xdot0, v1_min, v1_max, points, out, fit } => {
            let params = ToyParams::new(xdot0).map_err(|e| e.to_string())?;
            let (v_s, _) = scattering::separatrix_crossings(&params);
            let mut w = writer(&out)?;
            writeln!(w, "v1,delta_v1,type,amplification,t_scatter").map_err(io_err)?;
            let mut per_type: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
            let ratio = (v1_max / v1_min).powf(1.0 / (points.max(2) - 1) as f64);
            for k in 0..points {
                let delta = v1_min * ratio.powi(k as i32);
                for side in [1.0, -1.0] {
                    let v1 = v_s + side * delta;
                    match scattering::scatter_amplification(v1, &params) {
                        Ok(res) => {
                            let (label, slot) = match res.kind {
                                ToyOrbitType::I => ("I", 0),
                                ToyOrbitType::II => ("II", 1),
                            };
                            per_type[slot].push((res.delta_v1, res.amplification));
                            writeln!(
                                w,
                                "{},{},{},{},{}",
                                fmt_f64(res.v1),
                                fmt_f64(res.delta_v1),
                                label,
                                fmt_f64(res.amplification),
                                fmt_f64(res.t_scatter)
                            )
                            .map_err(io_err)?;
                        }
                        Err(e) => eprintln!("skip v1 = {v1}: {e}"),
                    }
                }
            }
            if fit {
                let fit_path = sibling(&out, "fit");
                let mut wf = writer(&fit_path)?;
                writeln!(wf, "type,amplitude,exponent,r_squared").map_err(io_err)?;
                for (label, data) in [("I", &per_type[0]), ("II", &per_type[1])] {
                    match scattering::fit_power_law(data) {
                        Ok(f) => {
                            writeln!(
                                wf,
                                "{},{},{},{}",
                                label,
                                fmt_f64(f.amplitude),
                                fmt_f64(f.exponent),
                                fmt_f64(f.r_squared)
                            )
                            .map_err(io_err)?;
                            eprintln!(
                                "type {label}: amplification ~ {:.4} * delta^-{:.4} (r^2 = {:.5})",
                                f.amplitude, f.exponent, f.r_squared
                            );
                        }
                        Err(e) => eprintln!("fit {label} failed: {e}"),
                    }
                }
            }
            Ok(())
        }
        Command::Ensemble { config: cfg_path, out, workers, seed } => {
            let mut cfg = EnsembleConfig::from_file(&cfg_path).map_err(|e| e.to_string())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.workers = workers;
            std::fs::create_dir_all(&out).map_err(io_err)?;
            let report = ensemble::run_ensemble(&cfg)?;
            let mut w = writer(&out.join("orbits.csv"))?;
            ensemble::write_orbits_csv(&report, &mut w).map_err(io_err)?;
            let mut wh = writer(&out.join("chi_hist.csv"))?;
            ensemble::write_histogram_csv(&report.chi_hist, &mut wh).map_err(io_err)?;
            // complex scan companion (coarser grid keeps this quick)
            if let Some(family) = cfg.wave.family() {
                let scan = ensemble::complex_scan(
                    family,
                    0.0,
                    cfg.t_end.min(1e4),
                    0.1,
                    (-3.0, 3.0, -3.0, 3.0),
                );
                let mut wr = writer(&out.join("rx_hist.csv"))?;
                ensemble::write_histogram_csv(&scan.rx_log10_hist, &mut wr).map_err(io_err)?;
                let mut log = writer(&out.join("events.log"))?;
                writeln!(
                    log,
                    "seed = {}\norbits = {}\nfailures = {}\ncomplexes = {}\nmean_rx = {}\nxpoint_failures = {}",
                    report.seed,
                    report.rows.len(),
                    report.failures,
                    scan.count,
                    scan.mean_rx,
                    scan.failures
                )
                .map_err(io_err)?;
            }
            eprintln!(
                "ensemble done: {} orbits, {} failures -> {}",
                report.rows.len(),
                report.failures,
                out.display()
            );
            Ok(())
        }
    }
}

fn snapshot_row(family: &nodal::Family, spec: &vortexflow::WaveSpec, t: f64) -> Option<String> {
    let nodes = family.nodes(t).ok()?;
    let node = nodes.first()?;
    let exp = spec.local_expansion(node.x, node.y, t, node.velocity());
    let f3 = xcomplex::f3_generic(&exp).ok()?;
    let d0 = exp.d0();
    let (class, _) = xcomplex::classify_node(f3, d0, node.velocity()).ok()?;
    let class = match class {
        xcomplex::Classification::Attractor => "attractor",
        xcomplex::Classification::Repellor => "repellor",
        xcomplex::Classification::Center => "center",
    };
    let snap = xcomplex::xpoint_guess(&exp)
        .and_then(|g| xcomplex::xpoint_refine(spec, node, g))
        .ok();
    let (ux, vx, rx, l1, l2) = snap
        .as_ref()
        .map(|s| (s.xpoint.0, s.xpoint.1, s.r_x, s.eigenvalues.0, s.eigenvalues.1))
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    Some(format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_f64(t),
        fmt_f64(f3),
        fmt_f64(d0),
        class,
        fmt_f64(ux),
        fmt_f64(vx),
        fmt_f64(rx),
        fmt_f64(l1),
        fmt_f64(l2),
        fmt_f64(0.0)
    ))
}

fn writer(path: &std::path::Path) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))
}

fn io_err(e: std::io::Error) -> String {
    e.to_string()
}

fn sibling(path: &std::path::Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}
