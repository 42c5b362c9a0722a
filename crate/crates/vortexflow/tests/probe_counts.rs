// temporary exploration; removed before finalization
use vortexflow::dynamics::{self, EncounterConfig, IntegrateConfig, SamplePlan};
use vortexflow::ensemble;
use vortexflow::nodal::Family;

const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
#[ignore]
fn probe_named_orbits_t1000() {
    let fam = Family::Case20 { a: 1.23, b: 1.15, c: C };
    let cfg = IntegrateConfig {
        plan: SamplePlan::Geometric { first: 1.0, ratio: 1.1 },
        ..Default::default()
    };
    let ecfg = EncounterConfig::default();
    for (label, x0, y0) in [
        ("regular", -1.5, 0.1275),
        ("weak", 0.850901842117, 1.191571712494),
        ("strong", -1.231356695294, 0.840584903955),
    ] {
        let start = std::time::Instant::now();
        let rec = dynamics::integrate_with_encounters(&fam, x0, y0, (1.0, 0.0), 1000.0, &cfg, &ecfg);
        println!(
            "{label}: N={} Ncorr={} chi(1e3)={:.4e} steps={} rhs={} aborted={:?} wall={:?}",
            rec.encounters.len(),
            dynamics::corrected_encounters(&rec.encounters),
            rec.final_ftle(),
            rec.stats.accepted_steps,
            rec.stats.rhs_evals,
            rec.aborted,
            start.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_complex_scan_t1000() {
    for (label, fam) in [
        ("i", Family::Ekc { a: 1.23, b: 1.15, c: C }),
        ("ii", Family::Case20 { a: 1.23, b: 1.15, c: C }),
        ("iii", Family::Case30 { a: 1.23, b: 1.15, c: C }),
    ] {
        let start = std::time::Instant::now();
        let rep = ensemble::complex_scan(&fam, 0.0, 1000.0, 0.1, (-3.0, 3.0, -3.0, 3.0));
        println!(
            "system ({label}): count={} mean_rx={:.4} failures={} wall={:?}",
            rep.count, rep.mean_rx, rep.failures, start.elapsed()
        );
    }
}
