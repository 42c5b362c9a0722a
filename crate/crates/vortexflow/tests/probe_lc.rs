// temporary exploration; removed before finalization
use vortexflow::xcomplex;

#[test]
#[ignore]
fn probe_limit_cycle_window() {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let t = xcomplex::limit_cycle_vanishing_time(1.0, 1.0, c, 1.282, 1.33);
    println!("limit cycle vanishes at {t:?}");
}
