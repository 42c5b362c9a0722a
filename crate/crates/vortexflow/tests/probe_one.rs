// temporary exploration; removed before finalization
use vortexflow::nodal::Family;
use vortexflow::wavefield::WaveSpec;
use vortexflow::xcomplex;

const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
#[ignore]
fn probe_one_failing_case() {
    let fam = Family::Ekc { a: 1.23, b: 1.15, c: C };
    let spec: WaveSpec = fam.spec();
    let t = 5.70;
    let node = &fam.nodes(t).unwrap()[0];
    let v = node.velocity();
    println!("node = ({}, {}), V = ({}, {}), |V| = {}", node.x, node.y, v.0, v.1, v.0.hypot(v.1));
    let exp = spec.local_expansion(node.x, node.y, t, v);
    let guess = xcomplex::xpoint_guess(&exp).unwrap();
    println!("guess = ({}, {}), r = {}", guess.0, guess.1, guess.0.hypot(guess.1));
    // residual at the guess
    let h = |u: f64, w: f64| -> f64 {
        match spec.velocity(node.x + u, node.y + w, t) {
            Ok((a, b)) => (a - v.0).hypot(b - v.1),
            Err(_) => f64::NAN,
        }
    };
    println!("residual at guess = {}", h(guess.0, guess.1));
    // polar grid scan for the true minimum
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for kr in 0..60 {
        let r = 1e-4 * (10.0_f64).powf(kr as f64 / 18.0);
        if r > 0.5 {
            break;
        }
        for ka in 0..72 {
            let a = ka as f64 * std::f64::consts::TAU / 72.0;
            let (u, w) = (r * a.cos(), r * a.sin());
            let val = h(u, w);
            if val < best.0 {
                best = (val, u, w);
            }
        }
    }
    println!(
        "grid min residual = {} at ({}, {}), r = {}",
        best.0,
        best.1,
        best.2,
        best.1.hypot(best.2)
    );
    // try refine from the grid minimum
    match xcomplex::xpoint_refine(&spec, node, (best.1, best.2)) {
        Ok(s) => println!("refine from grid min: OK r_x={} lambda={:?}", s.r_x, s.eigenvalues),
        Err(e) => println!("refine from grid min failed: {e}"),
    }
}

#[test]
#[ignore]
fn probe_newton_path() {
    let fam = Family::Ekc { a: 1.23, b: 1.15, c: C };
    let spec: WaveSpec = fam.spec();
    let t = 5.70;
    let node = &fam.nodes(t).unwrap()[0];
    let v = node.velocity();
    let exp = spec.local_expansion(node.x, node.y, t, v);
    let (mut u, mut w) = xcomplex::xpoint_guess(&exp).unwrap();
    for it in 0..12 {
        let ((fx, fy), jac) = spec.velocity_and_jacobian(node.x + u, node.y + w, t).unwrap();
        let (hx, hy) = (fx - v.0, fy - v.1);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let du = (hx * jac[1][1] - hy * jac[0][1]) / det;
        let dw = (hy * jac[0][0] - hx * jac[1][0]) / det;
        println!(
            "it {it}: (u,w)=({u:.12e},{w:.12e}) |H|={:.3e} det={:.3e} step=({:.3e},{:.3e})",
            hx.hypot(hy),
            det,
            du,
            dw
        );
        u -= du;
        w -= dw;
    }
}
