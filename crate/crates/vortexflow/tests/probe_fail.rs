// temporary exploration; removed before finalization
use vortexflow::nodal::Family;
use vortexflow::xcomplex::{self, ComplexError};

const C: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
#[ignore]
fn probe_refine_failures() {
    for (label, fam) in [
        ("i", Family::Ekc { a: 1.23, b: 1.15, c: C }),
        ("ii", Family::Case20 { a: 1.23, b: 1.15, c: C }),
        ("iii", Family::Case30 { a: 1.23, b: 1.15, c: C }),
    ] {
        let spec = fam.spec();
        let mut ok = 0u64;
        let (mut noconv, mut spurious, mut singular, mut guessfail, mut degen) =
            (0u64, 0u64, 0u64, 0u64, 0u64);
        let mut examples: Vec<String> = Vec::new();
        for k in 1..=20000u64 {
            let t = k as f64 * 0.1;
            let nodes = match fam.nodes(t) {
                Ok(n) => n,
                Err(_) => continue,
            };
            for node in &nodes {
                if node.x.abs() > 3.0 || node.y.abs() > 3.0 {
                    continue;
                }
                let exp = spec.local_expansion(node.x, node.y, t, node.velocity());
                match xcomplex::xpoint_guess(&exp).and_then(|g| xcomplex::xpoint_refine_robust(&spec, node, g)) {
                    Ok(_) => ok += 1,
                    Err(e) => {
                        let r_guess = xcomplex::xpoint_guess(&exp)
                            .map(|g| g.0.hypot(g.1))
                            .unwrap_or(f64::NAN);
                        if examples.len() < 5 {
                            examples.push(format!(
                                "t={t:.2} node=({:.3},{:.3}) |V|={:.3} r_guess={:.3}: {e}",
                                node.x,
                                node.y,
                                node.speed(),
                                r_guess
                            ));
                        }
                        match e {
                            ComplexError::NoConvergence => noconv += 1,
                            ComplexError::SpuriousXPoint(_) => spurious += 1,
                            ComplexError::SingularField => singular += 1,
                            ComplexError::DegenerateGuess(_) | ComplexError::DegenerateNode => {
                                guessfail += 1
                            }
                            _ => degen += 1,
                        }
                    }
                }
            }
        }
        println!("system ({label}): ok={ok} noconv={noconv} spurious={spurious} singular={singular} guess={guessfail} other={degen}");
        for e in examples {
            println!("   {e}");
        }
    }
}
