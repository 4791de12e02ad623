//! EPR-B: a Bell pair measured in rotated bases. The marginal of A stays uniform and the
//! interference between A's two paths is switched off by the entangling gate.
//!
//! cargo run --example epr_demo -- 0.7

use sumpaths::experiments::epr::run_epr;
use sumpaths::experiments::Options;
use sumpaths::SingleGate;

fn main() -> sumpaths::Result<()> {
    let angle: f64 = std::env::args()
        .nth(1)
        .map_or(0.3, |s| s.parse().expect("angle in radians"));
    let report = run_epr(
        SingleGate::rotation(angle),
        SingleGate::hadamard(),
        &Options::default(),
    )?;

    println!("a2 = rotation({angle}), b2 = H");
    for (method, d) in &report.marginals {
        println!(
            "  {method:<8} P(A=0) = {:.15}  P(A=1) = {:.15}",
            d.probabilities()[0],
            d.probabilities()[1]
        );
    }
    for pair in &report.cross {
        let traj: Vec<String> = pair
            .trajectory
            .iter()
            .map(|z| format!("{:+.3}{:+.3}i", z.re, z.im))
            .collect();
        println!(
            "  λ(0{j}, 1{j}) trajectory [{}], direct |λ| = {:.1e}",
            traj.join(", "),
            pair.direct.norm(),
            j = pair.endpoint
        );
    }
    for c in &report.checks {
        println!(
            "  {:<22} {:.1e} {}",
            c.name,
            c.max_error.unwrap_or(f64::NAN),
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    assert!(report.pass());
    Ok(())
}
