//! How the marginal degrades when every cross-pair λ is capped in magnitude.

use sumpaths::circuit::random::random_circuit;
use sumpaths::experiments::perturb::perturb;
use sumpaths::experiments::Options;

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(31, 3, 4);
    println!(
        "{:>6} {:>10} {:>12} {:>12}",
        "clamp", "raw total", "P(A=0)", "max |Δ|"
    );
    for clamp in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, f64::INFINITY] {
        let r = perturb(&c, &[0], clamp, &Options::default())?;
        println!(
            "{clamp:>6} {:>10.6} {:>12.8} {:>12.2e}",
            r.raw_total,
            r.renormalized.probabilities()[0],
            r.max_deviation()
        );
    }
    Ok(())
}
