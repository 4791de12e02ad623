//! Per-layer hit breakdown for a three-particle circuit: the A-B and A-C branches with
//! their δ terms and γ/χ corrections.

use sumpaths::circuit::random::random_circuit;
use sumpaths::lambda_three::{
    distribution_three, lambda_three, lambda_three_direct, lambda_three_table,
};
use sumpaths::oracle::marginal_by_sum;
use sumpaths::{Path, PathBudget};

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(11, 3, 3);
    // The pair whose λ moved furthest from 1.
    let table = lambda_three_table(&c, 0, PathBudget::default())?;
    let far = table
        .iter()
        .max_by(|a, b| (a.last() - 1.0).norm().total_cmp(&(b.last() - 1.0).norm()))
        .expect("non-empty");
    let (p, q): (Path, Path) = (far.p, far.q);
    println!("pair ({p}, {q})");
    let e = lambda_three(&c, &p, &q)?;
    for h in &e.hits {
        println!(
            "layer {}: total hit {:+.6}{:+.6}i",
            h.layer, h.total.re, h.total.im
        );
        for (name, terms) in [("A-B", &h.ab), ("A-C", &h.ac)] {
            for b in terms.iter().filter(|b| b.delta.norm() > 1e-12) {
                let w = b.contribution();
                println!(
                    "  {name} k={} ({}, {}): δ {:+.4}{:+.4}i  γ {:+.4}{:+.4}i  χ {:+.4}{:+.4}i -> {:+.4}{:+.4}i",
                    b.endpoint, b.first, b.second, b.delta.re, b.delta.im, b.gamma_sum.re, b.gamma_sum.im,
                    b.chi_sum.re, b.chi_sum.im, w.re, w.im
                );
            }
        }
    }
    let direct = lambda_three_direct(&c, &p, &q)?;
    println!(
        "λ = {:+.12}{:+.12}i, direct {:+.12}{:+.12}i",
        e.last().re,
        e.last().im,
        direct.re,
        direct.im
    );

    let d = distribution_three(&c, PathBudget::default())?;
    let o = marginal_by_sum(&c, &[0])?;
    println!(
        "P(A=0): λ method {:.12}, oracle {:.12}",
        d.probabilities()[0],
        o.probabilities()[0]
    );
    Ok(())
}
