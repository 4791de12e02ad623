//! Hidden variables of a random two-particle circuit: the λ table, one trajectory with
//! its hits, and the marginal rebuilt from path weights.

use sumpaths::circuit::random::random_circuit;
use sumpaths::lambda_two::{lambda_direct, lambda_table, marginal_terms};
use sumpaths::oracle::marginal_by_sum;
use sumpaths::PathBudget;

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(17, 2, 4);
    let budget = PathBudget::default();
    let table = lambda_table(&c, 0, budget)?;
    println!(
        "{} paths of A end in mode 0; {} ordered pairs",
        table.paths.len(),
        table.entries.len()
    );

    let e = table
        .entries
        .iter()
        .max_by(|a, b| (a.last() - 1.0).norm().total_cmp(&(b.last() - 1.0).norm()))
        .expect("depth 4 has pairs");
    println!("pair ({}, {}):", e.p, e.q);
    for (t, l) in e.trajectory.iter().enumerate() {
        let hit = if t == 0 {
            String::new()
        } else {
            format!(
                "  hit {:+.6}{:+.6}i",
                e.hits[t - 1].value.re,
                e.hits[t - 1].value.im
            )
        };
        println!("  t={t}  λ = {:+.6}{:+.6}i{hit}", l.re, l.im);
    }
    let direct = lambda_direct(&c, &e.p, &e.q)?;
    println!("  direct overlap {:+.6}{:+.6}i", direct.re, direct.im);

    let oracle = marginal_by_sum(&c, &[0])?;
    for j in 0..2u8 {
        let t = marginal_terms(&c, j, budget)?;
        println!(
            "P(A={j}): path weights {:.6} + interference {:+.6} = {:.12} (oracle {:.12})",
            t.diagonal,
            t.cross.re,
            t.value(),
            oracle.probabilities()[j as usize]
        );
    }
    Ok(())
}
