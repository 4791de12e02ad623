//! Marginals of every one- and two-particle subsystem of a four-particle circuit, by
//! configuration-path pair sums, next to the state-vector oracle.

use sumpaths::circuit::random::random_circuit;
use sumpaths::oracle::{basis_modes, marginal_by_sum};
use sumpaths::subsystem::{distribution_general, marginal_general_with, Bookkeeping};
use sumpaths::PathBudget;

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(99, 4, 3);
    let budget = PathBudget::default();
    let mut subsystems: Vec<Vec<usize>> = (0..4).map(|p| vec![p]).collect();
    subsystems.extend([vec![0, 1], vec![1, 3], vec![2, 3]]);
    for s in &subsystems {
        let d = distribution_general(&c, s, budget)?;
        let o = marginal_by_sum(&c, s)?;
        let probs: Vec<String> = d
            .probabilities()
            .iter()
            .map(|p| format!("{p:.6}"))
            .collect();
        println!(
            "{s:?}: [{}]  max |Δ| vs oracle {:.1e}",
            probs.join(", "),
            d.max_abs_diff(&o)
        );
    }

    // Intra-subsystem phases may be booked in the amplitudes or in λ.
    let s = [1, 3];
    for idx in 0..4 {
        let outcome = basis_modes(idx, 2);
        let a = marginal_general_with(&c, &s, &outcome, budget, Bookkeeping::Amplitude)?;
        let b = marginal_general_with(&c, &s, &outcome, budget, Bookkeeping::Lambda)?;
        println!("{s:?} = {outcome:?}: {a:.15} / {b:.15}");
    }
    Ok(())
}
