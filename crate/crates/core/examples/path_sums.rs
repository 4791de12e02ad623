//! Joint amplitudes as sums over paths, and the paths of one particle with their
//! amplitudes.

use sumpaths::circuit::random::random_circuit;
use sumpaths::experiments::path_dump;
use sumpaths::oracle::{basis_modes, evolve};
use sumpaths::paths::amplitude_via_paths;
use sumpaths::PathBudget;

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(2, 3, 4);
    let budget = PathBudget::default();
    let state = evolve(&c, c.depth())?;
    for idx in 0..8 {
        let outcome = basis_modes(idx, 3);
        let a = amplitude_via_paths(&c, &outcome, budget)?;
        println!(
            "{outcome:?}: paths {:+.6}{:+.6}i  oracle error {:.1e}",
            a.re,
            a.im,
            (a - state.amplitudes()[idx]).norm()
        );
    }
    println!("paths of particle 1 ending in 1:");
    for (p, a) in path_dump(&c, 1, 1, budget)? {
        println!("  {p}  {:+.6}{:+.6}i", a.re, a.im);
    }
    Ok(())
}
