//! The reduced density matrix of A, layer by layer, as an interaction-free part plus a
//! purely off-diagonal correction.

use sumpaths::circuit::random::random_circuit;
use sumpaths::density::{
    density_trajectory, hit_direct_amplitude, hit_pathsum_amplitude, normalize_phase_gates,
};
use sumpaths::PathBudget;

fn main() -> sumpaths::Result<()> {
    let c = random_circuit(8, 2, 4);
    let normalized = normalize_phase_gates(&c)?;
    for rec in density_trajectory(&c)? {
        let t = rec.pair.layer;
        let (m, h) = (&rec.pair.miss, &rec.pair.hit);
        println!(
            "t={t}: miss diag ({:.4}, {:.4}) coherence {:.4}; hit coherence {:+.4}{:+.4}i; error {:.1e}",
            m[(0, 0)].re,
            m[(1, 1)].re,
            m[(0, 1)].norm(),
            h[(0, 1)].re,
            h[(0, 1)].im,
            rec.frobenius_error
        );
        let a = hit_pathsum_amplitude(&normalized, t, PathBudget::default())?;
        let b = hit_direct_amplitude(&normalized, t)?;
        println!(
            "     ⟨1|B(t)|0⟩ branch: path sum {:+.6}{:+.6}i, direct {:+.6}{:+.6}i",
            a.re, a.im, b.re, b.im
        );
    }
    Ok(())
}
