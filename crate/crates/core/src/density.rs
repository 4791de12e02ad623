//! Hit/miss split of particle 0's reduced density matrix in a two-particle circuit.
//!
//! With the layer-`t` phase gate written as `|0⟩⟨0|_B ⊗ I + |1⟩⟨1|_B ⊗ Z_θ`,
//! `Z_θ = diag(1, e^{iθ})` on A, and `X = (𝔸 ⊗ 𝔹) ρ_AB^{(t-1)} (𝔸 ⊗ 𝔹)^†`:
//!
//! ```text
//! ρ_A^{(t)} = 𝔸 ρ_A^{(t-1)} 𝔸^†                       (miss)
//!           - ⟨1|_B X |1⟩_B + Z_θ ⟨1|_B X |1⟩_B Z_θ^†   (hit)
//! ```
//!
//! Index convention: joint index `2a + b`, particle 0 (A) most significant.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::budget::{pow2, PathBudget};
use crate::circuit::{cis, Circuit, Layer, PhaseGate, SingleGate};
use crate::error::{Error, Result};
use crate::oracle::{evolve, reduced_density};
use crate::paths::{condition_on_paths, enumerate_paths, path_amplitude_unchecked};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub type Matrix2c = Matrix2<C64>;
pub type Matrix4c = Matrix4<C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityPair {
    pub layer: usize,
    pub miss: Matrix2c,
    pub hit: Matrix2c,
}

impl DensityPair {
    pub fn sum(&self) -> Matrix2c {
        self.miss + self.hit
    }
}

fn require_two(c: &Circuit) -> Result<()> {
    if c.particles() == 2 {
        Ok(())
    } else {
        Err(Error::ParticleCount {
            expected: 2,
            found: c.particles(),
        })
    }
}

/// Rewrites every phase gate as `(0, 0, 0, θ)`: local Z factors move into the layer's
/// single gates (applied after them) and the global phase is dropped.
pub fn normalize_phase_gates(c: &Circuit) -> Result<Circuit> {
    require_two(c)?;
    let layers = c
        .layers()
        .iter()
        .map(|layer| {
            let Some(g) = layer.phase_between(0, 1) else {
                return Ok(layer.clone());
            };
            let f = g.factor();
            let a = SingleGate::z_phase(f.local_first).compose(&layer.single(0));
            let b = SingleGate::z_phase(f.local_second).compose(&layer.single(1));
            Ok(Layer::new()
                .with_single(0, a)
                .with_single(1, b)
                .with_phase(PhaseGate::new(0, 1, [0.0, 0.0, 0.0, f.residual])?))
        })
        .collect::<Result<Vec<Layer>>>()?;
    Circuit::new(2, layers)
}

/// Controlled-phase angle of layer `t`, or `None` without a phase gate.
fn controlled_angle(c: &Circuit, t: usize) -> Result<Option<f64>> {
    match c.layer(t).phase_between(0, 1) {
        None => Ok(None),
        Some(g) => {
            let th = g.thetas();
            if th[..3].iter().any(|&x| x != 0.0) {
                Err(Error::NotControlledPhaseForm { layer: t })
            } else {
                Ok(Some(th[3]))
            }
        }
    }
}

fn check_layer(c: &Circuit, t: usize) -> Result<()> {
    require_two(c)?;
    if t == 0 || t > c.depth() {
        Err(Error::LayerOutOfRange {
            layer: t,
            layers: c.depth(),
        })
    } else {
        Ok(())
    }
}

fn as_matrix2(g: &SingleGate) -> Matrix2c {
    let m = g.matrix();
    Matrix2c::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn singles_kron(layer: &Layer) -> Matrix4c {
    as_matrix2(&layer.single(0)).kronecker(&as_matrix2(&layer.single(1)))
}

fn layer_unitary(layer: &Layer) -> Matrix4c {
    let mut d = Matrix4c::identity();
    if let Some(g) = layer.phase_between(0, 1) {
        for (i, z) in g.diagonal().into_iter().enumerate() {
            d[(i, i)] = z;
        }
    }
    d * singles_kron(layer)
}

/// `|00⟩⟨00|`.
pub fn initial_joint() -> Matrix4c {
    let mut m = Matrix4c::zeros();
    m[(0, 0)] = ONE;
    m
}

/// `ρ_AB^{(t)}` from `ρ_AB^{(t-1)}` by applying layer `t`.
pub fn advance_joint(c: &Circuit, t: usize, prev: &Matrix4c) -> Result<Matrix4c> {
    check_layer(c, t)?;
    let u = layer_unitary(c.layer(t));
    Ok(u * prev * u.adjoint())
}

pub fn trace_out_b(joint: &Matrix4c) -> Matrix2c {
    Matrix2c::from_fn(|a, a2| joint[(2 * a, 2 * a2)] + joint[(2 * a + 1, 2 * a2 + 1)])
}

/// `⟨1|_B X |1⟩_B` as an operator on A.
fn project_b_one(x: &Matrix4c) -> Matrix2c {
    Matrix2c::from_fn(|a, a2| x[(2 * a + 1, 2 * a2 + 1)])
}

fn pre_phase(c: &Circuit, t: usize, prev: &Matrix4c) -> Matrix4c {
    let k = singles_kron(c.layer(t));
    k * prev * k.adjoint()
}

/// Miss and hit parts of `ρ_A^{(t)}` given the joint state after `t - 1` layers.
pub fn density_step(c: &Circuit, t: usize, prev_joint: &Matrix4c) -> Result<DensityPair> {
    check_layer(c, t)?;
    let theta = controlled_angle(c, t)?;
    let a = as_matrix2(&c.layer(t).single(0));
    let miss = a * trace_out_b(prev_joint) * a.adjoint();
    let hit = match theta {
        None => Matrix2c::zeros(),
        Some(theta) => {
            let y = project_b_one(&pre_phase(c, t, prev_joint));
            let z = Matrix2c::new(ONE, ZERO, ZERO, cis(theta));
            z * y * z.adjoint() - y
        }
    };
    Ok(DensityPair {
        layer: t,
        miss,
        hit,
    })
}

/// The hit from its closed off-diagonal form:
/// `(e^{-iθ} - 1) ⟨01|X|11⟩ |0⟩⟨1| + (e^{iθ} - 1) ⟨11|X|01⟩ |1⟩⟨0|`.
pub fn hit_offdiagonal(c: &Circuit, t: usize, prev_joint: &Matrix4c) -> Result<Matrix2c> {
    check_layer(c, t)?;
    let Some(theta) = controlled_angle(c, t)? else {
        return Ok(Matrix2c::zeros());
    };
    let x = pre_phase(c, t, prev_joint);
    let mut hit = Matrix2c::zeros();
    hit[(0, 1)] = (cis(-theta) - ONE) * x[(1, 3)];
    hit[(1, 0)] = (cis(theta) - ONE) * x[(3, 1)];
    Ok(hit)
}

/// `⟨01|𝔸^{(t)} ⊗ 𝔹^{(t)}|Ψ(t-1)⟩ = Σ_{P → 0} A_P ⟨1|𝔹^{(t)} 𝔹_P^{(t-1)}|0⟩`, summing
/// over A paths of length `t` ending in 0.
pub fn hit_pathsum_amplitude(c: &Circuit, t: usize, budget: PathBudget) -> Result<C64> {
    check_layer(c, t)?;
    budget.check(pow2(t - 1))?;
    let prefix = c.truncated(t)?;
    let mut total = ZERO;
    for p in enumerate_paths(t, 0)? {
        let amp = path_amplitude_unchecked(&prefix, 0, &p);
        let u = condition_on_paths(&prefix, &[0], &[p])?;
        let mut v = u.state_upto(t - 1);
        u.apply_singles(t, &mut v);
        total += amp * v[1];
    }
    Ok(total)
}

/// The same amplitude from the state vector.
pub fn hit_direct_amplitude(c: &Circuit, t: usize) -> Result<C64> {
    check_layer(c, t)?;
    let psi = evolve(c, t - 1)?;
    let layer = c.layer(t);
    let a = layer.single(0);
    let b = layer.single(1);
    // ⟨01|(A ⊗ B)|ψ⟩ = Σ_{a', b'} A[0][a'] B[1][b'] ψ[2a' + b'].
    let mut total = ZERO;
    for a2 in 0..2u8 {
        for b2 in 0..2u8 {
            total +=
                a.entry(0, a2) * b.entry(1, b2) * psi.amplitudes()[2 * a2 as usize + b2 as usize];
        }
    }
    Ok(total)
}

/// One layer of the recursion with its checks.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityRecord {
    pub pair: DensityPair,
    pub oracle: Matrix2c,
    pub frobenius_error: f64,
}

/// Threads the joint state through every layer of the normalized circuit and compares
/// each `miss + hit` with the reduced density of the original circuit.
pub fn density_trajectory(c: &Circuit) -> Result<Vec<DensityRecord>> {
    let normalized = normalize_phase_gates(c)?;
    let mut joint = initial_joint();
    let mut out = Vec::with_capacity(c.depth());
    for t in 1..=c.depth() {
        let pair = density_step(&normalized, t, &joint)?;
        let rho = reduced_density(c, 0, t)?;
        let oracle = Matrix2c::from_fn(|i, j| rho.0[(i, j)]);
        let frobenius_error = (pair.sum() - oracle).norm();
        out.push(DensityRecord {
            pair,
            oracle,
            frobenius_error,
        });
        joint = advance_joint(&normalized, t, &joint)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_epr_circuit;
    use crate::circuit::random::{random_circuit, random_unitary, rng_for};

    fn epr() -> Circuit {
        build_epr_circuit(random_unitary(&mut rng_for(1)), SingleGate::hadamard()).unwrap()
    }

    #[test]
    fn epr_first_layer() {
        let c = normalize_phase_gates(&epr()).unwrap();
        let pair = density_step(&c, 1, &initial_joint()).unwrap();
        let half = Matrix2c::identity() * C64::new(0.5, 0.0);
        assert!((pair.sum() - half).norm() < 1e-12);
        assert!((pair.hit[(0, 1)] - C64::new(-0.5, 0.0)).norm() < 1e-12);
        assert!((pair.hit[(0, 1)] + pair.miss[(0, 1)]).norm() < 1e-12);
        let off = hit_offdiagonal(&c, 1, &initial_joint()).unwrap();
        assert!((off - pair.hit).norm() < 1e-12);
    }

    #[test]
    fn layer_without_gate_has_zero_hit() {
        let c = normalize_phase_gates(&epr()).unwrap();
        let joint = advance_joint(&c, 1, &initial_joint()).unwrap();
        let pair = density_step(&c, 2, &joint).unwrap();
        assert_eq!(pair.hit, Matrix2c::zeros());
        let a = as_matrix2(&c.layer(2).single(0));
        assert!((pair.miss - a * trace_out_b(&joint) * a.adjoint()).norm() == 0.0);
    }

    #[test]
    fn unnormalized_gate_rejected() {
        let c = random_circuit(3, 2, 3);
        let t = (1..=3)
            .find(|&t| c.layer(t).phase_between(0, 1).is_some())
            .unwrap();
        assert!(matches!(
            density_step(&c, t, &initial_joint()),
            Err(Error::NotControlledPhaseForm { .. })
        ));
    }

    #[test]
    fn normalization_preserves_reduced_density() {
        let c = random_circuit(4, 2, 5);
        let n = normalize_phase_gates(&c).unwrap();
        for t in 0..=5 {
            let a = reduced_density(&c, 0, t).unwrap();
            let b = reduced_density(&n, 0, t).unwrap();
            assert!((a.0 - b.0).norm() < 1e-12);
        }
    }

    #[test]
    fn trajectory_reconstructs_oracle() {
        for seed in 0..4 {
            let c = random_circuit(seed, 2, 6);
            let normalized = normalize_phase_gates(&c).unwrap();
            let mut joint = initial_joint();
            for rec in density_trajectory(&c).unwrap() {
                let t = rec.pair.layer;
                assert!(rec.frobenius_error < 1e-10);
                assert!(rec.pair.hit[(0, 0)].norm() < 1e-12 && rec.pair.hit[(1, 1)].norm() < 1e-12);
                let off = hit_offdiagonal(&normalized, t, &joint).unwrap();
                assert!((off - rec.pair.hit).norm() < 1e-12);
                joint = advance_joint(&normalized, t, &joint).unwrap();
            }
        }
    }

    #[test]
    fn zero_angle_hit_vanishes() {
        let layer = Layer::new()
            .with_single(0, SingleGate::hadamard())
            .with_phase(PhaseGate::new(0, 1, [0.0; 4]).unwrap());
        let c = Circuit::new(2, vec![layer]).unwrap();
        assert_eq!(
            hit_offdiagonal(&c, 1, &initial_joint()).unwrap(),
            Matrix2c::zeros()
        );
    }

    #[test]
    fn pathsum_amplitude_matches_state() {
        for seed in 10..14 {
            let c = normalize_phase_gates(&random_circuit(seed, 2, 5)).unwrap();
            for t in 1..=5 {
                let a = hit_pathsum_amplitude(&c, t, PathBudget::default()).unwrap();
                let b = hit_direct_amplitude(&c, t).unwrap();
                assert!((a - b).norm() < 1e-10);
            }
        }
        let c = epr();
        let a = hit_pathsum_amplitude(&c, 2, PathBudget::default()).unwrap();
        assert!((a - hit_direct_amplitude(&c, 2).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn hit_alone_is_not_a_state() {
        let c = normalize_phase_gates(&epr()).unwrap();
        let hit = density_step(&c, 1, &initial_joint()).unwrap().hit;
        let h = nalgebra::DMatrix::from_fn(2, 2, |i, j| hit[(i, j)]);
        let min = h.symmetric_eigenvalues().min();
        assert!(min < -0.1);
        assert!(hit.trace().norm() < 1e-12);
    }
}
