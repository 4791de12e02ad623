//! Dense state-vector reference.
//!
//! Basis index convention: particle 0 is the most significant bit, so for two particles
//! `|a, b⟩` lives at index `2a + b`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, Layer, PhaseGate, SingleGate};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PARTICLES: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    particles: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(particles: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << particles];
        amplitudes[0] = C64::new(1.0, 0.0);
        StateVector {
            particles,
            amplitudes,
        }
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, modes: &[u8]) -> C64 {
        self.amplitudes[basis_index(modes)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        for p in 0..self.particles {
            let g = layer.single(p);
            if !g.is_identity(0.0) {
                self.apply_single(p, &g);
            }
        }
        for g in layer.phases() {
            self.apply_phase(g);
        }
    }

    fn apply_single(&mut self, particle: usize, gate: &SingleGate) {
        let stride = 1usize << (self.particles - 1 - particle);
        for i in 0..self.amplitudes.len() {
            if i & stride == 0 {
                let [x0, x1] = gate.apply([self.amplitudes[i], self.amplitudes[i | stride]]);
                self.amplitudes[i] = x0;
                self.amplitudes[i | stride] = x1;
            }
        }
    }

    fn apply_phase(&mut self, gate: &PhaseGate) {
        let (a, b) = gate.pair();
        let shift_a = self.particles - 1 - a;
        let shift_b = self.particles - 1 - b;
        let diag = gate.diagonal();
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            let ma = (i >> shift_a) & 1;
            let mb = (i >> shift_b) & 1;
            *amp *= diag[2 * ma + mb];
        }
    }
}

/// Index of a joint basis state, particle 0 most significant.
pub fn basis_index(modes: &[u8]) -> usize {
    modes.iter().fold(0, |acc, &m| (acc << 1) | m as usize)
}

/// Modes of `index` over `width` particles, most significant first.
pub fn basis_modes(index: usize, width: usize) -> Vec<u8> {
    (0..width)
        .map(|k| ((index >> (width - 1 - k)) & 1) as u8)
        .collect()
}

/// State after layers `1..=upto` applied to `|0…0⟩`.
pub fn evolve(c: &Circuit, upto: usize) -> Result<StateVector> {
    evolve_with_limit(c, upto, DEFAULT_MAX_PARTICLES)
}

pub fn evolve_with_limit(c: &Circuit, upto: usize, max_particles: usize) -> Result<StateVector> {
    if c.particles() > max_particles {
        return Err(Error::TooManyParticles {
            particles: c.particles(),
            limit: max_particles,
        });
    }
    if upto > c.depth() {
        return Err(Error::LayerOutOfRange {
            layer: upto,
            layers: c.depth(),
        });
    }
    let mut state = StateVector::zero(c.particles());
    for layer in &c.layers()[..upto] {
        state.apply_layer(layer);
    }
    Ok(state)
}

/// Probabilities over outcomes of a sorted particle subset. Outcome index `i` encodes
/// the subsystem modes with the first listed particle as the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    subsystem: Vec<usize>,
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn new(subsystem: Vec<usize>, probabilities: Vec<f64>) -> Self {
        debug_assert_eq!(probabilities.len(), 1 << subsystem.len());
        Distribution {
            subsystem,
            probabilities,
        }
    }

    pub fn subsystem(&self) -> &[usize] {
        &self.subsystem
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, outcome: &[u8]) -> f64 {
        self.probabilities[basis_index(outcome)]
    }

    pub fn label(&self, index: usize) -> String {
        basis_modes(index, self.subsystem.len())
            .iter()
            .map(|m| char::from(b'0' + m))
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        (0..self.probabilities.len())
            .map(|i| (self.label(i), self.probabilities[i]))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Entries within `[-1e-12, 1 + 1e-12]` and total within `1e-10` of one.
    pub fn is_valid(&self) -> bool {
        self.probabilities
            .iter()
            .all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p))
            && (self.total() - 1.0).abs() <= 1e-10
    }
}

/// Full joint distribution over all particles.
pub fn joint_distribution(c: &Circuit) -> Result<Distribution> {
    joint_distribution_with_limit(c, DEFAULT_MAX_PARTICLES)
}

pub fn joint_distribution_with_limit(c: &Circuit, max_particles: usize) -> Result<Distribution> {
    let state = evolve_with_limit(c, c.depth(), max_particles)?;
    Ok(Distribution::new(
        (0..c.particles()).collect(),
        state.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
    ))
}

/// Marginal of `subsystem` by classically summing joint probabilities.
pub fn marginal_by_sum(c: &Circuit, subsystem: &[usize]) -> Result<Distribution> {
    marginal_by_sum_with_limit(c, subsystem, DEFAULT_MAX_PARTICLES)
}

pub fn marginal_by_sum_with_limit(
    c: &Circuit,
    subsystem: &[usize],
    max_particles: usize,
) -> Result<Distribution> {
    let subsystem = c.normalize_subsystem(subsystem, false)?;
    let joint = joint_distribution_with_limit(c, max_particles)?;
    let n = c.particles();
    let mut probs = vec![0.0; 1 << subsystem.len()];
    for (idx, p) in joint.probabilities().iter().enumerate() {
        probs[project_index(idx, n, &subsystem)] += p;
    }
    Ok(Distribution::new(subsystem, probs))
}

/// Index over `subset` (sorted) of the full basis index `idx`.
pub(crate) fn project_index(idx: usize, particles: usize, subset: &[usize]) -> usize {
    subset
        .iter()
        .fold(0, |acc, &p| (acc << 1) | ((idx >> (particles - 1 - p)) & 1))
}

/// Reduced density matrix of a sorted subset.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(pub DMatrix<C64>);

impl DensityMatrix {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Symmetrize so the Hermitian solver sees an exactly Hermitian input.
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within 1e-12, unit trace within 1e-10, eigenvalues ≥ -1e-10.
    pub fn is_valid(&self) -> bool {
        self.hermiticity_error() <= 1e-12
            && (self.trace() - 1.0).norm() <= 1e-10
            && self.min_eigenvalue() >= -1e-10
    }
}

/// `Tr_{rest} |ψ⟩⟨ψ|` for a sorted subset.
pub fn partial_trace(state: &StateVector, subset: &[usize]) -> DensityMatrix {
    let n = state.particles();
    let rest: Vec<usize> = (0..n).filter(|p| !subset.contains(p)).collect();
    let dim = 1 << subset.len();
    // Group amplitudes by external index, then accumulate outer products.
    let mut columns = vec![vec![C64::new(0.0, 0.0); dim]; 1 << rest.len()];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        columns[project_index(idx, n, &rest)][project_index(idx, n, subset)] = *amp;
    }
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for col in &columns {
        for i in 0..dim {
            if col[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                rho[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    DensityMatrix(rho)
}

pub fn reduced_density(c: &Circuit, particle: usize, upto: usize) -> Result<DensityMatrix> {
    reduced_density_of(c, &[particle], upto)
}

pub fn reduced_density_of(c: &Circuit, subsystem: &[usize], upto: usize) -> Result<DensityMatrix> {
    let subsystem = c.normalize_subsystem(subsystem, false)?;
    let state = evolve(c, upto)?;
    Ok(partial_trace(&state, &subsystem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random::random_circuit;
    use crate::circuit::{build_epr_circuit, Layer, SingleGate};

    fn epr() -> Circuit {
        build_epr_circuit(SingleGate::identity(), SingleGate::identity()).unwrap()
    }

    #[test]
    fn bit_convention_particle_zero_is_msb() {
        let c = Circuit::new(2, vec![Layer::new().with_single(0, SingleGate::pauli_x())]).unwrap();
        let s = evolve(&c, 1).unwrap();
        assert_eq!(s.amplitudes()[2], C64::new(1.0, 0.0));
        assert_eq!(s.amplitude(&[1, 0]), C64::new(1.0, 0.0));
    }

    #[test]
    fn epr_first_layer_is_maximally_entangled() {
        let s = evolve(&epr(), 1).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_layers_is_basis_state() {
        let s = evolve(&random_circuit(4, 3, 3), 0).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == C64::new(0.0, 0.0)));
    }

    #[test]
    fn norm_preserved_on_random_circuit() {
        let c = random_circuit(11, 3, 6);
        for t in 0..=c.depth() {
            assert!((evolve(&c, t).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_out_of_range() {
        assert!(matches!(
            evolve(&epr(), 3),
            Err(Error::LayerOutOfRange {
                layer: 3,
                layers: 2
            })
        ));
    }

    #[test]
    fn epr_joint_and_marginal() {
        let joint = joint_distribution(&epr()).unwrap();
        assert!(joint
            .probabilities()
            .iter()
            .all(|p| (p - 0.25).abs() < 1e-12));
        let m = marginal_by_sum(&epr(), &[0]).unwrap();
        assert!((m.probability(&[0]) - 0.5).abs() < 1e-12);
        assert!(joint.is_valid() && m.is_valid());
    }

    #[test]
    fn identity_circuit_is_deterministic() {
        let c = Circuit::new(3, vec![Layer::new(), Layer::new()]).unwrap();
        assert_eq!(joint_distribution(&c).unwrap().probabilities()[0], 1.0);
    }

    #[test]
    fn product_circuit_marginal_is_single_particle() {
        let g = crate::circuit::random::random_unitary(&mut crate::circuit::random::rng_for(2));
        let c = Circuit::new(
            2,
            vec![Layer::new()
                .with_single(0, g)
                .with_single(1, SingleGate::hadamard())],
        )
        .unwrap();
        let m = marginal_by_sum(&c, &[0]).unwrap();
        assert!((m.probability(&[1]) - g.entry(1, 0).norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn invalid_subsystems() {
        assert!(marginal_by_sum(&epr(), &[]).is_err());
        assert!(marginal_by_sum(&epr(), &[2]).is_err());
        assert!(marginal_by_sum(&epr(), &[1, 1]).is_err());
    }

    #[test]
    fn reduced_density_cases() {
        let rho = reduced_density(&epr(), 0, 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 0.5 } else { 0.0 };
                assert!((rho.0[(i, j)] - C64::new(e, 0.0)).norm() < 1e-12);
            }
        }
        let rho0 = reduced_density(&epr(), 0, 0).unwrap();
        assert_eq!(rho0.0[(0, 0)], C64::new(1.0, 0.0));
        assert!(rho.is_valid() && rho0.is_valid());
        assert!(reduced_density(&epr(), 2, 0).is_err());
    }

    #[test]
    fn density_diagonal_matches_marginal() {
        let c = random_circuit(21, 3, 4);
        for p in 0..3 {
            let rho = reduced_density(&c, p, c.depth()).unwrap();
            let m = marginal_by_sum(&c, &[p]).unwrap();
            for j in 0..2 {
                assert!((rho.0[(j, j)].re - m.probabilities()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn particle_limit_enforced() {
        let c = Circuit::new(13, vec![]).unwrap();
        assert!(matches!(evolve(&c, 0), Err(Error::TooManyParticles { .. })));
        assert!(evolve_with_limit(&c, 0, 13).is_ok());
    }
}
