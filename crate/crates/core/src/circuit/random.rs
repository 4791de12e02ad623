//! Seeded random circuits for test corpora.
//!
//! The draw sequence is part of the corpus format: changing it changes every shipped
//! corpus file, so bump [`GENERATOR_VERSION`] when it moves.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Circuit, Layer, PhaseGate, SingleGate};

pub const GENERATOR_VERSION: u32 = 1;

/// Probability that a given pair carries a phase gate in a given layer.
pub const PHASE_PROBABILITY: f64 = 0.6;
/// Probability that a particle receives an explicit single gate in a given layer.
pub const SINGLE_PROBABILITY: f64 = 0.85;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-like 2×2 unitary: Gram-Schmidt on the columns of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng) -> SingleGate {
    let c0 = [gaussian_complex(rng), gaussian_complex(rng)];
    let c1 = [gaussian_complex(rng), gaussian_complex(rng)];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let u0 = [c0[0] / n0, c0[1] / n0];
    let overlap = u0[0].conj() * c1[0] + u0[1].conj() * c1[1];
    let w = [c1[0] - overlap * u0[0], c1[1] - overlap * u0[1]];
    let n1 = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let u1 = [w[0] / n1, w[1] / n1];
    SingleGate::new_unchecked([[u0[0], u1[0]], [u0[1], u1[1]]])
}

pub fn random_thetas(rng: &mut impl Rng) -> [f64; 4] {
    std::array::from_fn(|_| rng.random::<f64>() * TAU)
}

/// Random layer. Particles in `frozen` get no single gate; pairs touching `isolated`
/// get no phase gate.
pub fn random_layer(
    rng: &mut impl Rng,
    particles: usize,
    frozen: &[usize],
    isolated: &[usize],
) -> Layer {
    let mut layer = Layer::new();
    for p in 0..particles {
        let draw = random_unitary(rng);
        if rng.random_bool(SINGLE_PROBABILITY) && !frozen.contains(&p) {
            layer = layer.with_single(p, draw);
        }
    }
    for a in 0..particles {
        for b in a + 1..particles {
            let thetas = random_thetas(rng);
            let present = rng.random_bool(PHASE_PROBABILITY);
            if present && !isolated.contains(&a) && !isolated.contains(&b) {
                layer = layer.with_phase(PhaseGate::new(a, b, thetas).expect("ordered pair"));
            }
        }
    }
    layer
}

pub fn random_circuit(seed: u64, particles: usize, depth: usize) -> Circuit {
    let mut rng = rng_for(seed);
    let layers = (0..depth)
        .map(|_| random_layer(&mut rng, particles, &[], &[]))
        .collect();
    Circuit::new(particles, layers).expect("generated gates are valid")
}

/// Like [`random_circuit`], but `decoupled` never shares a phase gate with anyone.
pub fn random_decoupled_circuit(
    seed: u64,
    particles: usize,
    depth: usize,
    decoupled: usize,
) -> Circuit {
    let mut rng = rng_for(seed);
    let layers = (0..depth)
        .map(|_| random_layer(&mut rng, particles, &[], &[decoupled]))
        .collect();
    Circuit::new(particles, layers).expect("generated gates are valid")
}

/// A layer acting only on particles other than `subsystem`: random singles on every
/// external particle and a phase gate on every external pair.
pub fn random_external_layer(rng: &mut impl Rng, particles: usize, subsystem: usize) -> Layer {
    let mut layer = Layer::new();
    for p in (0..particles).filter(|&p| p != subsystem) {
        layer = layer.with_single(p, random_unitary(rng));
    }
    for a in 0..particles {
        for b in a + 1..particles {
            if a != subsystem && b != subsystem {
                layer = layer
                    .with_phase(PhaseGate::new(a, b, random_thetas(rng)).expect("ordered pair"));
            }
        }
    }
    layer
}
