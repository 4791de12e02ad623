//! Layered normal-form circuits.
//!
//! Every layer applies one single-particle gate per particle (identity when absent)
//! followed by diagonal controlled-phase gates on particle pairs. The initial state is
//! always `|0…0⟩`.
//!
//! Phase gates inside a layer are kept in a canonical order: pairs that do not involve
//! particle 0 first, then `(0, b)` in ascending `b`. For three particles this is
//! B-C, A-B, A-C. The gates commute, so the order only matters for hit bookkeeping.

mod file;
mod gates;
pub mod random;

use std::collections::BTreeMap;

pub use file::{RawCircuit, RawLayer, RawPhase};
pub(crate) use gates::phase_excess;
pub use gates::{cis, ConditionedPhase, PhaseFactors, PhaseGate, SingleGate, UNITARITY_TOL};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    singles: BTreeMap<usize, SingleGate>,
    phases: Vec<PhaseGate>,
}

impl Layer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_single(mut self, particle: usize, gate: SingleGate) -> Self {
        self.singles.insert(particle, gate);
        self
    }

    pub fn with_phase(mut self, gate: PhaseGate) -> Self {
        self.phases.push(gate);
        self
    }

    /// Gate applied to `particle`; identity when none was given.
    #[inline]
    pub fn single(&self, particle: usize) -> SingleGate {
        self.singles
            .get(&particle)
            .copied()
            .unwrap_or_else(SingleGate::identity)
    }

    pub fn explicit_singles(&self) -> impl Iterator<Item = (usize, &SingleGate)> {
        self.singles.iter().map(|(p, g)| (*p, g))
    }

    pub fn phases(&self) -> &[PhaseGate] {
        &self.phases
    }

    pub fn phase_between(&self, a: usize, b: usize) -> Option<&PhaseGate> {
        self.phases.iter().find(|g| g.connects(a, b))
    }

    /// True if some phase gate in this layer touches `particle`.
    pub fn couples(&self, particle: usize) -> bool {
        self.phases.iter().any(|g| g.involves(particle))
    }

    fn canonicalize(&mut self) {
        self.phases.sort_by_key(|g| {
            let (a, b) = g.pair();
            (a == 0, a, b)
        });
    }
}

/// A validated layered circuit. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    particles: usize,
    layers: Vec<Layer>,
}

impl Circuit {
    /// Validates particle indices, unitarity and pair uniqueness, then sorts phase gates
    /// into canonical order.
    pub fn new(particles: usize, mut layers: Vec<Layer>) -> Result<Self> {
        if particles == 0 {
            return Err(Error::NoParticles);
        }
        for (idx, layer) in layers.iter_mut().enumerate() {
            let t = idx + 1;
            for (&p, g) in &layer.singles {
                if p >= particles {
                    return Err(Error::BadParticleIndex {
                        index: p,
                        particles,
                    });
                }
                let deviation = g.unitarity_deviation();
                if !deviation.is_finite() || deviation > UNITARITY_TOL {
                    return Err(Error::NonUnitaryGate {
                        layer: t,
                        particle: p,
                        deviation,
                    });
                }
            }
            let mut seen = Vec::with_capacity(layer.phases.len());
            for g in &layer.phases {
                let (a, b) = g.pair();
                if b >= particles {
                    return Err(Error::BadParticleIndex {
                        index: b,
                        particles,
                    });
                }
                if seen.contains(&(a, b)) {
                    return Err(Error::DuplicatePhasePair { layer: t, a, b });
                }
                seen.push((a, b));
            }
            layer.canonicalize();
        }
        Ok(Circuit { particles, layers })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Number of layers `n`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Layer `t`, counted from 1.
    #[inline]
    pub fn layer(&self, t: usize) -> &Layer {
        &self.layers[t - 1]
    }

    pub fn check_particle(&self, p: usize) -> Result<()> {
        if p >= self.particles {
            Err(Error::BadParticleIndex {
                index: p,
                particles: self.particles,
            })
        } else {
            Ok(())
        }
    }

    /// Sorted copy of `subsystem` after checking it is non-empty, in range and free of
    /// duplicates. With `proper`, it must also leave at least one external particle.
    pub fn normalize_subsystem(&self, subsystem: &[usize], proper: bool) -> Result<Vec<usize>> {
        if subsystem.is_empty() {
            return Err(Error::InvalidSubsystem("subsystem is empty".into()));
        }
        let mut s = subsystem.to_vec();
        s.sort_unstable();
        for &p in &s {
            self.check_particle(p)?;
        }
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubsystem(format!(
                "{subsystem:?} lists a particle twice"
            )));
        }
        if proper && s.len() == self.particles {
            return Err(Error::InvalidSubsystem(format!(
                "{subsystem:?} leaves no external particles"
            )));
        }
        Ok(s)
    }

    /// Particles not in the (sorted) `subsystem`, ascending.
    pub fn complement(&self, subsystem: &[usize]) -> Vec<usize> {
        (0..self.particles)
            .filter(|p| !subsystem.contains(p))
            .collect()
    }

    /// The first `t` layers.
    pub fn truncated(&self, t: usize) -> Result<Circuit> {
        if t > self.depth() {
            return Err(Error::LayerOutOfRange {
                layer: t,
                layers: self.depth(),
            });
        }
        Ok(Circuit {
            particles: self.particles,
            layers: self.layers[..t].to_vec(),
        })
    }

    pub fn with_layer(&self, layer: Layer) -> Result<Circuit> {
        let mut layers = self.layers.clone();
        layers.push(layer);
        Circuit::new(self.particles, layers)
    }

    /// Relabels particles: new particle `i` is old particle `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Circuit> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.particles).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation of 0..{}",
                self.particles
            )));
        }
        let mut new_index = vec![0; self.particles];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let layers = self
            .layers
            .iter()
            .map(|layer| relabel_layer(layer, &new_index))
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(self.particles, layers)
    }

    /// Keeps only the listed particles (ascending). Fails if a dropped particle shares a
    /// phase gate with a kept one.
    pub fn restricted(&self, keep: &[usize]) -> Result<Circuit> {
        for &p in keep {
            self.check_particle(p)?;
        }
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubsystem(format!(
                "{keep:?} must be non-empty and strictly ascending"
            )));
        }
        let mut new_index = vec![usize::MAX; self.particles];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let mut layers = Vec::with_capacity(self.depth());
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut out = Layer::new();
            for (&p, g) in &layer.singles {
                if new_index[p] != usize::MAX {
                    out.singles.insert(new_index[p], *g);
                }
            }
            for g in &layer.phases {
                let (a, b) = g.pair();
                match (new_index[a] != usize::MAX, new_index[b] != usize::MAX) {
                    (true, true) => {
                        out.phases
                            .push(PhaseGate::new(new_index[a], new_index[b], g.thetas())?)
                    }
                    (false, false) => {}
                    _ => {
                        return Err(Error::Precondition(format!(
                            "layer {} couples kept and dropped particles via pair ({a}, {b})",
                            idx + 1
                        )))
                    }
                }
            }
            layers.push(out);
        }
        Circuit::new(keep.len(), layers)
    }

    /// Product of single-particle gates for `particle` up to layer `t`, ignoring phases.
    pub fn free_unitary(&self, particle: usize, t: usize) -> SingleGate {
        self.layers[..t]
            .iter()
            .fold(SingleGate::identity(), |acc, layer| {
                layer.single(particle).compose(&acc)
            })
    }
}

fn relabel_layer(layer: &Layer, new_index: &[usize]) -> Result<Layer> {
    let mut out = Layer::new();
    for (&p, g) in &layer.singles {
        out.singles.insert(new_index[p], *g);
    }
    for g in &layer.phases {
        let (a, b) = g.pair();
        let (na, nb) = (new_index[a], new_index[b]);
        let t = g.thetas();
        let gate = if na < nb {
            PhaseGate::new(na, nb, t)?
        } else {
            PhaseGate::new(nb, na, [t[0], t[2], t[1], t[3]])?
        };
        out.phases.push(gate);
    }
    Ok(out)
}

/// Two-layer Bell-test circuit: `(H ⊗ H)`, then `diag(1,1,1,-1)`, then `(a2 ⊗ b2)`.
pub fn build_epr_circuit(a2: SingleGate, b2: SingleGate) -> Result<Circuit> {
    let prepare = Layer::new()
        .with_single(0, SingleGate::hadamard())
        .with_single(1, SingleGate::hadamard())
        .with_phase(PhaseGate::cz(0, 1)?);
    let measure = Layer::new().with_single(0, a2).with_single(1, b2);
    Circuit::new(2, vec![prepare, measure])
}
