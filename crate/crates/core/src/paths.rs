//! Computational-basis paths and the pieces of a configuration-space path sum.
//!
//! A path of a particle through an `n`-layer circuit is the sequence of basis modes
//! `m_1..m_n` it occupies after each layer, with `m_0 = 0` implied. Enumeration order is
//! lexicographic in `(m_1, …, m_{n-1})` and is relied on by every table and report.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::budget::{pow2, PathBudget};
use crate::circuit::{cis, Circuit, SingleGate};
use crate::error::{Error, Result};

pub const MAX_PATH_LENGTH: usize = 64;

/// Packed mode sequence, `m_1` in the most significant position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    bits: u64,
    len: u8,
}

impl Path {
    pub fn from_modes(modes: &[u8]) -> Result<Path> {
        if modes.len() > MAX_PATH_LENGTH {
            return Err(Error::PathLength {
                expected: MAX_PATH_LENGTH,
                found: modes.len(),
            });
        }
        let mut bits = 0u64;
        for &m in modes {
            if m > 1 {
                return Err(Error::InvalidMode(m));
            }
            bits = (bits << 1) | m as u64;
        }
        Ok(Path {
            bits,
            len: modes.len() as u8,
        })
    }

    pub(crate) fn from_bits(bits: u64, len: usize) -> Path {
        debug_assert!(len <= MAX_PATH_LENGTH);
        Path {
            bits,
            len: len as u8,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `m_t`; `t = 0` is the initial mode 0.
    #[inline]
    pub fn mode(&self, t: usize) -> u8 {
        if t == 0 {
            0
        } else {
            debug_assert!(t <= self.len());
            ((self.bits >> (self.len() - t)) & 1) as u8
        }
    }

    /// `m_n`, or 0 for the empty path.
    pub fn endpoint(&self) -> u8 {
        self.mode(self.len())
    }

    pub fn modes(&self) -> Vec<u8> {
        (1..=self.len()).map(|t| self.mode(t)).collect()
    }

    /// The first `t` steps.
    pub fn prefix(&self, t: usize) -> Path {
        assert!(t <= self.len(), "prefix longer than path");
        Path::from_bits(self.bits >> (self.len() - t), t)
    }

    pub fn bitstring(&self) -> String {
        self.modes().iter().map(|m| char::from(b'0' + m)).collect()
    }

    fn expect_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::PathLength {
                expected: n,
                found: self.len(),
            })
        }
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Path({})", self.bitstring())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Path> {
        let modes = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!("bad path character {ch:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Path::from_modes(&modes)
    }
}

/// All `2^{n-1}` paths of length `n` ending in `endpoint`, in lexicographic order.
pub fn enumerate_paths(n: usize, endpoint: u8) -> Result<Vec<Path>> {
    if n == 0 {
        return Err(Error::ZeroLayers);
    }
    if endpoint > 1 {
        return Err(Error::InvalidMode(endpoint));
    }
    if n > MAX_PATH_LENGTH {
        return Err(Error::PathLength {
            expected: MAX_PATH_LENGTH,
            found: n,
        });
    }
    let count = 1u64 << (n - 1);
    Ok((0..count)
        .map(|i| Path::from_bits((i << 1) | endpoint as u64, n))
        .collect())
}

/// `Π_t ⟨m_t|single_t|m_{t-1}⟩`, phase gates excluded.
pub fn path_amplitude(c: &Circuit, particle: usize, p: &Path) -> Result<C64> {
    c.check_particle(particle)?;
    p.expect_len(c.depth())?;
    Ok(path_amplitude_unchecked(c, particle, p))
}

pub(crate) fn path_amplitude_unchecked(c: &Circuit, particle: usize, p: &Path) -> C64 {
    let mut amp = C64::new(1.0, 0.0);
    for t in 1..=p.len() {
        amp *= c.layer(t).single(particle).entry(p.mode(t), p.mode(t - 1));
    }
    amp
}

/// Per-layer controlled-phase angles for a joint assignment of paths, together with their
/// running totals. The phase factor up to layer `t` is `e^{i·cumulative[t]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrace {
    /// `per_layer[t-1]` is the angle picked up at layer `t`.
    pub per_layer: Vec<f64>,
    /// `cumulative[t]` is the angle after `t` layers; `cumulative[0] = 0`.
    pub cumulative: Vec<f64>,
}

impl PhaseTrace {
    pub fn phase(&self) -> C64 {
        cis(*self.cumulative.last().unwrap_or(&0.0))
    }

    pub fn phase_upto(&self, t: usize) -> C64 {
        cis(self.cumulative[t])
    }
}

/// Phase trace of the gates whose both members are among `particles`, with `paths[i]`
/// the path of `particles[i]`.
pub fn phase_trace(c: &Circuit, particles: &[usize], paths: &[Path]) -> Result<PhaseTrace> {
    if particles.len() != paths.len() {
        return Err(Error::ParticleCount {
            expected: particles.len(),
            found: paths.len(),
        });
    }
    let mut seen = vec![false; c.particles()];
    for &p in particles {
        c.check_particle(p)?;
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::OverlappingParticles(p));
        }
    }
    for path in paths {
        path.expect_len(c.depth())?;
    }
    let slot = |q: usize| particles.iter().position(|&p| p == q);
    let mut per_layer = Vec::with_capacity(c.depth());
    let mut cumulative = vec![0.0];
    for t in 1..=c.depth() {
        let mut angle = 0.0;
        for g in c.layer(t).phases() {
            let (a, b) = g.pair();
            if let (Some(ia), Some(ib)) = (slot(a), slot(b)) {
                angle += g.angle(paths[ia].mode(t), paths[ib].mode(t));
            }
        }
        per_layer.push(angle);
        let last = *cumulative.last().unwrap();
        cumulative.push(last + angle);
    }
    Ok(PhaseTrace {
        per_layer,
        cumulative,
    })
}

/// `e^{iα}` for one path per particle, all phase gates included.
pub fn joint_phase(c: &Circuit, assignment: &[Path]) -> Result<C64> {
    if assignment.len() != c.particles() {
        return Err(Error::ParticleCount {
            expected: c.particles(),
            found: assignment.len(),
        });
    }
    let all: Vec<usize> = (0..c.particles()).collect();
    Ok(phase_trace(c, &all, assignment)?.phase())
}

/// `⟨outcome|𝕌|0…0⟩` as the literal sum over every joint path assignment.
pub fn amplitude_via_paths(c: &Circuit, outcome: &[u8], budget: PathBudget) -> Result<C64> {
    let n = c.depth();
    let np = c.particles();
    if outcome.len() != np {
        return Err(Error::ParticleCount {
            expected: np,
            found: outcome.len(),
        });
    }
    if let Some(&m) = outcome.iter().find(|&&m| m > 1) {
        return Err(Error::InvalidMode(m));
    }
    if n == 0 {
        let hit = outcome.iter().all(|&m| m == 0);
        return Ok(C64::new(if hit { 1.0 } else { 0.0 }, 0.0));
    }
    budget.check(pow2(np * (n - 1)))?;

    let lists: Vec<Vec<Path>> = outcome
        .iter()
        .map(|&m| enumerate_paths(n, m))
        .collect::<Result<_>>()?;
    let amps: Vec<Vec<C64>> = lists
        .iter()
        .enumerate()
        .map(|(p, list)| {
            list.iter()
                .map(|path| path_amplitude_unchecked(c, p, path))
                .collect()
        })
        .collect();

    let mut index = vec![0usize; np];
    let mut assignment: Vec<Path> = lists.iter().map(|l| l[0]).collect();
    let mut total = C64::new(0.0, 0.0);
    loop {
        let weight: C64 = (0..np).map(|p| amps[p][index[p]]).product();
        if weight != C64::new(0.0, 0.0) {
            total += weight * joint_phase_unchecked(c, &assignment);
        }
        // Odometer step, last particle fastest.
        let mut p = np;
        loop {
            if p == 0 {
                return Ok(total);
            }
            p -= 1;
            index[p] += 1;
            if index[p] < lists[p].len() {
                assignment[p] = lists[p][index[p]];
                break;
            }
            index[p] = 0;
            assignment[p] = lists[p][0];
        }
    }
}

fn joint_phase_unchecked(c: &Circuit, assignment: &[Path]) -> C64 {
    let mut angle = 0.0;
    for (t, layer) in c.layers().iter().enumerate() {
        for g in layer.phases() {
            let (a, b) = g.pair();
            angle += g.angle(assignment[a].mode(t + 1), assignment[b].mode(t + 1));
        }
    }
    cis(angle)
}

/// One layer of a conditioned external evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedLayer {
    /// Single gate per external particle, in external order.
    pub singles: Vec<SingleGate>,
    /// Diagonal angle per external basis index from phase gates inside the external set.
    pub internal: Vec<f64>,
    /// Diagonal angle per external basis index from conditioned straddling gates.
    pub coupling: Vec<f64>,
    /// Whether any phase gate straddled the conditioning and external sets.
    pub coupled: bool,
}

impl ConditionedLayer {
    pub fn angle(&self, x: usize) -> f64 {
        self.internal[x] + self.coupling[x]
    }
}

/// Evolution of the external particles given fixed paths of the conditioning particles.
/// External basis indices put the lowest-numbered external particle in the most
/// significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalUnitary {
    external: Vec<usize>,
    layers: Vec<ConditionedLayer>,
}

impl ConditionalUnitary {
    pub fn external(&self) -> &[usize] {
        &self.external
    }

    pub fn dimension(&self) -> usize {
        1 << self.external.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Layer `t`, 1-based.
    pub fn layer(&self, t: usize) -> &ConditionedLayer {
        &self.layers[t - 1]
    }

    pub fn apply_singles(&self, t: usize, v: &mut [C64]) {
        let width = self.external.len();
        for (slot, g) in self.layer(t).singles.iter().enumerate() {
            if g.is_identity(0.0) {
                continue;
            }
            let stride = 1usize << (width - 1 - slot);
            for i in 0..v.len() {
                if i & stride == 0 {
                    let [x0, x1] = g.apply([v[i], v[i | stride]]);
                    v[i] = x0;
                    v[i | stride] = x1;
                }
            }
        }
    }

    pub fn apply_phases(&self, t: usize, v: &mut [C64]) {
        let layer = self.layer(t);
        for (x, amp) in v.iter_mut().enumerate() {
            let angle = layer.angle(x);
            if angle != 0.0 {
                *amp *= cis(angle);
            }
        }
    }

    pub fn apply_layer(&self, t: usize, v: &mut [C64]) {
        self.apply_singles(t, v);
        self.apply_phases(t, v);
    }

    /// `𝕌^{(t)}|0…0⟩` over the external particles.
    pub fn state_upto(&self, t: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dimension()];
        v[0] = C64::new(1.0, 0.0);
        for s in 1..=t {
            self.apply_layer(s, &mut v);
        }
        v
    }

    /// Full matrix of the first `t` layers.
    pub fn matrix_upto(&self, t: usize) -> DMatrix<C64> {
        let d = self.dimension();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for col in 0..d {
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[col] = C64::new(1.0, 0.0);
            for s in 1..=t {
                self.apply_layer(s, &mut v);
            }
            for (row, x) in v.into_iter().enumerate() {
                m[(row, col)] = x;
            }
        }
        m
    }
}

/// External evolution given `paths[i]` for `conditioning[i]`. Phase gates inside the
/// external set are kept, straddling gates are conditioned on the path mode at that
/// layer and gates inside the conditioning set are dropped.
pub fn condition_on_paths(
    c: &Circuit,
    conditioning: &[usize],
    paths: &[Path],
) -> Result<ConditionalUnitary> {
    if conditioning.len() != paths.len() {
        return Err(Error::ParticleCount {
            expected: conditioning.len(),
            found: paths.len(),
        });
    }
    let mut role = vec![None; c.particles()];
    for (i, &p) in conditioning.iter().enumerate() {
        c.check_particle(p)?;
        if role[p].replace(i).is_some() {
            return Err(Error::OverlappingParticles(p));
        }
    }
    for path in paths {
        path.expect_len(c.depth())?;
    }
    let external: Vec<usize> = (0..c.particles()).filter(|&p| role[p].is_none()).collect();
    let width = external.len();
    let mut slot = vec![usize::MAX; c.particles()];
    for (i, &p) in external.iter().enumerate() {
        slot[p] = i;
    }
    let bit = |x: usize, s: usize| ((x >> (width - 1 - s)) & 1) as u8;
    let dim = 1usize << width;

    let mut layers = Vec::with_capacity(c.depth());
    for t in 1..=c.depth() {
        let layer = c.layer(t);
        let singles = external.iter().map(|&p| layer.single(p)).collect();
        let mut internal = vec![0.0; dim];
        let mut coupling = vec![0.0; dim];
        let mut coupled = false;
        for g in layer.phases() {
            let (a, b) = g.pair();
            match (role[a], role[b]) {
                (Some(_), Some(_)) => {}
                (None, None) => {
                    let (sa, sb) = (slot[a], slot[b]);
                    for (x, angle) in internal.iter_mut().enumerate() {
                        *angle += g.angle(bit(x, sa), bit(x, sb));
                    }
                }
                (Some(i), None) | (None, Some(i)) => {
                    coupled = true;
                    let controller = conditioning[i];
                    let cond = g.condition(controller, paths[i].mode(t))?;
                    let st = slot[cond.target];
                    for (x, angle) in coupling.iter_mut().enumerate() {
                        *angle += cond.angles[bit(x, st) as usize];
                    }
                }
            }
        }
        layers.push(ConditionedLayer {
            singles,
            internal,
            coupling,
            coupled,
        });
    }
    Ok(ConditionalUnitary { external, layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random::random_circuit;
    use crate::circuit::{build_epr_circuit, Layer, PhaseGate};
    use crate::oracle::{basis_modes, evolve};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn epr() -> Circuit {
        build_epr_circuit(SingleGate::hadamard(), SingleGate::identity()).unwrap()
    }

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_paths(2, 1).unwrap().len(), 2);
        assert_eq!(enumerate_paths(1, 0).unwrap(), vec![p("0")]);
        let four = enumerate_paths(4, 1).unwrap();
        let strings: Vec<String> = four.iter().map(Path::bitstring).collect();
        assert_eq!(
            strings,
            ["0001", "0011", "0101", "0111", "1001", "1011", "1101", "1111"]
        );
        assert!(matches!(enumerate_paths(0, 0), Err(Error::ZeroLayers)));
    }

    #[test]
    fn path_accessors() {
        let q = p("0110");
        assert_eq!(q.mode(0), 0);
        assert_eq!(q.modes(), vec![0, 1, 1, 0]);
        assert_eq!(q.endpoint(), 0);
        assert_eq!(q.prefix(2), p("01"));
        assert_eq!(q.to_string(), "0110");
        assert!("012".parse::<Path>().is_err());
    }

    #[test]
    fn hadamard_path_amplitude() {
        let c = Circuit::new(1, vec![Layer::new().with_single(0, SingleGate::hadamard())]).unwrap();
        let a = path_amplitude(&c, 0, &p("0")).unwrap();
        assert!((a - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(path_amplitude(&c, 0, &p("00")).is_err());
    }

    #[test]
    fn identity_paths() {
        let c = Circuit::new(1, vec![Layer::new(); 3]).unwrap();
        assert_eq!(
            path_amplitude(&c, 0, &p("000")).unwrap(),
            C64::new(1.0, 0.0)
        );
        assert_eq!(
            path_amplitude(&c, 0, &p("100")).unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn path_sum_equals_matrix_product() {
        let c = random_circuit(5, 1, 5);
        for j in 0..2u8 {
            let sum: C64 = enumerate_paths(5, j)
                .unwrap()
                .iter()
                .map(|q| path_amplitude(&c, 0, q).unwrap())
                .sum();
            let free = c.free_unitary(0, 5).entry(j, 0);
            assert!((sum - free).norm() < 1e-12);
        }
    }

    #[test]
    fn epr_joint_phase() {
        let ph = joint_phase(&epr(), &[p("11"), p("11")]).unwrap();
        assert!((ph - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let ph = joint_phase(&epr(), &[p("10"), p("01")]).unwrap();
        assert!((ph - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_theta_joint_phase_is_one() {
        let g = PhaseGate::new(0, 1, [0.0; 4]).unwrap();
        let c = Circuit::new(2, vec![Layer::new().with_phase(g); 2]).unwrap();
        assert_eq!(
            joint_phase(&c, &[p("11"), p("01")]).unwrap(),
            C64::new(1.0, 0.0)
        );
    }

    #[test]
    fn amplitude_via_paths_matches_oracle() {
        for (seed, np, n) in [(7, 2, 4), (8, 3, 3), (9, 3, 1)] {
            let c = random_circuit(seed, np, n);
            let state = evolve(&c, n).unwrap();
            for idx in 0..1 << np {
                let modes = basis_modes(idx, np);
                let a = amplitude_via_paths(&c, &modes, PathBudget::default()).unwrap();
                assert!((a - state.amplitudes()[idx]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn amplitude_via_paths_respects_budget() {
        let c = random_circuit(1, 3, 9);
        let err = amplitude_via_paths(&c, &[0, 0, 0], PathBudget(1 << 10)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn epr_conditioned_on_mode_zero_is_free() {
        let c = epr();
        let u = condition_on_paths(&c, &[0], &[p("00")]).unwrap();
        let free = c.free_unitary(1, 2);
        let m = u.matrix_upto(2);
        for r in 0..2 {
            for col in 0..2 {
                assert!((m[(r, col)] - free.entry(r as u8, col as u8)).norm() < 1e-15);
            }
        }
        assert!(!u.layer(2).coupled && u.layer(1).coupled);
    }

    #[test]
    fn conditional_inner_products_match_path_sums() {
        let c = random_circuit(3, 2, 4);
        let paths = enumerate_paths(4, 1).unwrap();
        for q in &paths {
            let v = condition_on_paths(&c, &[0], &[*q]).unwrap().state_upto(4);
            for k in 0..2u8 {
                let sum: C64 = enumerate_paths(4, k)
                    .unwrap()
                    .iter()
                    .map(|m| {
                        path_amplitude(&c, 1, m).unwrap() * joint_phase(&c, &[*q, *m]).unwrap()
                    })
                    .sum();
                assert!((sum - v[k as usize]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn conditional_unitary_is_unitary() {
        let c = random_circuit(4, 4, 3);
        let u = condition_on_paths(&c, &[0, 2], &[p("011"), p("110")]).unwrap();
        assert_eq!(u.external(), &[1, 3]);
        let m = u.matrix_upto(3);
        let id = m.adjoint() * &m;
        for r in 0..4 {
            for col in 0..4 {
                let e = if r == col { 1.0 } else { 0.0 };
                assert!((id[(r, col)] - C64::new(e, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn overlapping_conditioning_rejected() {
        let c = random_circuit(4, 3, 2);
        assert!(matches!(
            condition_on_paths(&c, &[1, 1], &[p("00"), p("00")]),
            Err(Error::OverlappingParticles(1))
        ));
    }
}
