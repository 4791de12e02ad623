//! Hidden variables for particle 0 of a two-particle circuit.
//!
//! For paths `P`, `Q` of particle 0 the interference weight `λ_{P,Q}` starts at 1 and
//! picks up a hit `H^{(t)}` at each layer where the two particles share a phase gate:
//!
//! ```text
//! H^{(t)} = Σ_k (e^{i(θ_Q(k) - θ_P(k))} - 1) · conj(u_P[k]) · u_Q[k],
//! u_P = B^{(t)} 𝔹_P^{(t-1)} |0⟩
//! ```
//!
//! where `θ_P(k)` is the angle the layer-`t` gate applies when particle 0 follows `P`
//! and particle 1 sits in mode `k`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::budget::{pow2, PathBudget};
use crate::circuit::{cis, phase_excess, Circuit};
use crate::error::{Error, Result};
use crate::oracle::Distribution;
use crate::paths::{condition_on_paths, enumerate_paths, path_amplitude_unchecked, Path};

/// Tolerance on the imaginary part of the cross-term sum.
pub const RESIDUE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitTerm {
    pub layer: usize,
    pub value: C64,
}

/// λ trajectory of one ordered pair: `trajectory[t] = λ^{(t)}`, `hits[t-1]` the hit at
/// layer `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEntry {
    pub p: Path,
    pub q: Path,
    pub trajectory: Vec<C64>,
    pub hits: Vec<HitTerm>,
}

impl LambdaEntry {
    pub fn last(&self) -> C64 {
        *self.trajectory.last().expect("trajectory starts at λ = 1")
    }
}

/// All ordered pairs `P ≠ Q` of paths to one endpoint, in lexicographic pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTable {
    pub endpoint: u8,
    pub paths: Vec<Path>,
    pub entries: Vec<LambdaEntry>,
}

impl LambdaTable {
    pub fn get(&self, p: &Path, q: &Path) -> Option<&LambdaEntry> {
        self.entries.iter().find(|e| e.p == *p && e.q == *q)
    }
}

/// What particle 1 sees along one path of particle 0.
struct Track {
    /// `pre[t-1]` is `B^{(t)} 𝔹_P^{(t-1)} |0⟩`.
    pre: Vec<[C64; 2]>,
    /// `angles[t-1][k]` is the layer-`t` coupling angle with particle 1 in mode `k`.
    angles: Vec<[f64; 2]>,
}

fn track(c: &Circuit, p: &Path) -> Track {
    let n = c.depth();
    let mut pre = Vec::with_capacity(n);
    let mut angles = Vec::with_capacity(n);
    let mut s = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    for t in 1..=n {
        let layer = c.layer(t);
        let u = layer.single(1).apply(s);
        let a = match layer.phase_between(0, 1) {
            Some(g) => [g.angle(p.mode(t), 0), g.angle(p.mode(t), 1)],
            None => [0.0, 0.0],
        };
        s = [u[0] * cis(a[0]), u[1] * cis(a[1])];
        pre.push(u);
        angles.push(a);
    }
    Track { pre, angles }
}

fn hit_between(c: &Circuit, tp: &Track, tq: &Track, t: usize) -> C64 {
    if c.layer(t).phase_between(0, 1).is_none() {
        return C64::new(0.0, 0.0);
    }
    let (up, uq) = (tp.pre[t - 1], tq.pre[t - 1]);
    let (ap, aq) = (tp.angles[t - 1], tq.angles[t - 1]);
    (0..2)
        .map(|k| phase_excess(aq[k] - ap[k]) * up[k].conj() * uq[k])
        .sum()
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

fn check_pair(c: &Circuit, p: &Path, q: &Path) -> Result<()> {
    require_two(c)?;
    for path in [p, q] {
        if path.len() != c.depth() {
            return Err(Error::PathLength {
                expected: c.depth(),
                found: path.len(),
            });
        }
    }
    if p.endpoint() != q.endpoint() {
        return Err(Error::EndpointMismatch(p.endpoint(), q.endpoint()));
    }
    Ok(())
}

/// Hit `H^{(t)}_{P,Q}` at layer `t` (1-based).
pub fn hit(c: &Circuit, p: &Path, q: &Path, t: usize) -> Result<HitTerm> {
    check_pair(c, p, q)?;
    if t == 0 || t > c.depth() {
        return Err(Error::LayerOutOfRange {
            layer: t,
            layers: c.depth(),
        });
    }
    let value = hit_between(c, &track(c, p), &track(c, q), t);
    Ok(HitTerm { layer: t, value })
}

fn entry_from_tracks(c: &Circuit, p: Path, q: Path, tp: &Track, tq: &Track) -> LambdaEntry {
    let mut trajectory = Vec::with_capacity(c.depth() + 1);
    let mut hits = Vec::with_capacity(c.depth());
    let mut lambda = C64::new(1.0, 0.0);
    trajectory.push(lambda);
    for t in 1..=c.depth() {
        let value = hit_between(c, tp, tq, t);
        lambda += value;
        hits.push(HitTerm { layer: t, value });
        trajectory.push(lambda);
    }
    LambdaEntry {
        p,
        q,
        trajectory,
        hits,
    }
}

/// Full λ trajectory of `(P, Q)` built hit by hit.
pub fn lambda_accumulate(c: &Circuit, p: &Path, q: &Path) -> Result<LambdaEntry> {
    check_pair(c, p, q)?;
    Ok(entry_from_tracks(c, *p, *q, &track(c, p), &track(c, q)))
}

/// `⟨0|𝔹_P^{(n)†} 𝔹_Q^{(n)}|0⟩` from conditioned matrices.
pub fn lambda_direct(c: &Circuit, p: &Path, q: &Path) -> Result<C64> {
    lambda_direct_prefix(c, p, q, c.depth())
}

/// As [`lambda_direct`] for the first `s` layers.
pub fn lambda_direct_prefix(c: &Circuit, p: &Path, q: &Path, s: usize) -> Result<C64> {
    check_pair(c, p, q)?;
    if s > c.depth() {
        return Err(Error::LayerOutOfRange {
            layer: s,
            layers: c.depth(),
        });
    }
    let bp = condition_on_paths(c, &[0], &[*p])?.matrix_upto(s);
    let bq = condition_on_paths(c, &[0], &[*q])?.matrix_upto(s);
    Ok((bp.adjoint() * bq)[(0, 0)])
}

fn pair_count_bits(n: usize) -> u128 {
    pow2(2 * n.saturating_sub(1))
}

/// λ trajectories for every ordered pair of distinct paths ending in `endpoint`.
pub fn lambda_table(c: &Circuit, endpoint: u8, budget: PathBudget) -> Result<LambdaTable> {
    require_two(c)?;
    let n = c.depth();
    budget.check(pair_count_bits(n))?;
    let paths = enumerate_paths(n, endpoint)?;
    let tracks: Vec<Track> = paths.par_iter().map(|p| track(c, p)).collect();
    let pairs = ordered_pairs(paths.len());
    let entries = pairs
        .par_iter()
        .map(|&(i, j)| entry_from_tracks(c, paths[i], paths[j], &tracks[i], &tracks[j]))
        .collect();
    Ok(LambdaTable {
        endpoint,
        paths,
        entries,
    })
}

pub(crate) fn ordered_pairs(len: usize) -> Vec<(usize, usize)> {
    (0..len)
        .flat_map(|i| (0..len).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Pieces of the marginal sum for one outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalTerms {
    /// `Σ_P |A_P|²`.
    pub diagonal: f64,
    /// `Σ_{P≠Q} A_P^* A_Q λ_{P,Q}`, before dropping the imaginary part.
    pub cross: C64,
    /// `Σ_{P≠Q} A_P^* A_Q (λ_{P,Q} - 1)`.
    pub cross_deviation: C64,
    /// `|⟨j|𝔸|0⟩|²` for the interaction-free single-particle evolution.
    pub free: f64,
}

impl MarginalTerms {
    pub fn value(&self) -> f64 {
        self.diagonal + self.cross.re
    }

    pub fn deviation_value(&self) -> f64 {
        self.free + self.cross_deviation.re
    }

    fn check(&self) -> Result<()> {
        for residue in [self.cross.im, self.cross_deviation.im] {
            if residue.abs() > RESIDUE_TOL {
                return Err(Error::NonRealResidue { residue });
            }
        }
        Ok(())
    }
}

pub fn marginal_terms(c: &Circuit, j: u8, budget: PathBudget) -> Result<MarginalTerms> {
    require_two(c)?;
    if j > 1 {
        return Err(Error::InvalidMode(j));
    }
    let n = c.depth();
    let free = c.free_unitary(0, n).entry(j, 0).norm_sqr();
    if n == 0 {
        let p = if j == 0 { 1.0 } else { 0.0 };
        return Ok(MarginalTerms {
            diagonal: p,
            cross: C64::new(0.0, 0.0),
            cross_deviation: C64::new(0.0, 0.0),
            free,
        });
    }
    budget.check(pair_count_bits(n))?;
    let paths = enumerate_paths(n, j)?;
    let amps: Vec<C64> = paths
        .iter()
        .map(|p| path_amplitude_unchecked(c, 0, p))
        .collect();
    let tracks: Vec<Track> = paths.par_iter().map(|p| track(c, p)).collect();
    let pairs = ordered_pairs(paths.len());
    let terms: Vec<(C64, C64)> = pairs
        .par_iter()
        .map(|&(i, k)| {
            let weight = amps[i].conj() * amps[k];
            if weight == C64::new(0.0, 0.0) {
                return (weight, weight);
            }
            let mut lambda = C64::new(1.0, 0.0);
            for t in 1..=n {
                lambda += hit_between(c, &tracks[i], &tracks[k], t);
            }
            (weight * lambda, weight * (lambda - 1.0))
        })
        .collect();
    let mut cross = C64::new(0.0, 0.0);
    let mut cross_deviation = C64::new(0.0, 0.0);
    for (a, b) in terms {
        cross += a;
        cross_deviation += b;
    }
    let out = MarginalTerms {
        diagonal: amps.iter().map(|a| a.norm_sqr()).sum(),
        cross,
        cross_deviation,
        free,
    };
    out.check()?;
    Ok(out)
}

/// `P(particle 0 = j)` from path weights and final hidden variables.
pub fn marginal_lambda(c: &Circuit, j: u8, budget: PathBudget) -> Result<f64> {
    Ok(marginal_terms(c, j, budget)?.value())
}

/// Same probability written as the free evolution plus the λ − 1 deviations.
pub fn marginal_lambda_deviation(c: &Circuit, j: u8, budget: PathBudget) -> Result<f64> {
    Ok(marginal_terms(c, j, budget)?.deviation_value())
}

pub fn distribution_lambda(c: &Circuit, budget: PathBudget) -> Result<Distribution> {
    let probs = (0..2u8)
        .map(|j| marginal_lambda(c, j, budget))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Distribution::new(vec![0], probs))
}
