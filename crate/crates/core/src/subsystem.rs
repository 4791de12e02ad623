//! Marginals of an arbitrary proper subsystem.
//!
//! A configuration path lists one path per subsystem particle. Its amplitude is the
//! product of the single-particle amplitudes times the phases of gates acting inside the
//! subsystem. Gates straddling the boundary condition the external evolution `𝕌_P`, and
//! `λ_{P,Q} = ⟨0|𝕌_P^† 𝕌_Q|0⟩` is evaluated directly. Subsystems are handled in ascending
//! particle order; outcome tuples follow the same order.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::budget::{pow2, PathBudget};
use crate::circuit::{phase_excess, Circuit};
use crate::error::{Error, Result};
use crate::lambda_two::{ordered_pairs, RESIDUE_TOL};
use crate::oracle::{basis_modes, Distribution};
use crate::paths::{
    condition_on_paths, enumerate_paths, path_amplitude_unchecked, phase_trace, ConditionalUnitary,
    Path,
};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigPath {
    pub paths: Vec<Path>,
}

impl ConfigPath {
    pub fn new(paths: Vec<Path>) -> Result<ConfigPath> {
        if let Some(first) = paths.first() {
            if let Some(bad) = paths.iter().find(|p| p.len() != first.len()) {
                return Err(Error::PathLength {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(ConfigPath { paths })
    }

    pub fn endpoints(&self) -> Vec<u8> {
        self.paths.iter().map(Path::endpoint).collect()
    }

    pub fn len(&self) -> usize {
        self.paths.first().map_or(0, Path::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Constituent bit-strings joined by `|`.
    pub fn label(&self) -> String {
        self.paths
            .iter()
            .map(Path::bitstring)
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Every configuration path with the given endpoints, first particle varying slowest.
pub fn enumerate_config_paths(n: usize, endpoints: &[u8]) -> Result<Vec<ConfigPath>> {
    let lists: Vec<Vec<Path>> = endpoints
        .iter()
        .map(|&e| enumerate_paths(n, e))
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(endpoints.len())];
    for list in &lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |p| {
                    let mut next = prefix.clone();
                    next.push(*p);
                    next
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|paths| ConfigPath { paths }).collect())
}

fn check_config(c: &Circuit, subsystem: &[usize], p: &ConfigPath) -> Result<()> {
    if p.paths.len() != subsystem.len() {
        return Err(Error::ParticleCount {
            expected: subsystem.len(),
            found: p.paths.len(),
        });
    }
    if let Some(bad) = p.paths.iter().find(|x| x.len() != c.depth()) {
        return Err(Error::PathLength {
            expected: c.depth(),
            found: bad.len(),
        });
    }
    Ok(())
}

fn single_amplitudes(c: &Circuit, subsystem: &[usize], p: &ConfigPath) -> C64 {
    subsystem
        .iter()
        .zip(&p.paths)
        .map(|(&q, path)| path_amplitude_unchecked(c, q, path))
        .product()
}

/// `A_{P_1}⋯A_{P_M} e^{iα(P_1..P_M)}` with the phase from gates inside the subsystem.
pub fn config_path_amplitude(c: &Circuit, subsystem: &[usize], p: &ConfigPath) -> Result<C64> {
    let subsystem = c.normalize_subsystem(subsystem, true)?;
    check_config(c, &subsystem, p)?;
    let phase = phase_trace(c, &subsystem, &p.paths)?.phase();
    Ok(single_amplitudes(c, &subsystem, p) * phase)
}

fn check_pair(
    c: &Circuit,
    subsystem: &[usize],
    p: &ConfigPath,
    q: &ConfigPath,
) -> Result<Vec<usize>> {
    let subsystem = c.normalize_subsystem(subsystem, true)?;
    check_config(c, &subsystem, p)?;
    check_config(c, &subsystem, q)?;
    for (a, b) in p.paths.iter().zip(&q.paths) {
        if a.endpoint() != b.endpoint() {
            return Err(Error::EndpointMismatch(a.endpoint(), b.endpoint()));
        }
    }
    Ok(subsystem)
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨0|𝕌_P^{(n)†} 𝕌_Q^{(n)}|0⟩` over the external particles.
pub fn lambda_general(
    c: &Circuit,
    subsystem: &[usize],
    p: &ConfigPath,
    q: &ConfigPath,
) -> Result<C64> {
    let subsystem = check_pair(c, subsystem, p, q)?;
    if p == q {
        return Ok(ONE);
    }
    let up = condition_on_paths(c, &subsystem, &p.paths)?;
    let uq = condition_on_paths(c, &subsystem, &q.paths)?;
    Ok(inner(&up.state_upto(c.depth()), &uq.state_upto(c.depth())))
}

/// As [`lambda_general`] after the first `s` layers.
pub fn lambda_general_prefix(
    c: &Circuit,
    subsystem: &[usize],
    p: &ConfigPath,
    q: &ConfigPath,
    s: usize,
) -> Result<C64> {
    let subsystem = check_pair(c, subsystem, p, q)?;
    if s > c.depth() {
        return Err(Error::LayerOutOfRange {
            layer: s,
            layers: c.depth(),
        });
    }
    let up = condition_on_paths(c, &subsystem, &p.paths)?;
    let uq = condition_on_paths(c, &subsystem, &q.paths)?;
    Ok(inner(&up.state_upto(s), &uq.state_upto(s)))
}

/// λ trajectory with one increment per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLambda {
    pub p: ConfigPath,
    pub q: ConfigPath,
    pub trajectory: Vec<C64>,
    pub increments: Vec<C64>,
}

/// Hit of layer `t` from the boundary-gate phase differences alone:
/// `Σ_x (e^{i(θ_Q(x) - θ_P(x))} - 1) conj(φ_P[x]) φ_Q[x]` with `φ` the state after the
/// layer's single gates. Exactly zero when no gate straddles the boundary.
fn layer_hit(
    up: &ConditionalUnitary,
    uq: &ConditionalUnitary,
    t: usize,
    fp: &[C64],
    fq: &[C64],
) -> C64 {
    let (lp, lq) = (up.layer(t), uq.layer(t));
    if !lp.coupled {
        return ZERO;
    }
    (0..fp.len())
        .map(|x| phase_excess(lq.coupling[x] - lp.coupling[x]) * fp[x].conj() * fq[x])
        .sum()
}

fn trace_pair(up: &ConditionalUnitary, uq: &ConditionalUnitary) -> (Vec<C64>, Vec<C64>) {
    let d = up.dimension();
    let mut vp = vec![ZERO; d];
    let mut vq = vec![ZERO; d];
    vp[0] = ONE;
    vq[0] = ONE;
    let mut lambda = ONE;
    let mut trajectory = vec![lambda];
    let mut increments = Vec::with_capacity(up.depth());
    for t in 1..=up.depth() {
        up.apply_singles(t, &mut vp);
        uq.apply_singles(t, &mut vq);
        let h = layer_hit(up, uq, t, &vp, &vq);
        up.apply_phases(t, &mut vp);
        uq.apply_phases(t, &mut vq);
        lambda += h;
        increments.push(h);
        trajectory.push(lambda);
    }
    (trajectory, increments)
}

/// λ built up layer by layer from boundary hits.
pub fn lambda_general_trace(
    c: &Circuit,
    subsystem: &[usize],
    p: &ConfigPath,
    q: &ConfigPath,
) -> Result<GeneralLambda> {
    let subsystem = check_pair(c, subsystem, p, q)?;
    let up = condition_on_paths(c, &subsystem, &p.paths)?;
    let uq = condition_on_paths(c, &subsystem, &q.paths)?;
    let (trajectory, increments) = trace_pair(&up, &uq);
    Ok(GeneralLambda {
        p: p.clone(),
        q: q.clone(),
        trajectory,
        increments,
    })
}

/// Where the phases of gates inside the subsystem are booked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bookkeeping {
    /// In the configuration amplitude `A_P`.
    Amplitude,
    /// In the pair weight: `A_P` carries single-particle factors only and
    /// `λ'_{P,Q} = λ_{P,Q} e^{i(α_Q - α_P)}`.
    Lambda,
}

fn outcome_budget(n: usize, m: usize) -> u128 {
    pow2(2 * m * n.saturating_sub(1))
}

/// Probability that the subsystem is found in `outcome`.
pub fn marginal_general(
    c: &Circuit,
    subsystem: &[usize],
    outcome: &[u8],
    budget: PathBudget,
) -> Result<f64> {
    marginal_general_with(c, subsystem, outcome, budget, Bookkeeping::Amplitude)
}

pub fn marginal_general_with(
    c: &Circuit,
    subsystem: &[usize],
    outcome: &[u8],
    budget: PathBudget,
    bookkeeping: Bookkeeping,
) -> Result<f64> {
    marginal_core(c, subsystem, outcome, budget, bookkeeping, None)
}

/// `λ · min(1, clamp / |λ|)`: caps the magnitude, keeps the phase.
pub fn clamp_lambda(lambda: C64, clamp: f64) -> C64 {
    let r = lambda.norm();
    if r > clamp {
        lambda * (clamp / r)
    } else {
        lambda
    }
}

/// The pair sum with every `λ` magnitude capped at `clamp`. Not normalized.
pub fn marginal_general_clamped(
    c: &Circuit,
    subsystem: &[usize],
    outcome: &[u8],
    budget: PathBudget,
    clamp: f64,
) -> Result<f64> {
    if clamp.is_nan() || clamp < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "clamp must be ≥ 0, got {clamp}"
        )));
    }
    marginal_core(
        c,
        subsystem,
        outcome,
        budget,
        Bookkeeping::Amplitude,
        Some(clamp),
    )
}

fn marginal_core(
    c: &Circuit,
    subsystem: &[usize],
    outcome: &[u8],
    budget: PathBudget,
    bookkeeping: Bookkeeping,
    clamp: Option<f64>,
) -> Result<f64> {
    let subsystem = c.normalize_subsystem(subsystem, true)?;
    if outcome.len() != subsystem.len() {
        return Err(Error::ParticleCount {
            expected: subsystem.len(),
            found: outcome.len(),
        });
    }
    if let Some(&m) = outcome.iter().find(|&&m| m > 1) {
        return Err(Error::InvalidMode(m));
    }
    let n = c.depth();
    if n == 0 {
        return Ok(if outcome.iter().all(|&m| m == 0) {
            1.0
        } else {
            0.0
        });
    }
    budget.check(outcome_budget(n, subsystem.len()))?;
    let configs = enumerate_config_paths(n, outcome)?;
    let prepared: Vec<(C64, f64, Vec<C64>)> = configs
        .par_iter()
        .map(|p| {
            let amp = single_amplitudes(c, &subsystem, p);
            let alpha = *phase_trace(c, &subsystem, &p.paths)
                .expect("validated")
                .cumulative
                .last()
                .expect("non-empty");
            let state = condition_on_paths(c, &subsystem, &p.paths)
                .expect("validated")
                .state_upto(n);
            (amp, alpha, state)
        })
        .collect();
    let booked: Vec<C64> = prepared
        .iter()
        .map(|(amp, alpha, _)| match bookkeeping {
            Bookkeeping::Amplitude => amp * crate::circuit::cis(*alpha),
            Bookkeeping::Lambda => *amp,
        })
        .collect();
    let terms: Vec<C64> = ordered_pairs(configs.len())
        .par_iter()
        .map(|&(i, k)| {
            let w = booked[i].conj() * booked[k];
            if w == ZERO {
                return ZERO;
            }
            let mut lambda = inner(&prepared[i].2, &prepared[k].2);
            if let Some(limit) = clamp {
                lambda = clamp_lambda(lambda, limit);
            }
            match bookkeeping {
                Bookkeeping::Amplitude => w * lambda,
                Bookkeeping::Lambda => {
                    w * lambda * crate::circuit::cis(prepared[k].1 - prepared[i].1)
                }
            }
        })
        .collect();
    let cross = terms.into_iter().fold(ZERO, |acc, x| acc + x);
    if cross.im.abs() > RESIDUE_TOL {
        return Err(Error::NonRealResidue { residue: cross.im });
    }
    let diagonal: f64 = booked.iter().map(|a| a.norm_sqr()).sum();
    Ok(diagonal + cross.re)
}

/// Distribution over every outcome of the subsystem.
pub fn distribution_general(
    c: &Circuit,
    subsystem: &[usize],
    budget: PathBudget,
) -> Result<Distribution> {
    let subsystem = c.normalize_subsystem(subsystem, true)?;
    let m = subsystem.len();
    let probs = (0..1usize << m)
        .map(|idx| {
            let outcome = basis_modes(idx, m);
            marginal_general(c, &subsystem, &outcome, budget)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Distribution::new(subsystem, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random::{random_circuit, random_decoupled_circuit};
    use crate::circuit::{build_epr_circuit, Layer, SingleGate};
    use crate::lambda_three::lambda_three_direct;
    use crate::oracle::{evolve, marginal_by_sum};
    use crate::paths::path_amplitude;

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    fn cfg(parts: &[&str]) -> ConfigPath {
        ConfigPath::new(parts.iter().map(|s| p(s)).collect()).unwrap()
    }

    #[test]
    fn enumeration_order() {
        let all = enumerate_config_paths(2, &[1, 0]).unwrap();
        let labels: Vec<String> = all.iter().map(ConfigPath::label).collect();
        assert_eq!(labels, ["01|00", "01|10", "11|00", "11|10"]);
    }

    #[test]
    fn single_particle_amplitude_reduces() {
        let c = random_circuit(1, 3, 3);
        let q = cfg(&["011"]);
        let a = config_path_amplitude(&c, &[1], &q).unwrap();
        assert_eq!(a, path_amplitude(&c, 1, &p("011")).unwrap());
    }

    #[test]
    fn epr_pair_picks_up_minus_one() {
        let c = Circuit::new(
            3,
            build_epr_circuit(SingleGate::identity(), SingleGate::identity())
                .unwrap()
                .layers()
                .to_vec(),
        )
        .unwrap();
        let a = config_path_amplitude(&c, &[0, 1], &cfg(&["11", "11"])).unwrap();
        assert!((a - C64::new(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn configuration_sum_reproduces_joint_amplitudes() {
        let c = random_circuit(9, 4, 3);
        let state = evolve(&c, 3).unwrap();
        let sub = [0, 2];
        for idx in 0..16usize {
            let modes = basis_modes(idx, 4);
            let outcome = [modes[0], modes[2]];
            let ext = ((modes[1] as usize) << 1) | modes[3] as usize;
            let mut sum = ZERO;
            for q in enumerate_config_paths(3, &outcome).unwrap() {
                let u = condition_on_paths(&c, &sub, &q.paths)
                    .unwrap()
                    .state_upto(3);
                sum += config_path_amplitude(&c, &sub, &q).unwrap() * u[ext];
            }
            assert!((sum - state.amplitudes()[idx]).norm() < 1e-10);
        }
    }

    #[test]
    fn trace_matches_prefix_inner_products() {
        let c = random_circuit(13, 4, 4);
        let sub = [1, 3];
        let (a, b) = (cfg(&["0101", "1110"]), cfg(&["1001", "0010"]));
        let traced = lambda_general_trace(&c, &sub, &a, &b).unwrap();
        for s in 0..=4 {
            let d = lambda_general_prefix(&c, &sub, &a, &b, s).unwrap();
            assert!((traced.trajectory[s] - d).norm() < 1e-10);
        }
        assert_eq!(lambda_general(&c, &sub, &a, &a).unwrap(), ONE);
    }

    #[test]
    fn decoupled_external_keeps_lambda_at_one() {
        let c = random_decoupled_circuit(4, 2, 4, 1);
        let traced = lambda_general_trace(&c, &[0], &cfg(&["0110"]), &cfg(&["1010"])).unwrap();
        assert!(traced.trajectory.iter().all(|l| *l == ONE));
    }

    #[test]
    fn unconnected_layer_increment_is_exact_zero() {
        let c = random_circuit(14, 3, 2)
            .with_layer(Layer::new().with_single(0, SingleGate::hadamard()))
            .unwrap();
        let traced = lambda_general_trace(&c, &[0], &cfg(&["010"]), &cfg(&["110"])).unwrap();
        assert_eq!(traced.increments[2], ZERO);
    }

    #[test]
    fn agrees_with_three_particle_lambda() {
        let c = random_circuit(15, 3, 3);
        let (a, b) = (p("011"), p("101"));
        let g = lambda_general(&c, &[0], &cfg(&["011"]), &cfg(&["101"])).unwrap();
        let d = lambda_three_direct(&c, &a, &b).unwrap();
        assert!((g - d).norm() < 1e-10);
    }

    #[test]
    fn marginals_match_oracle_and_bookkeepings_agree() {
        let c = random_circuit(16, 4, 3);
        for sub in [vec![0], vec![2], vec![1, 2], vec![0, 3]] {
            let oracle = marginal_by_sum(&c, &sub).unwrap();
            let dist = distribution_general(&c, &sub, PathBudget::default()).unwrap();
            assert!(dist.max_abs_diff(&oracle) < 1e-9, "{sub:?}");
            for idx in 0..1usize << sub.len() {
                let outcome = basis_modes(idx, sub.len());
                let alt = marginal_general_with(
                    &c,
                    &sub,
                    &outcome,
                    PathBudget::default(),
                    Bookkeeping::Lambda,
                )
                .unwrap();
                assert!((alt - dist.probabilities()[idx]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_subsystems() {
        let c = random_circuit(16, 3, 2);
        assert!(marginal_general(&c, &[0, 1, 2], &[0, 0, 0], PathBudget::default()).is_err());
        assert!(marginal_general(&c, &[], &[], PathBudget::default()).is_err());
        assert!(lambda_general(&c, &[0], &cfg(&["01"]), &cfg(&["00"])).is_err());
    }
}
