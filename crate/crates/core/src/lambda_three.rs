//! Hidden variables for particle 0 (A) of a three-particle circuit (A, B = 1, C = 2).
//!
//! The hit at layer `r` splits into an A-B branch summed over B-path pairs `(M, N)` ending
//! in a common mode `k`, and an A-C branch summed over C-path pairs `(S, T)` ending in a
//! common mode `l`:
//!
//! ```text
//! H^{(r)} = Σ_k Σ_{M,N} δ_ab (1 + Σ_{t<r} γ_c + Σ_{t≤r} χ_c)
//!         + Σ_l Σ_{S,T} δ_ac (1 + Σ_{t≤r} γ_b + Σ_{t≤r} χ_b)
//! ```
//!
//! The A-B hit is booked first, so within layer `r` the A-C branch sees the A-B phases of
//! that layer while the A-B branch does not see the A-C ones. `γ` terms carry phase
//! differences from gates coupling the tracked particle to A, `χ` terms those from the
//! B-C gate. B-C gates never produce a hit of their own.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::budget::{pow2, PathBudget};
use crate::circuit::{cis, phase_excess, Circuit, Layer};
use crate::error::{Error, Result};
use crate::lambda_two::{ordered_pairs, RESIDUE_TOL};
use crate::oracle::Distribution;
use crate::paths::{condition_on_paths, enumerate_paths, path_amplitude_unchecked, Path};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Which particle's path pairs a branch sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Sum over B paths; C is tracked.
    Ab,
    /// Sum over C paths; B is tracked.
    Ac,
}

impl Branch {
    fn enumerated(self) -> usize {
        match self {
            Branch::Ab => 1,
            Branch::Ac => 2,
        }
    }

    fn tracked(self) -> usize {
        3 - self.enumerated()
    }

    /// Last layer whose γ enters the branch at hit layer `r`.
    fn gamma_upto(self, r: usize) -> usize {
        match self {
            Branch::Ab => r - 1,
            Branch::Ac => r,
        }
    }
}

/// One `(endpoint, first, second)` term of a branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchTerm {
    pub endpoint: u8,
    pub first: Path,
    pub second: Path,
    pub delta: C64,
    pub gamma_sum: C64,
    pub chi_sum: C64,
}

impl BranchTerm {
    pub fn contribution(&self) -> C64 {
        self.delta * (ONE + self.gamma_sum + self.chi_sum)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HitBreakdown {
    pub layer: usize,
    pub ab: Vec<BranchTerm>,
    pub ac: Vec<BranchTerm>,
    pub total: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeLambda {
    pub p: Path,
    pub q: Path,
    pub trajectory: Vec<C64>,
    pub hits: Vec<HitBreakdown>,
}

impl ThreeLambda {
    pub fn last(&self) -> C64 {
        *self.trajectory.last().expect("trajectory starts at λ = 1")
    }
}

/// Evolution of the tracked particle given A's path and the enumerated particle's path.
/// Index `t - 1` holds layer `t`: `pre` is after the single gate, `mid` additionally has
/// the B-C phase, and the A-coupling phase follows to close the layer.
struct Track {
    pre: Vec<[C64; 2]>,
    mid: Vec<[C64; 2]>,
}

fn track(c: &Circuit, branch: Branch, a: &Path, partner: &Path, upto: usize) -> Track {
    let target = branch.tracked();
    let other = branch.enumerated();
    let mut pre = Vec::with_capacity(upto);
    let mut mid = Vec::with_capacity(upto);
    let mut s = [ONE, ZERO];
    for t in 1..=upto {
        let layer = c.layer(t);
        let x = layer.single(target).apply(s);
        let mut w = x;
        if let Some(g) = layer.phase_between(target, other) {
            for (k, wk) in w.iter_mut().enumerate() {
                *wk *= cis(g.angle_for(target, k as u8, partner.mode(t)));
            }
        }
        s = w;
        if let Some(g) = layer.phase_between(0, target) {
            for (k, sk) in s.iter_mut().enumerate() {
                *sk *= cis(g.angle_for(0, a.mode(t), k as u8));
            }
        }
        pre.push(x);
        mid.push(w);
    }
    Track { pre, mid }
}

/// γ at layer `t`: A-coupling phase difference over the tracked mode.
fn gamma_at(
    layer: &Layer,
    branch: Branch,
    t: usize,
    p: &Path,
    q: &Path,
    tp: &Track,
    tq: &Track,
) -> C64 {
    let target = branch.tracked();
    let Some(g) = layer.phase_between(0, target) else {
        return ZERO;
    };
    let (wp, wq) = (tp.mid[t - 1], tq.mid[t - 1]);
    (0..2)
        .map(|k| {
            let d = g.angle_for(0, q.mode(t), k) - g.angle_for(0, p.mode(t), k);
            phase_excess(d) * wp[k as usize].conj() * wq[k as usize]
        })
        .sum()
}

/// χ at layer `t`: B-C phase difference between the two enumerated paths.
fn chi_at(
    layer: &Layer,
    branch: Branch,
    t: usize,
    first: &Path,
    second: &Path,
    tp: &Track,
    tq: &Track,
) -> C64 {
    let target = branch.tracked();
    let Some(g) = layer.phase_between(1, 2) else {
        return ZERO;
    };
    let (xp, xq) = (tp.pre[t - 1], tq.pre[t - 1]);
    (0..2)
        .map(|k| {
            let d = g.angle_for(target, k, second.mode(t)) - g.angle_for(target, k, first.mode(t));
            phase_excess(d) * xp[k as usize].conj() * xq[k as usize]
        })
        .sum()
}

fn sums(
    c: &Circuit,
    branch: Branch,
    r: usize,
    pq: (&Path, &Path),
    mn: (&Path, &Path),
    tracks: (&Track, &Track),
) -> (C64, C64) {
    let (p, q) = pq;
    let (m, n) = mn;
    let (tp, tq) = tracks;
    let mut gamma = ZERO;
    let mut chi = ZERO;
    for t in 1..=r {
        let layer = c.layer(t);
        if t <= branch.gamma_upto(r) {
            gamma += gamma_at(layer, branch, t, p, q, tp, tq);
        }
        chi += chi_at(layer, branch, t, m, n, tp, tq);
    }
    (gamma, chi)
}

/// Per enumerated path: amplitude over `r` layers, the A-coupling angle accumulated over
/// layers `< r`, and the tracked particle's conditioned evolution.
struct PartnerData {
    path: Path,
    amp: C64,
    angle: f64,
    track: Track,
}

fn partner_data(c: &Circuit, branch: Branch, a: &Path, r: usize, endpoint: u8) -> Vec<PartnerData> {
    let other = branch.enumerated();
    enumerate_paths(r, endpoint)
        .expect("r ≥ 1")
        .into_iter()
        .map(|m| {
            let mut angle = 0.0;
            for s in 1..r {
                if let Some(g) = c.layer(s).phase_between(0, other) {
                    angle += g.angle_for(0, a.mode(s), m.mode(s));
                }
            }
            PartnerData {
                path: m,
                amp: path_amplitude_unchecked(c, other, &m),
                angle,
                track: track(c, branch, a, &m, r),
            }
        })
        .collect()
}

/// Cached partner data for one A path: `layers[r-1][branch][endpoint]`, empty when the
/// branch gate is absent at that layer.
struct SideCache {
    layers: Vec<[[Vec<PartnerData>; 2]; 2]>,
}

fn side_cache(c: &Circuit, a: &Path) -> SideCache {
    let layers = (1..=c.depth())
        .map(|r| {
            [Branch::Ab, Branch::Ac].map(|b| {
                if c.layer(r).phase_between(0, b.enumerated()).is_some() {
                    [0u8, 1].map(|e| partner_data(c, b, a, r, e))
                } else {
                    [Vec::new(), Vec::new()]
                }
            })
        })
        .collect();
    SideCache { layers }
}

fn branch_index(b: Branch) -> usize {
    match b {
        Branch::Ab => 0,
        Branch::Ac => 1,
    }
}

fn branch_total(
    c: &Circuit,
    branch: Branch,
    r: usize,
    pq: (&Path, &Path),
    caches: (&SideCache, &SideCache),
    mut record: Option<&mut Vec<BranchTerm>>,
) -> C64 {
    let (p, q) = pq;
    let Some(g) = c.layer(r).phase_between(0, branch.enumerated()) else {
        return ZERO;
    };
    let bi = branch_index(branch);
    let mut total = ZERO;
    for endpoint in 0..2u8 {
        let d = g.angle_for(0, q.mode(r), endpoint) - g.angle_for(0, p.mode(r), endpoint);
        let excess = phase_excess(d);
        let side_p = &caches.0.layers[r - 1][bi][endpoint as usize];
        let side_q = &caches.1.layers[r - 1][bi][endpoint as usize];
        for dm in side_p {
            for dn in side_q {
                let delta = excess * dm.amp.conj() * dn.amp * cis(dn.angle - dm.angle);
                if delta == ZERO && record.is_none() {
                    continue;
                }
                let (gamma_sum, chi_sum) = sums(
                    c,
                    branch,
                    r,
                    (p, q),
                    (&dm.path, &dn.path),
                    (&dm.track, &dn.track),
                );
                let term = BranchTerm {
                    endpoint,
                    first: dm.path,
                    second: dn.path,
                    delta,
                    gamma_sum,
                    chi_sum,
                };
                total += term.contribution();
                if let Some(out) = record.as_deref_mut() {
                    out.push(term);
                }
            }
        }
    }
    total
}

fn require_three(c: &Circuit) -> Result<()> {
    if c.particles() == 3 {
        Ok(())
    } else {
        Err(Error::ParticleCount {
            expected: 3,
            found: c.particles(),
        })
    }
}

fn check_len(c: &Circuit, p: &Path) -> Result<()> {
    if p.len() == c.depth() {
        Ok(())
    } else {
        Err(Error::PathLength {
            expected: c.depth(),
            found: p.len(),
        })
    }
}

fn check_pair(c: &Circuit, p: &Path, q: &Path) -> Result<()> {
    require_three(c)?;
    check_len(c, p)?;
    check_len(c, q)?;
    if p.endpoint() != q.endpoint() {
        return Err(Error::EndpointMismatch(p.endpoint(), q.endpoint()));
    }
    Ok(())
}

fn check_layer(c: &Circuit, r: usize) -> Result<()> {
    if r == 0 || r > c.depth() {
        Err(Error::LayerOutOfRange {
            layer: r,
            layers: c.depth(),
        })
    } else {
        Ok(())
    }
}

/// Enumerated paths must share an endpoint and reach at least layer `r`.
fn check_partners(c: &Circuit, m: &Path, n: &Path, r: usize) -> Result<()> {
    if m.endpoint() != n.endpoint() {
        return Err(Error::EndpointMismatch(m.endpoint(), n.endpoint()));
    }
    for x in [m, n] {
        if x.len() < r || x.len() > c.depth() {
            return Err(Error::PathLength {
                expected: r,
                found: x.len(),
            });
        }
    }
    Ok(())
}

fn delta(
    c: &Circuit,
    branch: Branch,
    p: &Path,
    q: &Path,
    m: &Path,
    n: &Path,
    r: usize,
) -> Result<C64> {
    check_pair(c, p, q)?;
    check_layer(c, r)?;
    if m.len() != r || n.len() != r {
        return Err(Error::PathLength {
            expected: r,
            found: if m.len() != r { m.len() } else { n.len() },
        });
    }
    check_partners(c, m, n, r)?;
    let other = branch.enumerated();
    let Some(g) = c.layer(r).phase_between(0, other) else {
        return Ok(ZERO);
    };
    let k = m.endpoint();
    let excess = phase_excess(g.angle_for(0, q.mode(r), k) - g.angle_for(0, p.mode(r), k));
    let mut angle = 0.0;
    for s in 1..r {
        if let Some(h) = c.layer(s).phase_between(0, other) {
            angle += h.angle_for(0, q.mode(s), n.mode(s)) - h.angle_for(0, p.mode(s), m.mode(s));
        }
    }
    let am = path_amplitude_unchecked(c, other, m);
    let an = path_amplitude_unchecked(c, other, n);
    Ok(excess * am.conj() * an * cis(angle))
}

/// A-B branch weight for B paths `M`, `N` of length `r` ending in a common mode.
pub fn delta_ab(c: &Circuit, p: &Path, q: &Path, m: &Path, n: &Path, r: usize) -> Result<C64> {
    delta(c, Branch::Ab, p, q, m, n, r)
}

/// A-C branch weight for C paths `S`, `T` of length `r` ending in a common mode.
pub fn delta_ac(c: &Circuit, p: &Path, q: &Path, s: &Path, t: &Path, r: usize) -> Result<C64> {
    delta(c, Branch::Ac, p, q, s, t, r)
}

fn gamma_chi(
    c: &Circuit,
    branch: Branch,
    pq: (&Path, &Path),
    mn: (&Path, &Path),
    t: usize,
) -> Result<(C64, C64)> {
    let (p, q) = pq;
    let (m, n) = mn;
    check_pair(c, p, q)?;
    check_layer(c, t)?;
    check_partners(c, m, n, t)?;
    let tp = track(c, branch, p, m, t);
    let tq = track(c, branch, q, n, t);
    let layer = c.layer(t);
    Ok((
        gamma_at(layer, branch, t, p, q, &tp, &tq),
        chi_at(layer, branch, t, m, n, &tp, &tq),
    ))
}

/// `(γ, χ)` at layer `t` of B's evolution conditioned on `(P, S)` against `(Q, T)`.
pub fn gamma_chi_b(
    c: &Circuit,
    p: &Path,
    q: &Path,
    s: &Path,
    t_path: &Path,
    t: usize,
) -> Result<(C64, C64)> {
    gamma_chi(c, Branch::Ac, (p, q), (s, t_path), t)
}

/// `(γ, χ)` at layer `t` of C's evolution conditioned on `(P, M)` against `(Q, N)`.
pub fn gamma_chi_c(
    c: &Circuit,
    p: &Path,
    q: &Path,
    m: &Path,
    n: &Path,
    t: usize,
) -> Result<(C64, C64)> {
    gamma_chi(c, Branch::Ab, (p, q), (m, n), t)
}

/// `⟨0|X_{P,M}^{(s)†} X_{Q,N}^{(s)}|0⟩` for the single particle left over when A follows
/// `P`/`Q` and `partner` follows `M`/`N` (full-length paths).
pub fn conditioned_overlap(
    c: &Circuit,
    partner: usize,
    pq: (&Path, &Path),
    mn: (&Path, &Path),
    s: usize,
) -> Result<C64> {
    require_three(c)?;
    if partner != 1 && partner != 2 {
        return Err(Error::InvalidArgument(format!(
            "partner must be 1 or 2, got {partner}"
        )));
    }
    let up = condition_on_paths(c, &[0, partner], &[*pq.0, *mn.0])?.matrix_upto(s);
    let uq = condition_on_paths(c, &[0, partner], &[*pq.1, *mn.1])?.matrix_upto(s);
    Ok((up.adjoint() * uq)[(0, 0)])
}

fn hit_cached(
    c: &Circuit,
    pq: (&Path, &Path),
    caches: (&SideCache, &SideCache),
    r: usize,
    record: bool,
) -> HitBreakdown {
    let mut ab = Vec::new();
    let mut ac = Vec::new();
    let t_ab = branch_total(c, Branch::Ab, r, pq, caches, record.then_some(&mut ab));
    let t_ac = branch_total(c, Branch::Ac, r, pq, caches, record.then_some(&mut ac));
    HitBreakdown {
        layer: r,
        ab,
        ac,
        total: t_ab + t_ac,
    }
}

/// Both branches of the hit at layer `r`, with every term listed.
pub fn hit_three(c: &Circuit, p: &Path, q: &Path, r: usize) -> Result<HitBreakdown> {
    check_pair(c, p, q)?;
    check_layer(c, r)?;
    let (cp, cq) = (side_cache(c, p), side_cache(c, q));
    Ok(hit_cached(c, (p, q), (&cp, &cq), r, true))
}

fn trajectory(
    c: &Circuit,
    pq: (&Path, &Path),
    caches: (&SideCache, &SideCache),
    record: bool,
) -> (Vec<C64>, Vec<HitBreakdown>) {
    let mut lambda = ONE;
    let mut traj = vec![lambda];
    let mut hits = Vec::new();
    for r in 1..=c.depth() {
        let h = hit_cached(c, pq, caches, r, record);
        lambda += h.total;
        traj.push(lambda);
        hits.push(h);
    }
    (traj, hits)
}

/// λ trajectory of `(P, Q)` with the per-layer hit breakdowns.
pub fn lambda_three(c: &Circuit, p: &Path, q: &Path) -> Result<ThreeLambda> {
    check_pair(c, p, q)?;
    let (cp, cq) = (side_cache(c, p), side_cache(c, q));
    let (trajectory, hits) = trajectory(c, (p, q), (&cp, &cq), true);
    Ok(ThreeLambda {
        p: *p,
        q: *q,
        trajectory,
        hits,
    })
}

/// λ for every ordered pair of paths to `endpoint` (including `P = Q`), in
/// lexicographic pair order. Hit totals are kept; branch term lists are left empty.
pub fn lambda_three_table(
    c: &Circuit,
    endpoint: u8,
    budget: PathBudget,
) -> Result<Vec<ThreeLambda>> {
    require_three(c)?;
    let n = c.depth();
    budget.check(budget_bits(n))?;
    let paths = enumerate_paths(n, endpoint)?;
    let caches: Vec<SideCache> = paths.par_iter().map(|p| side_cache(c, p)).collect();
    let pairs: Vec<(usize, usize)> = (0..paths.len())
        .flat_map(|i| (0..paths.len()).map(move |k| (i, k)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(i, k)| {
            let (trajectory, hits) =
                trajectory(c, (&paths[i], &paths[k]), (&caches[i], &caches[k]), false);
            ThreeLambda {
                p: paths[i],
                q: paths[k],
                trajectory,
                hits,
            }
        })
        .collect())
}

/// `⟨0|𝕌_P^{(n)†} 𝕌_Q^{(n)}|0⟩` for the two-particle external system.
pub fn lambda_three_direct(c: &Circuit, p: &Path, q: &Path) -> Result<C64> {
    check_pair(c, p, q)?;
    let up = condition_on_paths(c, &[0], &[*p])?.matrix_upto(c.depth());
    let uq = condition_on_paths(c, &[0], &[*q])?.matrix_upto(c.depth());
    Ok((up.adjoint() * uq)[(0, 0)])
}

fn budget_bits(n: usize) -> u128 {
    pow2(4 * n.saturating_sub(1) + 1)
}

/// `P(A = j)` from path weights and λ built from the branch decomposition.
pub fn marginal_three(c: &Circuit, j: u8, budget: PathBudget) -> Result<f64> {
    require_three(c)?;
    if j > 1 {
        return Err(Error::InvalidMode(j));
    }
    let n = c.depth();
    if n == 0 {
        return Ok(if j == 0 { 1.0 } else { 0.0 });
    }
    budget.check(budget_bits(n))?;
    let paths = enumerate_paths(n, j)?;
    let amps: Vec<C64> = paths
        .iter()
        .map(|p| path_amplitude_unchecked(c, 0, p))
        .collect();
    let caches: Vec<SideCache> = paths.par_iter().map(|p| side_cache(c, p)).collect();
    let terms: Vec<C64> = ordered_pairs(paths.len())
        .par_iter()
        .map(|&(i, k)| {
            let w = amps[i].conj() * amps[k];
            if w == ZERO {
                return ZERO;
            }
            let (traj, _) = trajectory(c, (&paths[i], &paths[k]), (&caches[i], &caches[k]), false);
            w * traj[n]
        })
        .collect();
    let cross: C64 = terms.into_iter().fold(ZERO, |acc, x| acc + x);
    if cross.im.abs() > RESIDUE_TOL {
        return Err(Error::NonRealResidue { residue: cross.im });
    }
    let diagonal: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok(diagonal + cross.re)
}

pub fn distribution_three(c: &Circuit, budget: PathBudget) -> Result<Distribution> {
    let probs = (0..2u8)
        .map(|j| marginal_three(c, j, budget))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Distribution::new(vec![0], probs))
}

/// Drops a final layer that touches only B and C.
pub fn remove_trailing_external_gate(c: &Circuit) -> Result<Circuit> {
    let n = c.depth();
    if n == 0 {
        return Err(Error::ZeroLayers);
    }
    let last = c.layer(n);
    if last.couples(0) {
        return Err(Error::Precondition(format!(
            "layer {n} has a phase gate on particle 0"
        )));
    }
    if !last.single(0).is_identity(0.0) {
        return Err(Error::Precondition(format!(
            "layer {n} has a non-identity single gate on particle 0"
        )));
    }
    c.truncated(n - 1)
}
