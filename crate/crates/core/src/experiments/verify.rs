//! Runs every invariant that applies to a circuit and collects the results.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use super::report::{finish, render_csv};
use super::{lambda_marginal, pathsum_marginal, relabel_first, Options};
use crate::circuit::random::{random_external_layer, rng_for};
use crate::circuit::Circuit;
use crate::density::{
    advance_joint, density_trajectory, hit_direct_amplitude, hit_offdiagonal,
    hit_pathsum_amplitude, initial_joint, normalize_phase_gates,
};
use crate::error::{Error, Result};
use crate::oracle::{
    basis_modes, evolve_with_limit, joint_distribution_with_limit, marginal_by_sum_with_limit,
};
use crate::paths::{amplitude_via_paths, condition_on_paths, Path};
use crate::subsystem::{distribution_general, marginal_general_with, Bookkeeping};
use crate::{lambda_three, lambda_two};

/// Seed for the external layer appended by the no-signaling check.
const NO_SIGNALING_SEED: u64 = 0x6e6f_7369;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `None` when the check could not produce a finite error.
    pub max_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub circuit_digest: String,
    pub particles: usize,
    pub layers: usize,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn body(&self) -> Value {
        json!({
            "circuit": self.circuit_digest,
            "particles": self.particles,
            "layers": self.layers,
            "checks": self.checks,
            "pass": self.pass(),
        })
    }

    pub fn to_json(&self) -> Value {
        finish("verify", self.body())
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.max_error.map_or_else(|| "".into(), |e| e.to_string()),
                    c.tolerance.to_string(),
                    c.pass.to_string(),
                    c.note.clone().unwrap_or_default(),
                ]
            })
            .collect();
        render_csv(&["name", "max_error", "tolerance", "pass", "note"], &rows)
    }
}

struct Runner {
    timing: bool,
    checks: Vec<Check>,
}

impl Runner {
    fn record(&mut self, name: &str, tolerance: f64, result: &Result<f64>, millis: f64) {
        let (max_error, pass, note) = match result {
            Ok(e) if e.is_finite() && *e >= 0.0 => (Some(*e), *e <= tolerance, None),
            Ok(e) => (None, false, Some(format!("non-finite error {e}"))),
            Err(Error::BudgetExceeded { required, budget }) => (
                None,
                true,
                Some(format!(
                    "skipped: needs {required} path combinations, budget {budget}"
                )),
            ),
            Err(e) => (None, false, Some(e.to_string())),
        };
        self.checks.push(Check {
            name: name.to_string(),
            max_error,
            tolerance,
            pass,
            note,
            millis: self.timing.then_some(millis),
        });
    }

    fn run(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) {
        let start = Instant::now();
        let result = f();
        self.record(name, tolerance, &result, elapsed_ms(start));
    }

    /// Several checks computed together; `names[i]` receives `f()[i]`.
    fn run_group<const K: usize>(
        &mut self,
        names: [(&str, f64); K],
        f: impl FnOnce() -> Result<[f64; K]>,
    ) {
        let start = Instant::now();
        let result = f();
        let ms = elapsed_ms(start);
        for (i, (name, tol)) in names.into_iter().enumerate() {
            let r = match &result {
                Ok(v) => Ok(v[i]),
                Err(Error::BudgetExceeded { required, budget }) => Err(Error::BudgetExceeded {
                    required: *required,
                    budget: *budget,
                }),
                Err(e) => Err(Error::Precondition(e.to_string())),
            };
            self.record(name, tol, &r, ms);
        }
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, x| if x.is_nan() { f64::NAN } else { acc.max(x) })
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Runs every applicable check. Only a particle count above the oracle limit is an
/// error; everything else is reported per check.
pub fn verify_circuit(c: &Circuit, opts: &Options) -> Result<VerificationReport> {
    let np = c.particles();
    if np > opts.max_particles {
        return Err(Error::TooManyParticles {
            particles: np,
            limit: opts.max_particles,
        });
    }
    let tol = opts.tol;
    let mut r = Runner {
        timing: opts.timing,
        checks: Vec::new(),
    };
    let oracle = |s: &[usize]| marginal_by_sum_with_limit(c, s, opts.max_particles);

    r.run("joint_normalization", tol, || {
        Ok((joint_distribution_with_limit(c, opts.max_particles)?.total() - 1.0).abs())
    });
    r.run("path_sum_completeness", 1e-10, || {
        let state = evolve_with_limit(c, c.depth(), opts.max_particles)?;
        let mut worst = 0.0f64;
        for idx in 0..1usize << np {
            let a = amplitude_via_paths(c, &basis_modes(idx, np), opts.budget)?;
            worst = worst.max((a - state.amplitudes()[idx]).norm());
        }
        Ok(worst)
    });
    r.run("pathsum_vs_oracle", tol, || {
        let mut worst = 0.0f64;
        for p in 0..np {
            worst = worst.max(pathsum_marginal(c, &[p], opts)?.max_abs_diff(&oracle(&[p])?));
        }
        Ok(worst)
    });
    if np >= 2 {
        r.run_group(
            [("lambda_vs_oracle", tol), ("lambda_normalization", tol)],
            || {
                let mut diff = 0.0f64;
                let mut norm = 0.0f64;
                for p in 0..np {
                    let d = lambda_marginal(c, &[p], opts.budget)?;
                    diff = diff.max(d.max_abs_diff(&oracle(&[p])?));
                    norm = norm.max((d.total() - 1.0).abs());
                }
                Ok([diff, norm])
            },
        );
    }
    if np == 2 || np == 3 {
        r.run("general_vs_specialized", 1e-10, || {
            let mut worst = 0.0f64;
            for p in 0..np {
                let g = distribution_general(c, &[p], opts.budget)?;
                worst = worst.max(g.max_abs_diff(&lambda_marginal(c, &[p], opts.budget)?));
            }
            Ok(worst)
        });
    }
    if np >= 3 {
        let pairs: Vec<[usize; 2]> = (0..np)
            .flat_map(|a| (a + 1..np).map(move |b| [a, b]))
            .collect();
        r.run("general_pairs_vs_oracle", tol, || {
            let mut worst = 0.0f64;
            for s in &pairs {
                worst =
                    worst.max(distribution_general(c, s, opts.budget)?.max_abs_diff(&oracle(s)?));
            }
            Ok(worst)
        });
        r.run("bookkeeping_agreement", 1e-12, || {
            let mut worst = 0.0f64;
            for s in &pairs {
                for idx in 0..4 {
                    let o = basis_modes(idx, 2);
                    let a = marginal_general_with(c, s, &o, opts.budget, Bookkeeping::Amplitude)?;
                    let b = marginal_general_with(c, s, &o, opts.budget, Bookkeeping::Lambda)?;
                    worst = worst.max((a - b).abs());
                }
            }
            Ok(worst)
        });
    }
    match np {
        2 => two_particle_checks(c, opts, &mut r),
        3 => three_particle_checks(c, opts, &mut r),
        _ => {}
    }
    Ok(VerificationReport {
        circuit_digest: c.digest(),
        particles: np,
        layers: c.depth(),
        checks: r.checks,
    })
}

fn prefix_states(c: &Circuit, p: &Path) -> Result<Vec<Vec<C64>>> {
    let u = condition_on_paths(c, &[0], &[*p])?;
    let mut v = vec![C64::new(0.0, 0.0); u.dimension()];
    v[0] = C64::new(1.0, 0.0);
    let mut out = vec![v.clone()];
    for t in 1..=c.depth() {
        u.apply_layer(t, &mut v);
        out.push(v.clone());
    }
    Ok(out)
}

fn two_particle_checks(c: &Circuit, opts: &Options, r: &mut Runner) {
    r.run_group(
        [
            ("deviation_form", 1e-10),
            ("telescoping", 1e-10),
            ("zero_hit_layers", 0.0),
            ("hermitian_pairing", 1e-12),
            ("lambda_bound", 1e-10),
        ],
        || {
            let mut out = [0.0f64; 5];
            for particle in 0..2 {
                let rc = relabel_first(c, particle)?;
                let n = rc.depth();
                for j in 0..2u8 {
                    let terms = lambda_two::marginal_terms(&rc, j, opts.budget)?;
                    out[0] = out[0].max((terms.value() - terms.deviation_value()).abs());
                    if n == 0 {
                        continue;
                    }
                    let table = lambda_two::lambda_table(&rc, j, opts.budget)?;
                    let states: Vec<Vec<Vec<C64>>> = table
                        .paths
                        .iter()
                        .map(|p| prefix_states(&rc, p))
                        .collect::<Result<_>>()?;
                    let index: HashMap<Path, usize> = table
                        .paths
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (*p, i))
                        .collect();
                    let finals: HashMap<(Path, Path), C64> = table
                        .entries
                        .iter()
                        .map(|e| ((e.p, e.q), e.last()))
                        .collect();
                    for e in &table.entries {
                        let (sp, sq) = (&states[index[&e.p]], &states[index[&e.q]]);
                        for s in 0..=n {
                            out[1] = out[1].max((e.trajectory[s] - inner(&sp[s], &sq[s])).norm());
                            out[4] = out[4].max(e.trajectory[s].norm() - 1.0);
                        }
                        for h in &e.hits {
                            if rc.layer(h.layer).phase_between(0, 1).is_none() {
                                out[2] = out[2].max(h.value.norm());
                            }
                        }
                        out[3] = out[3].max((e.last() - finals[&(e.q, e.p)].conj()).norm());
                    }
                }
            }
            Ok(out)
        },
    );
    r.run_group(
        [
            ("density_reconstruction", 1e-10),
            ("density_hit_diagonal", 1e-12),
            ("density_offdiagonal_form", 1e-12),
            ("density_pathsum_amplitude", 1e-10),
        ],
        || {
            let mut out = [0.0f64; 4];
            for particle in 0..2 {
                let rc = relabel_first(c, particle)?;
                let normalized = normalize_phase_gates(&rc)?;
                let mut joint = initial_joint();
                for rec in density_trajectory(&rc)? {
                    let t = rec.pair.layer;
                    out[0] = out[0].max(rec.frobenius_error);
                    out[1] = out[1]
                        .max(rec.pair.hit[(0, 0)].norm())
                        .max(rec.pair.hit[(1, 1)].norm());
                    let off = hit_offdiagonal(&normalized, t, &joint)?;
                    out[2] = out[2].max((off - rec.pair.hit).norm());
                    let a = hit_pathsum_amplitude(&normalized, t, opts.budget)?;
                    let b = hit_direct_amplitude(&normalized, t)?;
                    out[3] = out[3].max((a - b).norm());
                    joint = advance_joint(&normalized, t, &joint)?;
                }
            }
            Ok(out)
        },
    );
}

fn three_particle_checks(c: &Circuit, opts: &Options, r: &mut Runner) {
    r.run_group(
        [
            ("lambda_three_closure", opts.tol),
            ("zero_hit_layers", 0.0),
            ("hermitian_pairing", 1e-12),
            ("lambda_bound", 1e-10),
        ],
        || {
            let mut out = [0.0f64; 4];
            for particle in 0..3 {
                let rc = relabel_first(c, particle)?;
                let n = rc.depth();
                if n == 0 {
                    continue;
                }
                for j in 0..2u8 {
                    let table = lambda_three::lambda_three_table(&rc, j, opts.budget)?;
                    let paths = crate::paths::enumerate_paths(n, j)?;
                    let states: Vec<Vec<C64>> = paths
                        .iter()
                        .map(|p| Ok(condition_on_paths(&rc, &[0], &[*p])?.state_upto(n)))
                        .collect::<Result<_>>()?;
                    let len = paths.len();
                    for (idx, e) in table.iter().enumerate() {
                        let (i, k) = (idx / len, idx % len);
                        out[0] = out[0].max((e.last() - inner(&states[i], &states[k])).norm());
                        for h in &e.hits {
                            if !rc.layer(h.layer).couples(0) {
                                out[1] = out[1].max(h.total.norm());
                            }
                        }
                        out[2] = out[2].max((e.last() - table[k * len + i].last().conj()).norm());
                        out[3] = out[3].max(max_of(e.trajectory.iter().map(|l| l.norm() - 1.0)));
                    }
                }
            }
            Ok(out)
        },
    );
    r.run_group(
        [
            ("no_signaling_oracle", 1e-12),
            ("no_signaling_lambda", 1e-12),
        ],
        || {
            let mut out = [0.0f64; 2];
            for particle in 0..3 {
                let rc = relabel_first(c, particle)?;
                let mut rng = rng_for(NO_SIGNALING_SEED + particle as u64);
                let extended = rc.with_layer(random_external_layer(&mut rng, 3, 0))?;
                let before = marginal_by_sum_with_limit(&rc, &[0], opts.max_particles)?;
                let after = marginal_by_sum_with_limit(&extended, &[0], opts.max_particles)?;
                out[0] = out[0].max(before.max_abs_diff(&after));
                let before = lambda_three::distribution_three(&rc, opts.budget)?;
                let after = lambda_three::distribution_three(&extended, opts.budget)?;
                out[1] = out[1].max(before.max_abs_diff(&after));
            }
            Ok(out)
        },
    );
}
