//! λ trajectories of a single path pair, with hits per layer and a direct cross-check.

use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use super::report::{complex, complexes, finish, render_csv};
use super::{lambda_route, relabel_first};
use crate::budget::{pow2, PathBudget};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::lambda_three::{self, BranchTerm};
use crate::lambda_two;
use crate::paths::{enumerate_paths, Path};
use crate::subsystem::{enumerate_config_paths, lambda_general, lambda_general_trace};

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub route: &'static str,
    pub subsystem: Vec<usize>,
    pub endpoints: Vec<u8>,
    pub p: String,
    pub q: String,
    /// `trajectory[t]` is λ after layer `t`.
    pub trajectory: Vec<C64>,
    /// `hits[t - 1]` is the increment at layer `t`.
    pub hits: Vec<C64>,
    /// λ from the conditioned external evolutions.
    pub direct: C64,
    /// Branch breakdown for three-particle circuits.
    pub breakdown: Option<Value>,
}

impl Trace {
    pub fn closure_error(&self) -> f64 {
        (self
            .trajectory
            .last()
            .copied()
            .unwrap_or(C64::new(1.0, 0.0))
            - self.direct)
            .norm()
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "route": self.route,
            "subsystem": self.subsystem,
            "endpoint": self.endpoints.iter().map(|m| m.to_string()).collect::<String>(),
            "p": self.p,
            "q": self.q,
            "trajectory": complexes(&self.trajectory),
            "hits": complexes(&self.hits),
            "direct": complex(self.direct),
            "closure_error": self.closure_error(),
        });
        if let Some(b) = &self.breakdown {
            body["breakdown"] = b.clone();
        }
        finish("trace", body)
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .trajectory
            .iter()
            .enumerate()
            .map(|(t, l)| {
                let h = if t == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    self.hits[t - 1]
                };
                vec![
                    t.to_string(),
                    h.re.to_string(),
                    h.im.to_string(),
                    l.re.to_string(),
                    l.im.to_string(),
                ]
            })
            .collect();
        render_csv(
            &["layer", "hit_re", "hit_im", "lambda_re", "lambda_im"],
            &rows,
        )
    }
}

/// Parses `"0101"` into modes.
pub fn parse_modes(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidArgument(format!("bad mode string {s:?}"))),
        })
        .collect()
}

/// Parses `"i,j"` into a pair of path indices.
pub fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("bad pair {s:?}, expected i,j"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn pick<T: Clone>(items: &[T], pair: (usize, usize)) -> Result<(T, T)> {
    let get = |i: usize| {
        items.get(i).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "path index {i} out of range (have {})",
                items.len()
            ))
        })
    };
    Ok((get(pair.0)?, get(pair.1)?))
}

fn branch_json(terms: &[BranchTerm]) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|b| {
                json!({
                    "endpoint": b.endpoint,
                    "first": b.first.bitstring(),
                    "second": b.second.bitstring(),
                    "delta": complex(b.delta),
                    "gamma_sum": complex(b.gamma_sum),
                    "chi_sum": complex(b.chi_sum),
                    "contribution": complex(b.contribution()),
                })
            })
            .collect(),
    )
}

/// Traces λ for path pair `pair` (indices into the lexicographic list of paths, or of
/// configuration paths, ending at `endpoints`). `endpoints` defaults to all zeros.
pub fn trace(
    c: &Circuit,
    subsystem: &[usize],
    endpoints: Option<&[u8]>,
    pair: (usize, usize),
    budget: PathBudget,
) -> Result<Trace> {
    let s = c.normalize_subsystem(subsystem, true)?;
    let n = c.depth();
    if n == 0 {
        return Err(Error::ZeroLayers);
    }
    let endpoints = match endpoints {
        Some(e) => e.to_vec(),
        None => vec![0; s.len()],
    };
    if endpoints.len() != s.len() {
        return Err(Error::ParticleCount {
            expected: s.len(),
            found: endpoints.len(),
        });
    }
    if let Some(&m) = endpoints.iter().find(|&&m| m > 1) {
        return Err(Error::InvalidMode(m));
    }
    budget.check(pow2(s.len() * (n - 1)))?;
    let route = lambda_route(c, &s);
    let trace = match route {
        "lambda_two" | "lambda_three" => {
            let rc = relabel_first(c, s[0])?;
            let paths: Vec<Path> = enumerate_paths(n, endpoints[0])?;
            let (p, q) = pick(&paths, pair)?;
            let (trajectory, hits, direct, breakdown) = if route == "lambda_two" {
                let e = lambda_two::lambda_accumulate(&rc, &p, &q)?;
                let hits = e.hits.iter().map(|h| h.value).collect();
                (
                    e.trajectory,
                    hits,
                    lambda_two::lambda_direct(&rc, &p, &q)?,
                    None,
                )
            } else {
                let e = lambda_three::lambda_three(&rc, &p, &q)?;
                let hits = e.hits.iter().map(|h| h.total).collect();
                let layers: Vec<Value> = e
                    .hits
                    .iter()
                    .map(|h| {
                        json!({
                            "layer": h.layer,
                            "ab": branch_json(&h.ab),
                            "ac": branch_json(&h.ac),
                            "total": complex(h.total),
                        })
                    })
                    .collect();
                let partners: Vec<usize> = (0..3).filter(|&x| x != s[0]).collect();
                let breakdown = json!({
                    "partners": {"b": partners[0], "c": partners[1]},
                    "sum_ranges": {
                        "ab": {"gamma": "t <= r - 1", "chi": "t <= r"},
                        "ac": {"gamma": "t <= r", "chi": "t <= r"},
                    },
                    "layers": layers,
                });
                let direct = lambda_three::lambda_three_direct(&rc, &p, &q)?;
                (e.trajectory, hits, direct, Some(breakdown))
            };
            Trace {
                route,
                subsystem: s,
                endpoints,
                p: p.bitstring(),
                q: q.bitstring(),
                trajectory,
                hits,
                direct,
                breakdown,
            }
        }
        _ => {
            let configs = enumerate_config_paths(n, &endpoints)?;
            let (p, q) = pick(&configs, pair)?;
            let g = lambda_general_trace(c, &s, &p, &q)?;
            let direct = lambda_general(c, &s, &p, &q)?;
            Trace {
                route,
                subsystem: s,
                endpoints,
                p: p.label(),
                q: q.label(),
                trajectory: g.trajectory,
                hits: g.increments,
                direct,
                breakdown: None,
            }
        }
    };
    Ok(trace)
}
