//! The EPR-B demonstration: Bell pair, local measurement rotations, uniform marginals and
//! a cross-pair λ that is switched off by the entangling hit.

use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use super::report::{complex, complexes, distribution, finish};
use super::verify::Check;
use super::{marginal, Method, Options};
use crate::circuit::random::{random_unitary, rng_for};
use crate::circuit::{build_epr_circuit, SingleGate};
use crate::error::{Error, Result};
use crate::lambda_two::{lambda_accumulate, lambda_direct};
use crate::oracle::Distribution;
use crate::paths::Path;

pub const MARGINAL_TOL: f64 = 1e-10;
pub const LAMBDA_TOL: f64 = 1e-12;

/// Parses a gate spec: `I`, `H`, `X`, `Z`, `rot:θ` (or a bare angle), `phase:α`, or a
/// JSON matrix `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
pub fn parse_gate(spec: &str) -> Result<SingleGate> {
    let spec = spec.trim();
    let angle = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidArgument(format!("bad angle in gate spec {spec:?}")))
    };
    match spec {
        "I" | "i" => return Ok(SingleGate::identity()),
        "H" | "h" => return Ok(SingleGate::hadamard()),
        "X" | "x" => return Ok(SingleGate::pauli_x()),
        "Z" | "z" => return Ok(SingleGate::z_phase(std::f64::consts::PI)),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("rot:") {
        return Ok(SingleGate::rotation(angle(rest)?));
    }
    if let Some(rest) = spec.strip_prefix("phase:") {
        return Ok(SingleGate::z_phase(angle(rest)?));
    }
    if spec.starts_with('[') {
        let m: [[[f64; 2]; 2]; 2] = serde_json::from_str(spec)
            .map_err(|e| Error::InvalidArgument(format!("bad gate matrix: {e}")))?;
        return SingleGate::new(std::array::from_fn(|r| {
            std::array::from_fn(|c| C64::new(m[r][c][0], m[r][c][1]))
        }));
    }
    Ok(SingleGate::rotation(angle(spec)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossPair {
    pub endpoint: u8,
    pub trajectory: Vec<C64>,
    pub hits: Vec<C64>,
    pub direct: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EprReport {
    pub a2: SingleGate,
    pub b2: SingleGate,
    pub marginals: Vec<(Method, Distribution)>,
    pub cross: Vec<CrossPair>,
    pub checks: Vec<Check>,
}

impl EprReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn body(&self) -> Value {
        let gate = |g: &SingleGate| {
            Value::Array(
                g.matrix()
                    .iter()
                    .map(|row| Value::Array(row.iter().map(|z| complex(*z)).collect()))
                    .collect(),
            )
        };
        let marginals: serde_json::Map<String, Value> = self
            .marginals
            .iter()
            .map(|(m, d)| (m.to_string(), distribution(d)))
            .collect();
        let cross: Vec<Value> = self
            .cross
            .iter()
            .map(|c| {
                json!({
                    "endpoint": c.endpoint,
                    "p": format!("0{}", c.endpoint),
                    "q": format!("1{}", c.endpoint),
                    "trajectory": complexes(&c.trajectory),
                    "hits": complexes(&c.hits),
                    "direct": complex(c.direct),
                })
            })
            .collect();
        json!({
            "a2": gate(&self.a2),
            "b2": gate(&self.b2),
            "marginals": marginals,
            "cross_pair": cross,
            "checks": self.checks,
            "pass": self.pass(),
        })
    }

    pub fn to_json(&self) -> Value {
        finish("epr", self.body())
    }
}

fn check(name: &str, max_error: f64, tolerance: f64) -> Check {
    Check {
        name: name.to_string(),
        max_error: Some(max_error),
        tolerance,
        pass: max_error <= tolerance,
        note: None,
        millis: None,
    }
}

pub fn run_epr(a2: SingleGate, b2: SingleGate, opts: &Options) -> Result<EprReport> {
    let c = build_epr_circuit(a2, b2)?;
    let mut marginals = Vec::new();
    let mut marginal_err = 0.0f64;
    for m in Method::ALL {
        let d = marginal(&c, &[0], m, opts)?;
        for &p in d.probabilities() {
            marginal_err = marginal_err.max((p - 0.5).abs());
        }
        marginals.push((m, d));
    }
    let mut cross = Vec::new();
    let (mut lambda_err, mut hit_err) = (0.0f64, 0.0f64);
    for j in 0..2u8 {
        let p = Path::from_modes(&[0, j])?;
        let q = Path::from_modes(&[1, j])?;
        let e = lambda_accumulate(&c, &p, &q)?;
        let direct = lambda_direct(&c, &p, &q)?;
        lambda_err = lambda_err.max(e.last().norm()).max(direct.norm());
        let hits: Vec<C64> = e.hits.iter().map(|h| h.value).collect();
        hit_err = hit_err
            .max((hits[0] - C64::new(-1.0, 0.0)).norm())
            .max(hits[1].norm());
        cross.push(CrossPair {
            endpoint: j,
            trajectory: e.trajectory,
            hits,
            direct,
        });
    }
    Ok(EprReport {
        a2,
        b2,
        marginals,
        cross,
        checks: vec![
            check("uniform_marginal", marginal_err, MARGINAL_TOL),
            check("cross_lambda_vanishes", lambda_err, LAMBDA_TOL),
            check("hit_trajectory", hit_err, LAMBDA_TOL),
        ],
    })
}

/// `count` demos with measurement unitaries drawn from `seed`.
pub fn sweep(seed: u64, count: usize, opts: &Options) -> Result<Vec<EprReport>> {
    let mut rng = rng_for(seed);
    (0..count)
        .map(|_| {
            let a2 = random_unitary(&mut rng);
            let b2 = random_unitary(&mut rng);
            run_epr(a2, b2, opts)
        })
        .collect()
}

pub fn sweep_json(reports: &[EprReport], seed: u64) -> Value {
    finish(
        "epr",
        json!({
            "seed": seed,
            "runs": reports.iter().map(EprReport::body).collect::<Vec<_>>(),
            "pass": reports.iter().all(EprReport::pass),
        }),
    )
}
