//! JSON circuit files.
//!
//! ```json
//! {"particles": 2,
//!  "layers": [{"singles": {"0": [[[re, im], [re, im]], [[re, im], [re, im]]]},
//!              "phases": [{"pair": [0, 1], "theta": [t1, t2, t3, t4]}]}]}
//! ```
//!
//! Unknown keys are rejected. Writing a parsed file back out reproduces it byte for byte
//! when it was written by [`Circuit::to_json`] in the first place.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Circuit, Layer, PhaseGate, SingleGate};
use crate::error::{Error, Result};

type RawMatrix = [[[f64; 2]; 2]; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCircuit {
    pub particles: usize,
    pub layers: Vec<RawLayer>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLayer {
    #[serde(default)]
    pub singles: BTreeMap<usize, RawMatrix>,
    #[serde(default)]
    pub phases: Vec<RawPhase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPhase {
    pub pair: [usize; 2],
    pub theta: [f64; 4],
}

impl RawCircuit {
    pub fn validate(&self) -> Result<Circuit> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (idx, raw) in self.layers.iter().enumerate() {
            let mut layer = Layer::new();
            for (&p, m) in &raw.singles {
                if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite {
                        layer: idx + 1,
                        what: format!("single gate on particle {p}"),
                    });
                }
                let entry = |r: usize, c: usize| C64::new(m[r][c][0], m[r][c][1]);
                let gate = SingleGate::new_unchecked([
                    [entry(0, 0), entry(0, 1)],
                    [entry(1, 0), entry(1, 1)],
                ]);
                layer = layer.with_single(p, gate);
            }
            for ph in &raw.phases {
                let gate =
                    PhaseGate::new(ph.pair[0], ph.pair[1], ph.theta).map_err(|e| match e {
                        Error::NonFinite { what, .. } => Error::NonFinite {
                            layer: idx + 1,
                            what,
                        },
                        other => other,
                    })?;
                layer = layer.with_phase(gate);
            }
            layers.push(layer);
        }
        Circuit::new(self.particles, layers)
    }
}

impl From<&Circuit> for RawCircuit {
    fn from(c: &Circuit) -> Self {
        let layers = c
            .layers()
            .iter()
            .map(|layer| RawLayer {
                singles: layer
                    .explicit_singles()
                    .map(|(p, g)| {
                        let m = g.matrix();
                        let e = |r: usize, col: usize| [m[r][col].re, m[r][col].im];
                        (p, [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
                    })
                    .collect(),
                phases: layer
                    .phases()
                    .iter()
                    .map(|g| {
                        let (a, b) = g.pair();
                        RawPhase {
                            pair: [a, b],
                            theta: g.thetas(),
                        }
                    })
                    .collect(),
            })
            .collect();
        RawCircuit {
            particles: c.particles(),
            layers,
        }
    }
}

impl Circuit {
    pub fn from_json(text: &str) -> Result<Circuit> {
        let raw: RawCircuit = serde_json::from_str(text)?;
        raw.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Circuit> {
        Circuit::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical pretty-printed JSON, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&RawCircuit::from(self))
            .expect("circuit serialization is infallible");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
