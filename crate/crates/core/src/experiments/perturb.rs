//! Marginals with every cross-pair λ capped in magnitude, compared with the oracle.

use serde_json::{json, Value};

use super::report::{finish, real, render_csv};
use super::Options;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::oracle::{basis_modes, marginal_by_sum_with_limit, Distribution};
use crate::subsystem::marginal_general_clamped;

/// Parses a clamp: a non-negative real or `inf`.
pub fn parse_clamp(s: &str) -> Result<f64> {
    let c: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad clamp {s:?}")))?;
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "clamp must be ≥ 0, got {s}"
        )));
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbReport {
    pub subsystem: Vec<usize>,
    pub clamp: f64,
    /// Clamped pair sums per outcome, before renormalization.
    pub raw: Vec<f64>,
    pub raw_total: f64,
    /// Factor the raw values were multiplied by.
    pub factor: f64,
    pub renormalized: Distribution,
    pub oracle: Distribution,
}

impl PerturbReport {
    pub fn deviations(&self) -> Vec<f64> {
        self.renormalized
            .probabilities()
            .iter()
            .zip(self.oracle.probabilities())
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations().iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn to_json(&self) -> Value {
        let outcomes: Vec<Value> = (0..self.raw.len())
            .map(|idx| {
                json!({
                    "outcome": self.renormalized.label(idx),
                    "raw": self.raw[idx],
                    "renormalized": self.renormalized.probabilities()[idx],
                    "oracle": self.oracle.probabilities()[idx],
                    "deviation": self.deviations()[idx],
                })
            })
            .collect();
        finish(
            "perturb",
            json!({
                "subsystem": self.subsystem,
                "clamp": real(self.clamp),
                "raw_total": self.raw_total,
                "renormalization_factor": self.factor,
                "outcomes": outcomes,
                "max_deviation": self.max_deviation(),
            }),
        )
    }

    pub fn to_csv(&self) -> String {
        let dev = self.deviations();
        let rows: Vec<Vec<String>> = (0..self.raw.len())
            .map(|idx| {
                vec![
                    self.renormalized.label(idx),
                    self.raw[idx].to_string(),
                    self.renormalized.probabilities()[idx].to_string(),
                    self.oracle.probabilities()[idx].to_string(),
                    dev[idx].to_string(),
                ]
            })
            .collect();
        render_csv(
            &["outcome", "raw", "renormalized", "oracle", "deviation"],
            &rows,
        )
    }
}

pub fn perturb(
    c: &Circuit,
    subsystem: &[usize],
    clamp: f64,
    opts: &Options,
) -> Result<PerturbReport> {
    if clamp.is_nan() || clamp < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "clamp must be ≥ 0, got {clamp}"
        )));
    }
    let s = c.normalize_subsystem(subsystem, true)?;
    let oracle = marginal_by_sum_with_limit(c, &s, opts.max_particles)?;
    let raw = (0..1usize << s.len())
        .map(|idx| marginal_general_clamped(c, &s, &basis_modes(idx, s.len()), opts.budget, clamp))
        .collect::<Result<Vec<f64>>>()?;
    let raw_total: f64 = raw.iter().sum();
    if raw_total.is_nan() || raw_total <= 0.0 {
        return Err(Error::Precondition(format!(
            "clamped total {raw_total} cannot be renormalized"
        )));
    }
    let factor = 1.0 / raw_total;
    let renormalized = Distribution::new(s.clone(), raw.iter().map(|p| p * factor).collect());
    Ok(PerturbReport {
        subsystem: s,
        clamp,
        raw,
        raw_total,
        factor,
        renormalized,
        oracle,
    })
}
