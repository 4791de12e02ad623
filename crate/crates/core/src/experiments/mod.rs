//! The operations behind the `sumpaths` command-line tool: marginals by several methods,
//! λ traces, verification reports, the EPR demo, the λ clamp probe and corpus tooling.

pub mod corpus;
pub mod epr;
pub mod perturb;
pub mod report;
pub mod trace;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::budget::{pow2, PathBudget};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::oracle::{
    basis_modes, marginal_by_sum_with_limit, project_index, Distribution, DEFAULT_MAX_PARTICLES,
};
use crate::paths::{amplitude_via_paths, enumerate_paths, path_amplitude, Path};
use crate::{lambda_three, lambda_two, subsystem};

/// Settings shared by all commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Tolerance for comparisons against the dense oracle.
    pub tol: f64,
    pub budget: PathBudget,
    pub max_particles: usize,
    /// Include wall-clock timings in reports (makes them non-reproducible).
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-9,
            budget: PathBudget::default(),
            max_particles: DEFAULT_MAX_PARTICLES,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Oracle,
    Pathsum,
    Lambda,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Oracle, Method::Pathsum, Method::Lambda];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Pathsum => "pathsum",
            Method::Lambda => "lambda",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "oracle" => Ok(Method::Oracle),
            "pathsum" => Ok(Method::Pathsum),
            "lambda" => Ok(Method::Lambda),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

/// Parses `"0,2"` into particle indices.
pub fn parse_subsystem(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidSubsystem(s.to_string()))
        })
        .collect()
}

/// The same circuit with `particle` moved to index 0 and the rest kept in order.
pub fn relabel_first(c: &Circuit, particle: usize) -> Result<Circuit> {
    c.check_particle(particle)?;
    let mut order = vec![particle];
    order.extend((0..c.particles()).filter(|&p| p != particle));
    c.permuted(&order)
}

/// Which implementation the λ method uses for a subsystem.
pub fn lambda_route(c: &Circuit, subsystem: &[usize]) -> &'static str {
    match (c.particles(), subsystem.len()) {
        (2, 1) => "lambda_two",
        (3, 1) => "lambda_three",
        _ => "subsystem_general",
    }
}

/// Marginal from the hidden-variable decomposition.
pub fn lambda_marginal(
    c: &Circuit,
    subsystem: &[usize],
    budget: PathBudget,
) -> Result<Distribution> {
    let s = c.normalize_subsystem(subsystem, true)?;
    let probs = match lambda_route(c, &s) {
        "lambda_two" => {
            let r = relabel_first(c, s[0])?;
            lambda_two::distribution_lambda(&r, budget)?
                .probabilities()
                .to_vec()
        }
        "lambda_three" => {
            let r = relabel_first(c, s[0])?;
            lambda_three::distribution_three(&r, budget)?
                .probabilities()
                .to_vec()
        }
        _ => return subsystem::distribution_general(c, &s, budget),
    };
    Ok(Distribution::new(s, probs))
}

/// Marginal from squared joint amplitudes, each computed as a full path sum.
pub fn pathsum_marginal(c: &Circuit, subsystem: &[usize], opts: &Options) -> Result<Distribution> {
    let s = c.normalize_subsystem(subsystem, false)?;
    let np = c.particles();
    if np > opts.max_particles {
        return Err(Error::TooManyParticles {
            particles: np,
            limit: opts.max_particles,
        });
    }
    opts.budget.check(pow2(np * c.depth().saturating_sub(1)))?;
    let mut probs = vec![0.0; 1 << s.len()];
    for idx in 0..1usize << np {
        let a = amplitude_via_paths(c, &basis_modes(idx, np), opts.budget)?;
        probs[project_index(idx, np, &s)] += a.norm_sqr();
    }
    Ok(Distribution::new(s, probs))
}

pub fn marginal(
    c: &Circuit,
    subsystem: &[usize],
    method: Method,
    opts: &Options,
) -> Result<Distribution> {
    match method {
        Method::Oracle => marginal_by_sum_with_limit(c, subsystem, opts.max_particles),
        Method::Pathsum => pathsum_marginal(c, subsystem, opts),
        Method::Lambda => lambda_marginal(c, subsystem, opts.budget),
    }
}

/// Every path of `particle` to `endpoint` with its amplitude.
pub fn path_dump(
    c: &Circuit,
    particle: usize,
    endpoint: u8,
    budget: PathBudget,
) -> Result<Vec<(Path, C64)>> {
    c.check_particle(particle)?;
    if endpoint > 1 {
        return Err(Error::InvalidMode(endpoint));
    }
    budget.check(pow2(c.depth().saturating_sub(1)))?;
    enumerate_paths(c.depth(), endpoint)?
        .into_iter()
        .map(|p| Ok((p, path_amplitude(c, particle, &p)?)))
        .collect()
}
