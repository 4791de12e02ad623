//! Subsystem marginals of layered controlled-phase circuits through a local
//! sum-over-paths decomposition.
//!
//! The marginal of a subsystem is written as a sum over pairs of subsystem paths whose
//! interference terms are weighted by complex hidden variables `λ`. Each `λ` starts at 1
//! and is updated additively by "hits" whenever the subsystem interacts with the
//! external particles. Every decomposition here is checked against [`oracle`], a plain
//! dense state-vector simulator.
//!
//! Module map:
//!
//! * [`circuit`]: layered normal form, JSON files, seeded random corpora.
//! * [`oracle`]: state vectors, joint and marginal distributions, partial traces.
//! * [`paths`]: path enumeration, path amplitudes, conditioned external evolutions.
//! * [`lambda_two`]: two-particle hits and hidden variables.
//! * [`lambda_three`]: three-particle δ/γ/χ decomposition.
//! * [`subsystem`]: M-particle subsystems of N-particle circuits.
//! * [`density`]: hit/miss split of the reduced density matrix.
//! * [`experiments`]: verification reports and the command-line operations.

pub mod budget;
pub mod circuit;
pub mod density;
pub mod error;
pub mod experiments;
pub mod lambda_three;
pub mod lambda_two;
pub mod oracle;
pub mod paths;
pub mod subsystem;

pub use num_complex::Complex64 as C64;

pub use budget::PathBudget;
pub use circuit::{build_epr_circuit, Circuit, Layer, PhaseGate, SingleGate};
pub use error::{Error, Result};
pub use oracle::{DensityMatrix, Distribution, StateVector};
pub use paths::Path;
