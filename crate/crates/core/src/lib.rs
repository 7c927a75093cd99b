//! Multi-recombinative (μ/μ_I, λ)-CSA evolution strategy with adaptive
//! population control.
//!
//! The crate is organised along the pieces of the algorithm:
//!
//! - [`es`]: one generation of the CSA-ES (sampling, truncation selection,
//!   intermediate recombination, path and step-size update) for the three
//!   standard CSA parametrizations.
//! - [`pcs`]: the population control strategies APOP, pcCSA and PSA and the
//!   shared μ-change machinery (bounds, growth factor, waiting time,
//!   σ-rescaling).
//! - [`theory`]: closed-form sphere predictions (progress rates, second zero,
//!   steady-state ratio γ, generation numbers, PSA steady state) and the
//!   Monte-Carlo oracles used to check them.
//! - [`testbed`]: sphere, random and Rastrigin objectives, run
//!   initialization and termination classification.
//! - [`experiments`]: reproducible protocols built on top of the above.
//! - [`rng`]: per-trial random streams derived from a master seed.

pub mod error;
pub mod es;
pub mod experiments;
pub mod pcs;
pub mod rng;
pub mod stats;
pub mod testbed;
pub mod theory;

pub use error::{EsError, TheoryError};
pub use es::{CsaConfig, CsaVariant, EsState, GenerationOutput, OffspringSet, UpdateRule};
pub use pcs::{Method, PcsController, PcsSettings, Performance, Signal};
pub use testbed::{Objective, ObjectiveKind, ObjectiveSpec, Outcome, TerminationSpec};
pub use theory::RescaleLaw;
