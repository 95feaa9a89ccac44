//! Input redefinition, the uncertainty-free transformation, exact observers,
//! the primary/secondary decomposition and ISS gain certificates.

mod chain;
mod decompose;
mod gain;
mod observer;
mod plant;

use thiserror::Error;

use crate::lti::LtiError;
use crate::sim::SimError;

pub use chain::{apply_channel, build_input_chain, xi_bound, ChainOutput, InputChain};
pub use decompose::{decompose, primary_system, Decomposition, DecompositionKind, SecondaryBlock, SUM_TOL};
pub use gain::{lyapunov_gamma, GainCertificate};
pub use observer::{observe_new, observe_primary, ObserverBundle, ObserverTrace, DIVERGENCE_LIMIT};
pub use plant::{
    transform, Drift, LinearDrift, NominalModel, ParamSchedule, PlantBlock, TransformedSystem, UncertainPlant,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsdError {
    #[error("shaping filter rejected, {condition} violated: {detail}")]
    InvalidFilter { condition: &'static str, detail: String },
    #[error("saturation level must be positive and finite, got {0}")]
    InvalidSaturation(f64),
    #[error("invalid plant: {0}")]
    InvalidPlant(String),
    #[error("matrix is not Hurwitz, eigenvalues {eigenvalues:?}")]
    NotHurwitz { eigenvalues: Vec<(f64, f64)> },
    #[error("not positive definite: λmin(P) = {lambda_min_p:e}, λmin(Q) = {lambda_min_q:e}")]
    NotPositiveDefinite { lambda_min_p: f64, lambda_min_q: f64 },
    #[error("no stability certificate available for this drift")]
    Uncertified,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what} diverged at t = {t} (|x| = {magnitude:e})")]
    Diverged { what: &'static str, t: f64, magnitude: f64 },
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
