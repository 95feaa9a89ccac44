use thiserror::Error;

use crate::asd::AsdError;
use crate::benchmarks::ScenarioError;
use crate::lti::LtiError;
use crate::sim::SimError;

/// Crate-level error, one variant per layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Asd(#[from] AsdError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, Error>;
