//! The Rohrs, cubic and two-cart benchmarks, closed-loop runs and metrics.

mod drifts;
mod metrics;
mod run;
mod scenario;

use thiserror::Error;

use crate::asd::AsdError;
use crate::control::ControlError;
use crate::lti::LtiError;
use crate::sim::SimError;

pub use drifts::{CubicDrift, RohrsDrift, TwoCartDrift};
pub use metrics::{compute_metrics, settled_window_start, tracking_error, Metrics, DEFAULT_SETTLE_FRACTION};
pub use run::{
    run_scenario, settle_start, InvariantFlags, ScenarioResult, CSV_COLUMNS, OBSERVER_TOL, SPLIT_REL_TOL,
    SUM_REL_TOL, XI_SLACK,
};
pub use scenario::{
    build_scenario, build_scenario_with, Design, NoiseSpec, ReferenceKind, Scenario, ScenarioName,
    ScenarioOverrides, DEFAULT_SEED, TWO_CART_ESTIMATE, TWO_CART_TRUE,
};

/// Rejections raised while building or validating a scenario.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}'; expected rohrs, nonlinear or twocart")]
    UnknownScenario(String),
    #[error("unknown reference '{0}'; expected step or sine")]
    UnknownReference(String),
    #[error("unknown two-cart case {0}; expected 1, 2 or 3")]
    UnknownCase(u8),
    #[error("twocart needs a case (1, 2 or 3)")]
    MissingCase,
    #[error("scenario {scenario} takes no case")]
    UnexpectedCase { scenario: ScenarioName },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Asd(#[from] AsdError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error("invalid configuration: {0}")]
    Config(#[from] SimError),
}
