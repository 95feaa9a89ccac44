//! Additive-state-decomposition (ASD) output-feedback tracking control for
//! uncertain SISO systems whose input passes through an unmodeled
//! high-frequency gain and a transport delay.
//!
//! The crate is layered bottom-up:
//!
//! - [`lti`]: rational transfer functions, realizations, impulse responses
//!   and L1-gain quadrature.
//! - [`sim`]: fixed-step RK4 engine, delay lines, saturation, colored noise
//!   and a block-network runner.
//! - [`asd`]: input redefinition, the uncertainty-free transformation,
//!   exact observers, the primary/secondary decomposition and ISS gains.
//! - [`control`]: tracking laws, input realization and the integrated
//!   controller stack.
//! - [`benchmarks`]: the Rohrs, cubic and two-cart scenarios with metrics.

pub mod asd;
pub mod benchmarks;
pub mod control;
mod error;
pub mod linalg;
pub mod lti;
pub mod sim;

pub use error::{Error, Result};

pub use asd::{GainCertificate, InputChain, TransformedSystem, UncertainPlant};
pub use benchmarks::{
    build_scenario, run_scenario, Metrics, ReferenceKind, Scenario, ScenarioName,
    ScenarioOverrides, ScenarioResult,
};
pub use control::{ControllerStack, ReferenceSignal, TrackingLaw};
pub use lti::{StateSpaceModel, TransferFunction};
pub use sim::{SimConfig, Signal, Traces};
