//! Rational transfer-function algebra, realizations, impulse responses and
//! L1-gain quadrature.

mod impulse;
mod poly;
mod ss;
mod tf;

use thiserror::Error;

pub use impulse::{
    default_horizon, impulse_response, l1_estimate, l1_gain, l1_gain_default, l1_gain_delay_mismatch,
    ImpulseTrace, L1Estimate, DEFAULT_L1_DT, DEFAULT_TAIL_TOL,
};
pub use poly::Poly;
pub use ss::{realize, realize_controllable, StateSpaceModel};
pub use tf::{compose, proper_inverse, stability_check, Composition, TransferFunction, STABILITY_MARGIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("improper transfer function: numerator degree {num_degree} exceeds denominator degree {den_degree}")]
    Improper { num_degree: usize, den_degree: usize },
    #[error("unstable transfer function, poles {poles:?}; the L1 gain is only defined for stable systems")]
    Unstable { poles: Vec<(f64, f64)> },
    #[error("non-minimum-phase plant, zeros {zeros:?}; its inverse would be unstable")]
    NonMinimumPhase { zeros: Vec<(f64, f64)> },
    #[error("filter relative degree {available} is below the plant relative degree {needed}; use at least {needed}")]
    InsufficientFilterOrder { needed: i64, available: i64 },
    #[error("horizon {horizon} s leaves tail mass {tail_bound:.3e}; try a horizon of at least {suggested:.1} s")]
    HorizonTooShort { horizon: f64, tail_bound: f64, suggested: f64 },
    #[error("invalid grid: dt = {dt}, horizon = {horizon}")]
    BadGrid { dt: f64, horizon: f64 },
    #[error("nothing to compose")]
    EmptyComposition,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot parse transfer function: {0}")]
    Parse(String),
}
