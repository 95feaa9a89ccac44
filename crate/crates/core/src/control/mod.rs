//! Tracking laws, input realization with the saturation split, and the
//! integrated controller.

mod diff;
mod laws;
mod reference;
mod stack;

use thiserror::Error;

use crate::lti::LtiError;

pub use diff::{approx_derivative, diff_output, DiffFilterState, DIFF_TIME_CONSTANT};
pub use laws::{
    fifth_order_filter, lead_time_constant, nonlinear_law, realize_input, rohrs_law, InversionCompensator,
    TrackingLaw,
};
pub use reference::ReferenceSignal;
pub use stack::{ControllerStack, StackSignals, STACK_SIGNALS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("C(s) = {0} is not of the form 1/(Ts + 1); v = C⁻¹ u_p needs a first-order lag")]
    UnsupportedFilter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
}
