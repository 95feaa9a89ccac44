//! Fixtures shared by the criterion benchmarks.

use asd_core::lti::TransferFunction;

/// `C(s) = 1/(2s + 1)`.
pub fn shaping_filter() -> TransferFunction {
    TransferFunction::first_order_lag(2.0)
}

/// `H(s) = 229/(s² + 30s + 229)`.
pub fn channel() -> TransferFunction {
    TransferFunction::new(vec![229.0], vec![1.0, 30.0, 229.0]).expect("valid channel")
}
