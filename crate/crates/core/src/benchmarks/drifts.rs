use nalgebra::DMatrix;

use crate::asd::{AsdError, Drift, GainCertificate};

/// `f(x, θ) = −(3 + θ)x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RohrsDrift;

impl Drift for RohrsDrift {
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, _t: f64, x: &[f64], theta: &[f64], out: &mut [f64]) {
        out[0] = -(3.0 + theta[0]) * x[0];
    }
    fn linear_matrix(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, -(3.0 + theta[0])))
    }
}

/// `f(x, θ) = −x − (1 + θ)x³`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicDrift;

impl Drift for CubicDrift {
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn eval(&self, _t: f64, x: &[f64], theta: &[f64], out: &mut [f64]) {
        out[0] = -x[0] - (1.0 + theta[0]) * x[0].powi(3);
    }

    /// `∂f/∂x = −1 − 3(1 + θ)x² ≤ −1` whenever `θ ≥ −1`, so `P = ½`,
    /// `Q = 1` works on all of ℝ.
    fn certificate(&self, theta: &[f64]) -> Result<GainCertificate, AsdError> {
        if theta[0] < -1.0 {
            return Err(AsdError::Uncertified);
        }
        GainCertificate::from_pair(DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 1.0))
    }
}

/// Two carts joined by a spring and damper, the second tied to a wall.
/// `θ = [m₁, m₂, k₁, k₂, b₁, b₂]`, state `[x₁, x₂, ẋ₁, ẋ₂]`.
///
/// The `(4,3)` damping entry is `b₂/m₂` unless `corrected_coupling` is set,
/// in which case it is `b₁/m₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoCartDrift {
    pub corrected_coupling: bool,
}

impl TwoCartDrift {
    pub fn matrix(&self, theta: &[f64]) -> DMatrix<f64> {
        let [m1, m2, k1, k2, b1, b2] = [theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]];
        let coupling = if self.corrected_coupling { b1 } else { b2 };
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -k1 / m1, k1 / m1, -b1 / m1, b1 / m1,
            k1 / m2, -(k1 + k2) / m2, coupling / m2, -(b1 + b2) / m2,
        ]);
        a
    }
}

impl Drift for TwoCartDrift {
    fn dim(&self) -> usize {
        4
    }
    fn param_dim(&self) -> usize {
        6
    }
    fn eval(&self, _t: f64, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let a = self.matrix(theta);
        for i in 0..4 {
            out[i] = (0..4).map(|j| a[(i, j)] * x[j]).sum();
        }
    }
    fn linear_matrix(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.matrix(theta))
    }
}
