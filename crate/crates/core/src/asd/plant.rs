use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::gain::{lyapunov_gamma, GainCertificate};
use super::AsdError;
use crate::lti::TransferFunction;
use crate::sim::DynamicBlock;

/// The drift `f(t, x, θ)` of an uncertain plant.
pub trait Drift: Send + Sync {
    fn dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[f64], theta: &[f64], out: &mut [f64]);

    /// `A(θ)` when the drift is linear in `x`.
    fn linear_matrix(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Certificate that `P ∂f + ∂fᵀ P ≤ −Q` holds for this `θ`.
    fn certificate(&self, theta: &[f64]) -> Result<GainCertificate, AsdError> {
        match self.linear_matrix(theta) {
            Some(a) => lyapunov_gamma(&a),
            None => Err(AsdError::Uncertified),
        }
    }
}

type MatrixFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// `f(t, x, θ) = A(θ) x`.
pub struct LinearDrift {
    dim: usize,
    param_dim: usize,
    matrix: Box<MatrixFn>,
}

impl LinearDrift {
    pub fn new<F>(dim: usize, param_dim: usize, matrix: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            param_dim,
            matrix: Box::new(matrix),
        }
    }

    /// Parameter-free `f = A x`.
    pub fn fixed(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self::new(n, 0, move |_| a.clone())
    }
}

impl Drift for LinearDrift {
    fn dim(&self) -> usize {
        self.dim
    }
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn eval(&self, _t: f64, x: &[f64], theta: &[f64], out: &mut [f64]) {
        let a = (self.matrix)(theta);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| a[(i, j)] * x[j]).sum();
        }
    }
    fn linear_matrix(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        Some((self.matrix)(theta))
    }
}

type ScheduleFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// True parameter trajectory `θ(t)`.
#[derive(Clone)]
pub enum ParamSchedule {
    Constant(Vec<f64>),
    Varying { dim: usize, f: Arc<ScheduleFn> },
}

impl ParamSchedule {
    pub fn varying<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        Self::Varying { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::Varying { dim, .. } => *dim,
        }
    }

    pub fn at(&self, t: f64, out: &mut [f64]) {
        match self {
            Self::Constant(v) => out.copy_from_slice(v),
            Self::Varying { f, .. } => f(t, out),
        }
    }
}

type VectorFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// `ẋ = f(t, x, θ(t)) + b u_ξ + d(t) + n ζ(t)`, `y = cᵀx`, with
/// `u_ξ = H(s) e^{−τs} u`.
#[derive(Clone)]
pub struct UncertainPlant {
    pub drift: Arc<dyn Drift>,
    pub b_in: Vec<f64>,
    pub c_out: Vec<f64>,
    pub x0: Vec<f64>,
    pub theta: ParamSchedule,
    /// Deterministic disturbance `d(t)`; `None` means zero.
    pub disturbance: Option<Arc<VectorFn>>,
    /// Direction along which an external scalar noise enters.
    pub noise_input: Option<Vec<f64>>,
    pub channel: TransferFunction,
    pub delay: f64,
}

impl UncertainPlant {
    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn validate(&self) -> Result<(), AsdError> {
        let n = self.dim();
        let bad = |why: String| Err(AsdError::InvalidPlant(why));
        if self.b_in.len() != n || self.c_out.len() != n || self.x0.len() != n {
            return bad(format!("b, c and x0 must have length {n}"));
        }
        if self.noise_input.as_ref().is_some_and(|v| v.len() != n) {
            return bad(format!("noise direction must have length {n}"));
        }
        if self.theta.dim() != self.drift.param_dim() {
            return bad(format!(
                "θ has {} entries, drift expects {}",
                self.theta.dim(),
                self.drift.param_dim()
            ));
        }
        if !(self.delay >= 0.0 && self.delay.is_finite()) {
            return bad(format!("delay must be nonnegative, got {}", self.delay));
        }
        if !self.channel.is_proper() || !self.channel.is_stable() {
            return bad(format!("channel H(s) = {} must be stable and proper", self.channel));
        }
        if (self.channel.dc_gain() - 1.0).abs() > 1e-9 {
            return bad(format!("channel H(0) = {} must equal 1", self.channel.dc_gain()));
        }
        // f(t, 0, θ) ≡ 0, checked on a few sample times
        let zero = vec![0.0; n];
        let mut th = vec![0.0; self.theta.dim()];
        let mut out = vec![0.0; n];
        for t in [0.0, 0.37, 1.9, 13.0] {
            self.theta.at(t, &mut th);
            self.drift.eval(t, &zero, &th, &mut out);
            if out.iter().any(|v| v.abs() > 1e-12) {
                return bad(format!("f(t, 0, θ) = {out:?} at t = {t}; the drift must vanish at the origin"));
            }
        }
        Ok(())
    }
}

/// The uncertainty-free model `ẋ_new = f(t, x_new, θ̂) + b u`,
/// `y = cᵀx_new + d_new`, `x_new(0) = 0`.
#[derive(Clone)]
pub struct TransformedSystem {
    pub drift: Arc<dyn Drift>,
    pub theta_hat: Vec<f64>,
    pub b_in: Vec<f64>,
    pub c_out: Vec<f64>,
}

impl std::fmt::Debug for TransformedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformedSystem")
            .field("dim", &self.dim())
            .field("theta_hat", &self.theta_hat)
            .field("b_in", &self.b_in)
            .field("c_out", &self.c_out)
            .finish()
    }
}

impl TransformedSystem {
    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn rate(&self, t: f64, x: &[f64], u: f64, dx: &mut [f64]) {
        self.drift.eval(t, x, &self.theta_hat, dx);
        for (d, b) in dx.iter_mut().zip(&self.b_in) {
            *d += b * u;
        }
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        self.c_out.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// `A(θ̂)` for linear drifts.
    pub fn linear_matrix(&self) -> Option<DMatrix<f64>> {
        self.drift.linear_matrix(&self.theta_hat)
    }
}

/// Uncertainty-free transformation of `plant` around the estimate `θ̂`.
pub fn transform(plant: &UncertainPlant, theta_hat: &[f64]) -> Result<TransformedSystem, AsdError> {
    if theta_hat.len() != plant.drift.param_dim() {
        return Err(AsdError::InvalidPlant(format!(
            "θ̂ has {} entries, drift expects {}",
            theta_hat.len(),
            plant.drift.param_dim()
        )));
    }
    plant.drift.certificate(theta_hat)?;
    Ok(TransformedSystem {
        drift: plant.drift.clone(),
        theta_hat: theta_hat.to_vec(),
        b_in: plant.b_in.clone(),
        c_out: plant.c_out.clone(),
    })
}

/// The true plant as a network block: inputs `[u_ξ, ζ]`, outputs
/// `y, x0, x1, ...`.
pub struct PlantBlock {
    plant: UncertainPlant,
    scratch: RefCell<(Vec<f64>, Vec<f64>)>,
}

impl PlantBlock {
    pub fn new(plant: UncertainPlant) -> Self {
        let n = plant.dim();
        let m = plant.theta.dim();
        Self {
            plant,
            scratch: RefCell::new((vec![0.0; m], vec![0.0; n])),
        }
    }
}

impl DynamicBlock for PlantBlock {
    fn name(&self) -> &str {
        "plant"
    }
    fn state_dim(&self) -> usize {
        self.plant.dim()
    }
    fn input_dim(&self) -> usize {
        2
    }
    fn output_names(&self) -> Vec<String> {
        std::iter::once("y".to_string())
            .chain((0..self.plant.dim()).map(|i| format!("x{i}")))
            .collect()
    }
    fn direct_feedthrough(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<f64> {
        self.plant.x0.clone()
    }
    fn derivative(&self, t: f64, x: &[f64], inputs: &[f64], dx: &mut [f64]) {
        let p = &self.plant;
        let mut guard = self.scratch.borrow_mut();
        let (theta, dist) = &mut *guard;
        p.theta.at(t, theta);
        p.drift.eval(t, x, theta, dx);
        for (d, b) in dx.iter_mut().zip(&p.b_in) {
            *d += b * inputs[0];
        }
        if let Some(f) = &p.disturbance {
            f(t, dist);
            for (d, w) in dx.iter_mut().zip(dist.iter()) {
                *d += w;
            }
        }
        if let Some(nv) = &p.noise_input {
            for (d, n) in dx.iter_mut().zip(nv) {
                *d += n * inputs[1];
            }
        }
    }
    fn output(&self, _t: f64, x: &[f64], _inputs: &[f64], out: &mut [f64]) {
        out[0] = self.plant.c_out.iter().zip(x).map(|(c, x)| c * x).sum();
        out[1..].copy_from_slice(x);
    }
}

/// `ẋ = f(t, x, θ̂) + b·input` from zero, outputting `cx, x0, x1, ...`.
///
/// Serves as the observer for `x_new` (input `u`) and `x_p` (input `u_p`),
/// and as the ground-truth copies of both.
pub struct NominalModel {
    name: String,
    system: TransformedSystem,
}

impl NominalModel {
    pub fn new(name: &str, system: TransformedSystem) -> Self {
        Self {
            name: name.to_string(),
            system,
        }
    }
}

impl DynamicBlock for NominalModel {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.system.dim()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_names(&self) -> Vec<String> {
        std::iter::once("cx".to_string())
            .chain((0..self.system.dim()).map(|i| format!("x{i}")))
            .collect()
    }
    fn direct_feedthrough(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.system.dim()]
    }
    fn derivative(&self, t: f64, x: &[f64], inputs: &[f64], dx: &mut [f64]) {
        self.system.rate(t, x, inputs[0], dx)
    }
    fn output(&self, _t: f64, x: &[f64], _inputs: &[f64], out: &mut [f64]) {
        out[0] = self.system.output(x);
        out[1..].copy_from_slice(x);
    }
}
