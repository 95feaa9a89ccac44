use crate::lti::StateSpaceModel;

use super::SimError;

/// A continuous-time block with its own state, inputs and outputs.
///
/// Blocks that do not declare direct feedthrough must compute their outputs
/// from `(t, state)` alone; the network may hand them stale inputs in
/// [`DynamicBlock::output`].
pub trait DynamicBlock: Send {
    fn name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_names(&self) -> Vec<String>;

    fn output_dim(&self) -> usize {
        self.output_names().len()
    }

    /// True if some output depends instantaneously on an input.
    fn direct_feedthrough(&self) -> bool;

    fn initial_state(&self) -> Vec<f64>;

    fn derivative(&self, t: f64, state: &[f64], inputs: &[f64], dx: &mut [f64]);

    fn output(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]);

    /// Checks the block can run at step `dt`.
    fn validate(&self, _dt: f64) -> Result<(), SimError> {
        Ok(())
    }

    /// Called once per accepted grid point, before the step leaving `t`.
    fn commit(&mut self, _t: f64, _state: &[f64], _inputs: &[f64]) -> Result<(), SimError> {
        Ok(())
    }
}

type OdeFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;
type MapFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Closure-defined ODE block; outputs its full state as `x0, x1, ...`.
pub struct FnOde {
    name: String,
    x0: Vec<f64>,
    inputs: usize,
    f: Box<OdeFn>,
}

impl FnOde {
    pub fn new<F>(name: &str, x0: Vec<f64>, inputs: usize, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            x0,
            inputs,
            f: Box::new(f),
        }
    }
}

impl DynamicBlock for FnOde {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.x0.len()
    }
    fn input_dim(&self) -> usize {
        self.inputs
    }
    fn output_names(&self) -> Vec<String> {
        (0..self.x0.len()).map(|i| format!("x{i}")).collect()
    }
    fn direct_feedthrough(&self) -> bool {
        false
    }
    fn initial_state(&self) -> Vec<f64> {
        self.x0.clone()
    }
    fn derivative(&self, t: f64, state: &[f64], inputs: &[f64], dx: &mut [f64]) {
        (self.f)(t, state, inputs, dx)
    }
    fn output(&self, _t: f64, state: &[f64], _inputs: &[f64], out: &mut [f64]) {
        out.copy_from_slice(state);
    }
}

/// Stateless block evaluating `out = f(t, inputs)`.
///
/// With zero inputs it is an exogenous source of `t`.
pub struct FnMap {
    name: String,
    inputs: usize,
    outputs: Vec<String>,
    f: Box<MapFn>,
}

impl FnMap {
    pub fn new<F>(name: &str, inputs: usize, outputs: &[&str], f: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            inputs,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            f: Box::new(f),
        }
    }

    pub fn source<F>(name: &str, outputs: &[&str], f: F) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(name, 0, outputs, move |t, _, out| f(t, out))
    }
}

impl DynamicBlock for FnMap {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        0
    }
    fn input_dim(&self) -> usize {
        self.inputs
    }
    fn output_names(&self) -> Vec<String> {
        self.outputs.clone()
    }
    fn direct_feedthrough(&self) -> bool {
        self.inputs > 0
    }
    fn initial_state(&self) -> Vec<f64> {
        Vec::new()
    }
    fn derivative(&self, _t: f64, _state: &[f64], _inputs: &[f64], _dx: &mut [f64]) {}
    fn output(&self, t: f64, _state: &[f64], inputs: &[f64], out: &mut [f64]) {
        (self.f)(t, inputs, out)
    }
}

/// SISO LTI block from a state-space model, zero initial state.
pub struct LtiBlock {
    name: String,
    model: StateSpaceModel,
}

impl LtiBlock {
    pub fn new(name: &str, model: StateSpaceModel) -> Self {
        Self {
            name: name.to_string(),
            model,
        }
    }
}

impl DynamicBlock for LtiBlock {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.model.order()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_names(&self) -> Vec<String> {
        vec!["y".into()]
    }
    fn direct_feedthrough(&self) -> bool {
        self.model.d_thru != 0.0
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.model.order()]
    }
    fn derivative(&self, _t: f64, state: &[f64], inputs: &[f64], dx: &mut [f64]) {
        self.model.rate(state, inputs[0], dx)
    }
    fn output(&self, _t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        let u = if self.model.d_thru != 0.0 { inputs[0] } else { 0.0 };
        out[0] = self.model.output(state, u);
    }
}
