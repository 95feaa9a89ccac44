use super::diff::diff_output;
use super::laws::{nonlinear_law, realize_input, rohrs_law, TrackingLaw};
use super::{ControlError, ReferenceSignal};
use crate::asd::{ChainOutput, InputChain, ObserverBundle, TransformedSystem, DIVERGENCE_LIMIT};
use crate::sim::{DynamicBlock, Rk4, SimError};

/// Every controller-side signal at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackSignals {
    pub r: f64,
    pub d_new_hat: f64,
    pub d_new_hat_dot: f64,
    pub u_p: f64,
    pub u_p_dot: f64,
    pub v: f64,
    pub chain: ChainOutput,
}

impl StackSignals {
    pub fn u(&self) -> f64 {
        self.chain.u
    }
}

/// The integrated output-feedback controller: observers for `x_new` and
/// `x_p`, the tracking law, input realization and the saturated shaping
/// chain. Its only input is the measured output `y`.
///
/// State layout: `[x̂_new, x̂_p, law states, z, z_p, z_s]`, all starting at 0.
#[derive(Debug, Clone)]
pub struct ControllerStack {
    model: TransformedSystem,
    primary: TransformedSystem,
    law: TrackingLaw,
    chain: InputChain,
    reference: ReferenceSignal,
    /// `T` in `v = u_p + T u̇_p`; unused by the inversion law.
    lead: f64,
}

impl ControllerStack {
    /// `model` drives `x̂_new`; `primary` drives `x̂_p` (usually the same
    /// system). `lead` is the shaping-filter time constant when the law
    /// needs `C⁻¹` realized through a differentiator.
    pub fn new(
        model: TransformedSystem,
        primary: TransformedSystem,
        law: TrackingLaw,
        chain: InputChain,
        reference: ReferenceSignal,
        lead: f64,
    ) -> Result<Self, ControlError> {
        if primary.dim() != model.dim() {
            return Err(ControlError::Dimension("primary and transformed systems differ in order".into()));
        }
        if matches!(law, TrackingLaw::Rohrs { .. } | TrackingLaw::Nonlinear { .. }) && model.dim() != 1 {
            return Err(ControlError::Dimension("scalar laws need a first-order plant".into()));
        }
        Ok(Self {
            model,
            primary,
            law,
            chain,
            reference,
            lead,
        })
    }

    pub fn plant_order(&self) -> usize {
        self.model.dim()
    }

    pub fn chain(&self) -> &InputChain {
        &self.chain
    }

    fn law_dim(&self) -> usize {
        match &self.law {
            TrackingLaw::Rohrs { .. } | TrackingLaw::Nonlinear { .. } => 2,
            TrackingLaw::Inversion(c) => c.state_dim(),
        }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let n = self.plant_order();
        (n, 2 * n, 2 * n + self.law_dim())
    }

    /// Evaluates the stack in order: observer, law, realization, chain.
    pub fn signals(&self, t: f64, state: &[f64], y: f64) -> StackSignals {
        let (p, l, c) = self.offsets();
        let x_new = &state[..p];
        let x_p = &state[p..l];
        let w = &state[l..c];
        let d = y - self.model.output(x_new);
        let r = self.reference.value(t);
        let r_dot = self.reference.rate(t);
        let (d_dot, u_p, u_p_dot, v) = match &self.law {
            TrackingLaw::Rohrs { theta_hat } | TrackingLaw::Nonlinear { theta_hat } => {
                let d_dot = diff_output(w[0], d);
                let u_p = if matches!(self.law, TrackingLaw::Rohrs { .. }) {
                    rohrs_law(x_p[0], r, r_dot, d, d_dot, *theta_hat)
                } else {
                    nonlinear_law(x_p[0], r, r_dot, d, d_dot, *theta_hat)
                };
                let u_p_dot = diff_output(w[1], u_p);
                (d_dot, u_p, u_p_dot, realize_input(u_p, u_p_dot, self.lead))
            }
            TrackingLaw::Inversion(comp) => {
                let (u_p, v) = comp.outputs(w, r - d);
                (f64::NAN, u_p, f64::NAN, v)
            }
        };
        StackSignals {
            r,
            d_new_hat: d,
            d_new_hat_dot: d_dot,
            u_p,
            u_p_dot,
            v,
            chain: self.chain.outputs(&state[c..], v),
        }
    }

    fn rates(&self, t: f64, state: &[f64], y: f64, dx: &mut [f64]) {
        let s = self.signals(t, state, y);
        let (p, l, c) = self.offsets();
        self.model.rate(t, &state[..p], s.chain.u, &mut dx[..p]);
        self.primary.rate(t, &state[p..l], s.u_p, &mut dx[p..l]);
        match &self.law {
            TrackingLaw::Rohrs { .. } | TrackingLaw::Nonlinear { .. } => {
                dx[l] = s.d_new_hat_dot;
                dx[l + 1] = s.u_p_dot;
            }
            TrackingLaw::Inversion(comp) => comp.rates(&state[l..c], s.r - s.d_new_hat, &mut dx[l..c]),
        }
        self.chain.rates(&state[c..], s.v, &mut dx[c..]);
    }

    /// Observer estimates held in `state`.
    pub fn observers(&self, state: &[f64], y: f64) -> ObserverBundle {
        let (p, l, _) = self.offsets();
        ObserverBundle {
            x_new_hat: state[..p].to_vec(),
            x_p_hat: state[p..l].to_vec(),
            d_new_hat: y - self.model.output(&state[..p]),
        }
    }

    /// One sampled-data step: evaluates the stack at `(t, y)`, then advances
    /// its state to `t + dt` with `y` held. Returns the signals at `t`.
    pub fn controller_step(&self, state: &mut [f64], t: f64, dt: f64, y: f64) -> Result<StackSignals, SimError> {
        let s = self.signals(t, state, y);
        let stages = [
            ("observer", s.d_new_hat),
            ("law", s.u_p),
            ("realization", s.v),
            ("chain", s.chain.u),
        ];
        if let Some((stage, _)) = stages.iter().find(|(_, v)| !v.is_finite()) {
            return Err(SimError::NonFinite {
                block: format!("controller/{stage}"),
                t,
            });
        }
        Rk4::new(state.len()).step(|tt, x, dx| self.rates(tt, x, y, dx), t, state, dt);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite {
                block: "controller/state".into(),
                t: t + dt,
            });
        }
        self.check_observers(t + dt, state)?;
        Ok(s)
    }

    /// Aborts once an observer state leaves `±DIVERGENCE_LIMIT`.
    fn check_observers(&self, t: f64, state: &[f64]) -> Result<(), SimError> {
        let (_, l, _) = self.offsets();
        let peak = state[..l].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > DIVERGENCE_LIMIT {
            return Err(SimError::Diverged {
                what: format!("controller/observer (|x_hat| = {peak:.3e} > {DIVERGENCE_LIMIT:e})"),
                t,
            });
        }
        Ok(())
    }
}

/// Output ports of [`ControllerStack`] as a network block.
pub const STACK_SIGNALS: [&str; 8] = ["u", "u_p", "v", "d_new_hat", "r", "sat_v", "u_zp", "u_zs"];

impl DynamicBlock for ControllerStack {
    fn name(&self) -> &str {
        "controller"
    }
    fn state_dim(&self) -> usize {
        2 * self.plant_order() + self.law_dim() + self.chain.state_dim()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_names(&self) -> Vec<String> {
        let n = self.plant_order();
        let nc = self.chain.filter_order();
        let mut names: Vec<String> = STACK_SIGNALS.iter().map(|s| s.to_string()).collect();
        names.extend((0..n).map(|i| format!("xnew_hat{i}")));
        names.extend((0..n).map(|i| format!("xp_hat{i}")));
        for part in ["z", "z_p", "z_s"] {
            names.extend((0..nc).map(|i| format!("{part}{i}")));
        }
        names
    }
    fn direct_feedthrough(&self) -> bool {
        true
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; self.state_dim()]
    }
    fn derivative(&self, t: f64, state: &[f64], inputs: &[f64], dx: &mut [f64]) {
        self.rates(t, state, inputs[0], dx)
    }
    fn output(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        let s = self.signals(t, state, inputs[0]);
        let (_, l, c) = self.offsets();
        out[..8].copy_from_slice(&[s.chain.u, s.u_p, s.v, s.d_new_hat, s.r, s.chain.sat_v, s.chain.u_zp, s.chain.u_zs]);
        out[8..8 + l].copy_from_slice(&state[..l]);
        out[8 + l..].copy_from_slice(&state[c..]);
    }
    fn commit(&mut self, t: f64, state: &[f64], _inputs: &[f64]) -> Result<(), SimError> {
        self.check_observers(t, state)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;

    use super::*;
    use crate::asd::{build_input_chain, LinearDrift};
    use crate::lti::TransferFunction;

    fn rohrs_stack(reference: ReferenceSignal) -> ControllerStack {
        let sys = TransformedSystem {
            drift: Arc::new(LinearDrift::fixed(DMatrix::from_element(1, 1, -3.0))),
            theta_hat: vec![],
            b_in: vec![2.0],
            c_out: vec![1.0],
        };
        let chain = build_input_chain(&TransferFunction::first_order_lag(2.0), 5.0).unwrap();
        ControllerStack::new(sys.clone(), sys, TrackingLaw::Rohrs { theta_hat: 0.0 }, chain, reference, 2.0).unwrap()
    }

    #[test]
    fn zero_output_zero_reference_stays_at_rest() {
        let stack = rohrs_stack(ReferenceSignal::Zero);
        let mut x = stack.initial_state();
        for k in 0..2000 {
            let s = stack.controller_step(&mut x, k as f64 * 1e-3, 1e-3, 0.0).unwrap();
            assert_eq!(s.u(), 0.0);
        }
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn first_sample_law_value() {
        let stack = rohrs_stack(ReferenceSignal::step());
        let x = stack.initial_state();
        let s = stack.signals(0.0, &x, 0.0);
        assert!((s.u_p - 0.25).abs() < 1e-15);
        assert_eq!(s.chain.u, 0.0);
    }

    #[test]
    fn output_ports_match_names() {
        let stack = rohrs_stack(ReferenceSignal::step());
        let names = stack.output_names();
        let mut out = vec![0.0; names.len()];
        stack.output(0.0, &stack.initial_state(), &[0.1], &mut out);
        assert_eq!(names[3], "d_new_hat");
        assert!((out[3] - 0.1).abs() < 1e-15);
        assert_eq!(names.len(), 8 + 2 + 3);
    }

    #[test]
    fn runaway_observer_aborts() {
        let mut stack = rohrs_stack(ReferenceSignal::step());
        let mut x = stack.initial_state();
        assert!(stack.commit(0.0, &x, &[0.0]).is_ok());
        x[0] = 2e6;
        assert!(matches!(stack.commit(1.5, &x, &[0.0]), Err(SimError::Diverged { t, .. }) if t == 1.5));
    }
}
