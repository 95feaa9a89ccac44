use super::AsdError;
use crate::lti::{realize, StateSpaceModel, TransferFunction};
use crate::sim::{saturate, DynamicBlock, Rk4, Signal};

/// `(ε_H + τ ε_τ)·a`, the worst-case size of the channel mismatch `ξ`.
pub fn xi_bound(eps_h: f64, eps_tau: f64, tau: f64, a: f64) -> f64 {
    debug_assert!(eps_h >= 0.0 && eps_tau >= 0.0 && tau >= 0.0 && a >= 0.0);
    (eps_h + tau * eps_tau) * a
}

/// Saturation `σ_a` followed by the shaping filter `C(s)`.
///
/// The filter state is carried three times: the true state `z` driven by
/// `σ_a(v)`, the unsaturated part `z_p` driven by `v`, and the saturation
/// remainder `z_s` driven by `σ_a(v) − v`. Linearity gives `z = z_p + z_s`.
#[derive(Debug, Clone)]
pub struct InputChain {
    pub a: f64,
    filter: TransferFunction,
    model: StateSpaceModel,
}

/// Instantaneous chain outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOutput {
    pub u: f64,
    pub u_zp: f64,
    pub u_zs: f64,
    pub sat_v: f64,
}

/// Validates `C` and `a` and returns the chain.
pub fn build_input_chain(c: &TransferFunction, a: f64) -> Result<InputChain, AsdError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(AsdError::InvalidSaturation(a));
    }
    let bad = |condition, detail: String| Err(AsdError::InvalidFilter { condition, detail });
    if !c.is_proper() {
        return bad("properness", format!("C(s) = {c}"));
    }
    if !c.is_stable() {
        return bad("stability", format!("poles {:?}", c.poles()));
    }
    if !c.is_minimum_phase() {
        return bad("minimum phase", format!("zeros {:?}", c.zeros()));
    }
    if (c.dc_gain() - 1.0).abs() > 1e-9 {
        return bad("C(0) = 1", format!("C(0) = {}", c.dc_gain()));
    }
    Ok(InputChain {
        a,
        filter: c.clone(),
        model: realize(c)?,
    })
}

impl InputChain {
    pub fn filter(&self) -> &TransferFunction {
        &self.filter
    }

    pub fn model(&self) -> &StateSpaceModel {
        &self.model
    }

    /// Order of `C(s)`; the chain state is three times this.
    pub fn filter_order(&self) -> usize {
        self.model.order()
    }

    /// Rates of `[z, z_p, z_s]` for redefined input `v`.
    pub fn rates(&self, state: &[f64], v: f64, dx: &mut [f64]) {
        let n = self.filter_order();
        let sat = saturate(v, self.a);
        self.model.rate(&state[..n], sat, &mut dx[..n]);
        self.model.rate(&state[n..2 * n], v, &mut dx[n..2 * n]);
        self.model.rate(&state[2 * n..], sat - v, &mut dx[2 * n..]);
    }

    pub fn outputs(&self, state: &[f64], v: f64) -> ChainOutput {
        let n = self.filter_order();
        let sat = saturate(v, self.a);
        ChainOutput {
            u: self.model.output(&state[..n], sat),
            u_zp: self.model.output(&state[n..2 * n], v),
            u_zs: self.model.output(&state[2 * n..], sat - v),
            sat_v: sat,
        }
    }
}

impl DynamicBlock for InputChain {
    fn name(&self) -> &str {
        "chain"
    }
    fn state_dim(&self) -> usize {
        3 * self.filter_order()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_names(&self) -> Vec<String> {
        let n = self.filter_order();
        let mut names: Vec<String> = ["u", "u_zp", "u_zs", "sat_v"].iter().map(|s| s.to_string()).collect();
        for part in ["z", "z_p", "z_s"] {
            names.extend((0..n).map(|i| format!("{part}{i}")));
        }
        names
    }
    fn direct_feedthrough(&self) -> bool {
        self.model.d_thru != 0.0
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; 3 * self.filter_order()]
    }
    fn derivative(&self, _t: f64, state: &[f64], inputs: &[f64], dx: &mut [f64]) {
        self.rates(state, inputs[0], dx)
    }
    fn output(&self, _t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        let o = self.outputs(state, inputs[0]);
        out[..4].copy_from_slice(&[o.u, o.u_zp, o.u_zs, o.sat_v]);
        out[4..].copy_from_slice(state);
    }
}

/// Passes `u` through `H(s)e^{−τs}` and returns `(u_ξ, ξ = u_ξ − u)` on the
/// grid of `u`.
///
/// `u` is linearly interpolated at RK4 stages and is zero before `t = 0`.
pub fn apply_channel(u: &Signal, h: &TransferFunction, tau: f64) -> Result<(Signal, Signal), AsdError> {
    if !h.is_proper() || !h.is_stable() || (h.dc_gain() - 1.0).abs() > 1e-9 {
        return Err(AsdError::InvalidPlant(format!(
            "channel H(s) = {h} must be stable, proper and satisfy H(0) = 1"
        )));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(AsdError::InvalidPlant(format!("delay must be nonnegative, got {tau}")));
    }
    let model = realize(h)?;
    let delayed = |t: f64| if t - tau < u.start - 1e-12 { 0.0 } else { u.at(t - tau) };
    let mut x = vec![0.0; model.order()];
    let mut rk = Rk4::new(model.order());
    let mut u_xi = Vec::with_capacity(u.len());
    for k in 0..u.len() {
        let t = u.time(k);
        u_xi.push(model.output(&x, delayed(t)));
        rk.step(|tt, xx, dx| model.rate(xx, delayed(tt), dx), t, &mut x, u.dt);
    }
    let xi = u_xi.iter().zip(&u.values).map(|(a, b)| a - b).collect();
    Ok((Signal::new(u.dt, u.start, u_xi), Signal::new(u.dt, u.start, xi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag2() -> TransferFunction {
        TransferFunction::first_order_lag(2.0)
    }

    fn settle(chain: &InputChain, v: f64, horizon: f64) -> f64 {
        let dt = 1e-2;
        let mut x = chain.initial_state();
        let mut rk = Rk4::new(x.len());
        for k in 0..(horizon / dt) as usize {
            rk.step(|_, s, dx| chain.rates(s, v, dx), k as f64 * dt, &mut x, dt);
        }
        chain.outputs(&x, v).u
    }

    #[test]
    fn xi_bound_examples() {
        assert!((xi_bound(0.12, 1.0, 0.0, 2.0) - 0.24).abs() < 1e-15);
        assert!((xi_bound(0.0, 1.0, 0.1, 3.0) - 0.3).abs() < 1e-15);
        assert_eq!(xi_bound(0.12, 1.0, 0.1, 0.0), 0.0);
    }

    #[test]
    fn unsaturated_step_settles_to_dc() {
        let chain = build_input_chain(&lag2(), 1.0).unwrap();
        assert!((settle(&chain, 0.5, 40.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn saturated_step_settles_to_level() {
        let chain = build_input_chain(&lag2(), 1.0).unwrap();
        assert!((settle(&chain, 10.0, 40.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_input_zero_output() {
        let chain = build_input_chain(&lag2(), 1.0).unwrap();
        assert_eq!(settle(&chain, 0.0, 5.0), 0.0);
    }

    #[test]
    fn rejects_bad_filters() {
        let unstable = TransferFunction::new(vec![-1.0], vec![1.0, -1.0]).unwrap();
        let nmp = TransferFunction::new(vec![-1.0, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let off_dc = TransferFunction::first_order_lag(2.0).scale(2.0);
        let improper = TransferFunction::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let cond = |c: &TransferFunction| match build_input_chain(c, 1.0) {
            Err(AsdError::InvalidFilter { condition, .. }) => condition,
            other => panic!("expected rejection, got {other:?}"),
        };
        assert_eq!(cond(&unstable), "stability");
        assert_eq!(cond(&nmp), "minimum phase");
        assert_eq!(cond(&off_dc), "C(0) = 1");
        assert_eq!(cond(&improper), "properness");
        assert!(matches!(build_input_chain(&lag2(), 0.0), Err(AsdError::InvalidSaturation(_))));
    }

    #[test]
    fn identity_channel_has_no_mismatch() {
        let u = Signal::from_fn(1e-3, 2000, |t| (3.0 * t).sin());
        let (_, xi) = apply_channel(&u, &TransferFunction::constant(1.0), 0.0).unwrap();
        assert!(xi.sup_abs() < 1e-15);
    }

    #[test]
    fn pure_delay_mismatch_within_bound() {
        // u = C σ_1(v) for a square wave v: |u̇| ≤ 1, so |ξ| ≤ τ
        let dt = 1e-3;
        let chain = build_input_chain(&lag2(), 1.0).unwrap();
        let mut x = chain.initial_state();
        let mut rk = Rk4::new(x.len());
        let v = |t: f64| if (t / 3.0).floor() as i64 % 2 == 0 { 4.0 } else { -4.0 };
        let mut vals = Vec::new();
        for k in 0..20_000 {
            let t = k as f64 * dt;
            vals.push(chain.outputs(&x, v(t)).u);
            rk.step(|tt, s, dx| chain.rates(s, v(tt), dx), t, &mut x, dt);
        }
        let u = Signal::new(dt, 0.0, vals);
        let (_, xi) = apply_channel(&u, &TransferFunction::constant(1.0), 0.1).unwrap();
        assert!(xi.sup_abs() <= xi_bound(0.0, 1.0, 0.1, 1.0) * 1.02, "{}", xi.sup_abs());
    }

    #[test]
    fn unstable_channel_rejected() {
        let u = Signal::from_fn(1e-3, 10, |_| 1.0);
        let h = TransferFunction::new(vec![-1.0], vec![1.0, -1.0]).unwrap();
        assert!(apply_channel(&u, &h, 0.0).is_err());
    }
}
