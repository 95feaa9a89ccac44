use nalgebra::DMatrix;

use super::observer::DIVERGENCE_LIMIT;
use super::{AsdError, TransformedSystem};
use crate::sim::{DynamicBlock, Rk4, Signal};

/// Relative tolerance of the additive sum property.
pub const SUM_TOL: f64 = 1e-8;

/// Which primary system the transformed system is split into.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionKind {
    /// `ẋ_p = f(t, x_p, θ̂) + b u_p`; `x_s = 0` is an equilibrium of the
    /// secondary system.
    Standard,
    /// `ẋ_p = A x_p + b u_p` for a fixed matrix `A`, with secondary
    /// `ẋ_s = f(t, x_p + x_s, θ̂) − A x_p + b(u − u_p)`.
    Alternative(DMatrix<f64>),
}

impl DecompositionKind {
    fn primary_rate(&self, sys: &TransformedSystem, t: f64, xp: &[f64], u_p: f64, dx: &mut [f64]) {
        match self {
            Self::Standard => sys.rate(t, xp, u_p, dx),
            Self::Alternative(a) => {
                for i in 0..xp.len() {
                    dx[i] = (0..xp.len()).map(|j| a[(i, j)] * xp[j]).sum::<f64>() + sys.b_in[i] * u_p;
                }
            }
        }
    }

    /// Secondary rate; `scratch` must hold `2n` values.
    fn secondary_rate(
        &self,
        sys: &TransformedSystem,
        t: f64,
        xp: &[f64],
        xs: &[f64],
        du: f64,
        scratch: &mut [f64],
        dx: &mut [f64],
    ) {
        let n = xp.len();
        let (sum, fp) = scratch.split_at_mut(n);
        for i in 0..n {
            sum[i] = xp[i] + xs[i];
        }
        sys.drift.eval(t, sum, &sys.theta_hat, dx);
        match self {
            Self::Standard => sys.drift.eval(t, xp, &sys.theta_hat, fp),
            Self::Alternative(a) => {
                for i in 0..n {
                    fp[i] = (0..n).map(|j| a[(i, j)] * xp[j]).sum();
                }
            }
        }
        for i in 0..n {
            dx[i] += sys.b_in[i] * du - fp[i];
        }
    }
}

/// Primary and secondary traces of one run, with the sum-property audit.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub x_new: Vec<Vec<f64>>,
    pub x_p: Vec<Vec<f64>>,
    pub x_s: Vec<Vec<f64>>,
    pub y_p: Vec<f64>,
    pub y_s: Vec<f64>,
    /// `max_t |x_p + x_s − x_new|`.
    pub state_residual: f64,
    /// `max_t |y_p + y_s − y|`.
    pub output_residual: f64,
    /// False if either residual exceeds `1e-8·(1 + max|x_new|)`.
    pub consistent: bool,
}

/// Splits the transformed system driven by `u` into the primary system
/// driven by `u_p` and the secondary system driven by `u − u_p`.
///
/// All three systems are integrated jointly so the sum property is only
/// subject to round-off.
pub fn decompose(
    sys: &TransformedSystem,
    kind: &DecompositionKind,
    u: &Signal,
    u_p: &Signal,
    d_new: &Signal,
) -> Result<Decomposition, AsdError> {
    if u.len() != u_p.len() || u.len() != d_new.len() {
        return Err(AsdError::Dimension("u, u_p and d_new must share one grid".into()));
    }
    let n = sys.dim();
    let mut x = vec![0.0; 3 * n];
    let mut scratch = vec![0.0; 2 * n];
    let mut rk = Rk4::new(3 * n);
    let mut out = Decomposition {
        x_new: Vec::with_capacity(u.len()),
        x_p: Vec::with_capacity(u.len()),
        x_s: Vec::with_capacity(u.len()),
        y_p: Vec::with_capacity(u.len()),
        y_s: Vec::with_capacity(u.len()),
        state_residual: 0.0,
        output_residual: 0.0,
        consistent: true,
    };
    let mut scale = 0.0f64;
    for k in 0..u.len() {
        let t = u.time(k);
        let (xn, rest) = x.split_at(n);
        let (xp, xs) = rest.split_at(n);
        let mag = xn.iter().chain(xp).chain(xs).fold(0.0f64, |m, v: &f64| m.max(v.abs()));
        if !(mag <= DIVERGENCE_LIMIT) {
            return Err(AsdError::Diverged {
                what: "decomposition",
                t,
                magnitude: mag,
            });
        }
        let y = sys.output(xn) + d_new.values[k];
        let yp = sys.output(xp) + d_new.values[k];
        let ys = sys.output(xs);
        for i in 0..n {
            out.state_residual = out.state_residual.max((xp[i] + xs[i] - xn[i]).abs());
            scale = scale.max(xn[i].abs());
        }
        out.output_residual = out.output_residual.max((yp + ys - y).abs());
        out.x_new.push(xn.to_vec());
        out.x_p.push(xp.to_vec());
        out.x_s.push(xs.to_vec());
        out.y_p.push(yp);
        out.y_s.push(ys);
        if k + 1 == u.len() {
            break;
        }
        rk.step(
            |tt, s, dx| {
                let (un, upp) = (u.at(tt), u_p.at(tt));
                let (dn, drest) = dx.split_at_mut(n);
                let (dp, ds) = drest.split_at_mut(n);
                sys.rate(tt, &s[..n], un, dn);
                kind.primary_rate(sys, tt, &s[n..2 * n], upp, dp);
                kind.secondary_rate(sys, tt, &s[n..2 * n], &s[2 * n..], un - upp, &mut scratch, ds);
            },
            t,
            &mut x,
            u.dt,
        );
    }
    let tol = SUM_TOL * (1.0 + scale);
    out.consistent = out.state_residual <= tol && out.output_residual <= tol;
    Ok(out)
}

/// Ground-truth secondary system as a network block.
///
/// Inputs `[u, u_p, x_p0, x_p1, ...]`; outputs `cx, x0, x1, ...`.
pub struct SecondaryBlock {
    name: String,
    system: TransformedSystem,
    kind: DecompositionKind,
    scratch: std::cell::RefCell<Vec<f64>>,
}

impl SecondaryBlock {
    pub fn new(name: &str, system: TransformedSystem, kind: DecompositionKind) -> Self {
        let n = system.dim();
        Self {
            name: name.to_string(),
            system,
            kind,
            scratch: std::cell::RefCell::new(vec![0.0; 2 * n]),
        }
    }

    /// The primary system matching this decomposition, as a transformed
    /// system fed by `u_p`.
    pub fn primary_system(&self) -> TransformedSystem {
        primary_system(&self.system, &self.kind)
    }
}

/// Primary system of `kind` as a transformed system.
pub fn primary_system(sys: &TransformedSystem, kind: &DecompositionKind) -> TransformedSystem {
    match kind {
        DecompositionKind::Standard => sys.clone(),
        DecompositionKind::Alternative(a) => TransformedSystem {
            drift: std::sync::Arc::new(super::LinearDrift::fixed(a.clone())),
            theta_hat: vec![],
            b_in: sys.b_in.clone(),
            c_out: sys.c_out.clone(),
        },
    }
}

impl DynamicBlock for SecondaryBlock {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        self.system.dim()
    }
    fn input_dim(&self) -> usize {
        2 + self.system.dim()
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
        let mut scratch = self.scratch.borrow_mut();
        let du = inputs[0] - inputs[1];
        self.kind
            .secondary_rate(&self.system, t, &inputs[2..], x, du, &mut scratch, dx);
    }
    fn output(&self, _t: f64, x: &[f64], _inputs: &[f64], out: &mut [f64]) {
        out[0] = self.system.output(x);
        out[1..].copy_from_slice(x);
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::asd::LinearDrift;

    fn rohrs_nominal() -> TransformedSystem {
        TransformedSystem {
            drift: Arc::new(LinearDrift::fixed(DMatrix::from_element(1, 1, -3.0))),
            theta_hat: vec![],
            b_in: vec![2.0],
            c_out: vec![1.0],
        }
    }

    #[test]
    fn equal_inputs_leave_secondary_at_rest() {
        let sys = rohrs_nominal();
        let u = Signal::from_fn(1e-3, 2000, |t| (2.0 * t).cos());
        let d = Signal::from_fn(1e-3, 2000, |t| 0.1 * t);
        let dec = decompose(&sys, &DecompositionKind::Standard, &u, &u, &d).unwrap();
        assert!(dec.x_s.iter().all(|x| x[0] == 0.0));
        assert!(dec.y_s.iter().all(|y| *y == 0.0));
        assert!(dec.consistent);
    }

    #[test]
    fn secondary_step_dc_gain() {
        let sys = rohrs_nominal();
        let delta = 0.3;
        let u = Signal::from_fn(1e-3, 10_001, |_| 1.0 + delta);
        let up = Signal::from_fn(1e-3, 10_001, |_| 1.0);
        let d = Signal::from_fn(1e-3, 10_001, |_| 0.0);
        let dec = decompose(&sys, &DecompositionKind::Standard, &u, &up, &d).unwrap();
        let ys = *dec.y_s.last().unwrap();
        assert!((ys - 2.0 / 3.0 * delta).abs() < 1e-9, "{ys}");
        assert!(dec.consistent);
    }

    #[test]
    fn alternative_split_still_sums() {
        let sys = rohrs_nominal();
        let u = Signal::from_fn(1e-3, 3000, |t| t.sin());
        let up = Signal::from_fn(1e-3, 3000, |t| 0.5 * t.sin());
        let d = Signal::from_fn(1e-3, 3000, |_| 0.0);
        let kind = DecompositionKind::Alternative(DMatrix::from_element(1, 1, -1.0));
        let dec = decompose(&sys, &kind, &u, &up, &d).unwrap();
        assert!(dec.consistent, "{}", dec.state_residual);
        assert!(dec.x_s.iter().any(|x| x[0].abs() > 1e-3));
    }
}
