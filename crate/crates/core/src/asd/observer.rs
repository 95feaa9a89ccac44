use super::{AsdError, TransformedSystem};
use crate::sim::{Rk4, Signal};

/// Magnitude at which an observer state is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Observer estimates at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverBundle {
    pub x_new_hat: Vec<f64>,
    pub x_p_hat: Vec<f64>,
    pub d_new_hat: f64,
}

impl ObserverBundle {
    pub fn zero(n: usize) -> Self {
        Self {
            x_new_hat: vec![0.0; n],
            x_p_hat: vec![0.0; n],
            d_new_hat: 0.0,
        }
    }

    /// `x̂_s = x̂_new − x̂_p`.
    pub fn x_s_hat(&self) -> Vec<f64> {
        self.x_new_hat.iter().zip(&self.x_p_hat).map(|(a, b)| a - b).collect()
    }
}

/// State estimates sampled on the input grid, with an optional output
/// residual (`d̂_new` for the `x_new` observer).
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverTrace {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

/// Integrates `ẋ = f(t, x, θ̂) + b·input` from zero, with the input
/// linearly interpolated between samples.
fn integrate(sys: &TransformedSystem, input: &Signal, what: &'static str) -> Result<Vec<Vec<f64>>, AsdError> {
    let n = sys.dim();
    let mut x = vec![0.0; n];
    let mut rk = Rk4::new(n);
    let mut states = Vec::with_capacity(input.len());
    for k in 0..input.len() {
        let t = input.time(k);
        let mag = x.iter().fold(0.0f64, |m, v: &f64| m.max(v.abs()));
        if !(mag <= DIVERGENCE_LIMIT) {
            return Err(AsdError::Diverged { what, t, magnitude: mag });
        }
        states.push(x.clone());
        if k + 1 < input.len() {
            rk.step(|tt, xx, dx| sys.rate(tt, xx, input.at(tt), dx), t, &mut x, input.dt);
        }
    }
    Ok(states)
}

/// `x̂_new` driven by `u` from zero, and `d̂_new = y − cᵀx̂_new`.
pub fn observe_new(sys: &TransformedSystem, u: &Signal, y: &Signal) -> Result<ObserverTrace, AsdError> {
    if u.len() != y.len() {
        return Err(AsdError::Dimension(format!("u has {} samples, y has {}", u.len(), y.len())));
    }
    let states = integrate(sys, u, "x_new observer")?;
    let residual = states.iter().zip(&y.values).map(|(x, y)| y - sys.output(x)).collect();
    Ok(ObserverTrace {
        dt: u.dt,
        states,
        residual,
    })
}

/// `x̂_p` driven by `u_p` from zero; returns `(x̂_p, x̂_s = x_new − x̂_p)`.
pub fn observe_primary(
    x_new: &[Vec<f64>],
    u_p: &Signal,
    sys: &TransformedSystem,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), AsdError> {
    if x_new.len() != u_p.len() {
        return Err(AsdError::Dimension(format!(
            "x_new has {} samples, u_p has {}",
            x_new.len(),
            u_p.len()
        )));
    }
    let xp = integrate(sys, u_p, "x_p observer")?;
    let xs = x_new
        .iter()
        .zip(&xp)
        .map(|(xn, xp)| xn.iter().zip(xp).map(|(a, b)| a - b).collect())
        .collect();
    Ok((xp, xs))
}
