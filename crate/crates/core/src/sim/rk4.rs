use super::block::DynamicBlock;
use super::SimError;

/// Classical fourth-order Runge–Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `x` in place from `t` to `t + dt` for `ẋ = f(t, x)`.
    pub fn step<F>(&mut self, mut f: F, t: f64, x: &mut [f64], dt: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = x.len();
        debug_assert_eq!(n, self.k1.len());
        let half = 0.5 * dt;
        f(t, x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for i in 0..n {
            x[i] += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// One RK4 step of a single block whose inputs come from `input_sampler`,
/// which is queried at `t`, `t + dt/2` and `t + dt`.
pub fn rk4_step<S>(
    block: &dyn DynamicBlock,
    state: &[f64],
    t: f64,
    dt: f64,
    mut input_sampler: S,
) -> Result<Vec<f64>, SimError>
where
    S: FnMut(f64, &mut [f64]),
{
    let mut next = state.to_vec();
    let mut inputs = vec![0.0; block.input_dim()];
    let mut rk = Rk4::new(state.len());
    rk.step(
        |tt, x, dx| {
            input_sampler(tt, &mut inputs);
            block.derivative(tt, x, &inputs, dx);
        },
        t,
        &mut next,
        dt,
    );
    if next.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite {
            block: block.name().to_string(),
            t: t + dt,
        });
    }
    Ok(next)
}
