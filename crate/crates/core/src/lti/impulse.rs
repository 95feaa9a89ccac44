use super::ss::realize;
use super::tf::TransferFunction;
use super::LtiError;
use crate::sim::Rk4;

/// Default quadrature step for L1 gains, seconds.
pub const DEFAULT_L1_DT: f64 = 1e-3;
/// Maximum tolerated tail estimate beyond the horizon.
pub const DEFAULT_TAIL_TOL: f64 = 1e-4;
/// Default horizon, in multiples of the slowest time constant.
pub const HORIZON_TIME_CONSTANTS: f64 = 10.0;

/// Sampled impulse response `g(k·dt)` plus the weight of the Dirac term at
/// `t = 0` carried by biproper functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseTrace {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub direct_delta_weight: f64,
}

impl ImpulseTrace {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.samples.len().saturating_sub(1)) as f64
    }

    /// Trapezoidal `∫|g|` over the sampled span (Dirac term excluded).
    pub fn abs_integral(&self) -> f64 {
        trapezoid_abs(&self.samples, self.dt)
    }

    pub fn integral(&self) -> f64 {
        let s = &self.samples;
        if s.len() < 2 {
            return 0.0;
        }
        self.dt * (s.iter().sum::<f64>() - 0.5 * (s[0] + s[s.len() - 1]))
    }
}

/// L1 gain together with the estimated tail mass beyond the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Estimate {
    pub value: f64,
    pub tail_bound: f64,
    pub horizon: f64,
}

fn check_grid(dt: f64, horizon: f64) -> Result<usize, LtiError> {
    if !(dt > 0.0 && dt.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(LtiError::BadGrid { dt, horizon });
    }
    Ok((horizon / dt).round().max(1.0) as usize)
}

/// Zero-state response of the realization of `tf` to a unit impulse,
/// integrated with RK4 on the uniform grid `k·dt`, `0 ≤ k·dt ≤ horizon`.
pub fn impulse_response(tf: &TransferFunction, dt: f64, horizon: f64) -> Result<ImpulseTrace, LtiError> {
    if !tf.is_stable() {
        return Err(LtiError::Unstable {
            poles: tf.poles().iter().map(|p| (p.re, p.im)).collect(),
        });
    }
    let steps = check_grid(dt, horizon)?;
    let model = realize(tf)?;
    let n = model.order();
    let mut samples = Vec::with_capacity(steps + 1);
    if n == 0 {
        samples.resize(steps + 1, 0.0);
    } else {
        // impulse on the input sets x(0+) = b
        let mut x: Vec<f64> = model.b_in.iter().copied().collect();
        let mut rk = Rk4::new(n);
        samples.push(model.output(&x, 0.0));
        for k in 0..steps {
            rk.step(|_, x, dx| model.rate(x, 0.0, dx), k as f64 * dt, &mut x, dt);
            samples.push(model.output(&x, 0.0));
        }
    }
    Ok(ImpulseTrace {
        dt,
        samples,
        direct_delta_weight: model.d_thru,
    })
}

fn trapezoid_abs(s: &[f64], dt: f64) -> f64 {
    if s.len() < 2 {
        return 0.0;
    }
    dt * (s.iter().map(|v| v.abs()).sum::<f64>() - 0.5 * (s[0].abs() + s[s.len() - 1].abs()))
}

/// Tail mass beyond the last sample from the dominant-pole envelope:
/// the envelope `M e^{σ t}` is fitted as the largest `|g|` over the last
/// quarter of the trace, projected to the horizon, and integrated to ∞.
fn envelope_tail(samples: &[f64], dt: f64, sigma: f64) -> f64 {
    if samples.is_empty() || sigma >= 0.0 {
        return 0.0;
    }
    let n = samples.len();
    let start = n - (n / 4).max(1);
    let last_t = (n - 1) as f64 * dt;
    let amp = samples[start..]
        .iter()
        .enumerate()
        .map(|(i, g)| g.abs() * (sigma * (last_t - (start + i) as f64 * dt)).exp())
        .fold(0.0, f64::max);
    amp / sigma.abs()
}

fn dominant_rate(tf: &TransferFunction) -> f64 {
    tf.poles().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max)
}

fn suggest_horizon(horizon: f64, tail: f64, tol: f64, sigma: f64) -> f64 {
    horizon + (tail / tol).ln().max(0.0) / sigma.abs() + 1.0
}

/// `‖G‖_L1 = |d| + ∫₀^∞ |g(t)| dt` with an explicit tail tolerance.
pub fn l1_estimate(tf: &TransferFunction, dt: f64, horizon: f64, tail_tol: f64) -> Result<L1Estimate, LtiError> {
    let trace = impulse_response(tf, dt, horizon)?;
    let sigma = dominant_rate(tf);
    let tail = envelope_tail(&trace.samples, dt, sigma);
    if tail > tail_tol {
        return Err(LtiError::HorizonTooShort {
            horizon,
            tail_bound: tail,
            suggested: suggest_horizon(horizon, tail, tail_tol, sigma),
        });
    }
    Ok(L1Estimate {
        value: trace.direct_delta_weight.abs() + trace.abs_integral(),
        tail_bound: tail,
        horizon,
    })
}

/// L1 gain of a stable proper transfer function on an explicit grid.
pub fn l1_gain(tf: &TransferFunction, dt: f64, horizon: f64) -> Result<f64, LtiError> {
    l1_estimate(tf, dt, horizon, DEFAULT_TAIL_TOL).map(|e| e.value)
}

/// Horizon of ten slowest time constants, at least one second.
pub fn default_horizon(tf: &TransferFunction) -> f64 {
    (HORIZON_TIME_CONSTANTS * tf.slowest_time_constant()).max(1.0)
}

/// L1 gain with the default step and horizon.
pub fn l1_gain_default(tf: &TransferFunction) -> Result<f64, LtiError> {
    l1_gain(tf, DEFAULT_L1_DT, default_horizon(tf))
}

/// `‖G_delayed · e^{−τs} − G_ref‖_L1`.
///
/// The delayed response is shifted by `τ` on the common grid (linear
/// interpolation when `τ` is not a multiple of `dt`). Dirac terms at `0`
/// and `τ` contribute their absolute weights separately unless `τ = 0`.
pub fn l1_gain_delay_mismatch(
    delayed: &TransferFunction,
    delay: f64,
    reference: &TransferFunction,
    dt: f64,
    horizon: f64,
) -> Result<L1Estimate, LtiError> {
    if !(delay >= 0.0) {
        return Err(LtiError::BadGrid { dt: delay, horizon });
    }
    let gd = impulse_response(delayed, dt, horizon)?;
    let gr = impulse_response(reference, dt, horizon)?;
    let shift = delay / dt;
    let shifted = |k: usize| -> f64 {
        let pos = k as f64 - shift;
        if pos < 0.0 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let a = gd.samples.get(i).copied().unwrap_or(0.0);
        let b = gd.samples.get(i + 1).copied().unwrap_or(a);
        a + frac * (b - a)
    };
    let diff: Vec<f64> = (0..gr.samples.len()).map(|k| shifted(k) - gr.samples[k]).collect();
    let deltas = if delay == 0.0 {
        (gd.direct_delta_weight - gr.direct_delta_weight).abs()
    } else {
        gd.direct_delta_weight.abs() + gr.direct_delta_weight.abs()
    };
    let sigma = dominant_rate(delayed).max(dominant_rate(reference));
    let tail = envelope_tail(&diff, dt, sigma);
    if tail > DEFAULT_TAIL_TOL {
        return Err(LtiError::HorizonTooShort {
            horizon,
            tail_bound: tail,
            suggested: suggest_horizon(horizon, tail, DEFAULT_TAIL_TOL, sigma),
        });
    }
    Ok(L1Estimate {
        value: deltas + trapezoid_abs(&diff, dt),
        tail_bound: tail,
        horizon,
    })
}
