use crate::sim::Rk4;

/// Time constant of the approximate differentiator `s/(T s + 1)`.
pub const DIFF_TIME_CONSTANT: f64 = 0.1;

/// `s/(0.1 s + 1)` in the form `ẇ = (in − w)/T`, output `(in − w)/T`.
pub fn diff_output(w: f64, input: f64) -> f64 {
    (input - w) / DIFF_TIME_CONSTANT
}

/// State of one approximate differentiator, driven sample by sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffFilterState {
    w: f64,
    last: Option<f64>,
}

impl DiffFilterState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Feeds `input` (the sample `dt` after the previous one) and returns the
/// derivative estimate. The input is linearly interpolated inside the step.
pub fn approx_derivative(state: &mut DiffFilterState, input: f64, dt: f64) -> f64 {
    debug_assert!(dt > 0.0);
    if let Some(prev) = state.last {
        let mut w = [state.w];
        let slope = (input - prev) / dt;
        Rk4::new(1).step(|tau, w, dw| dw[0] = diff_output(w[0], prev + slope * tau), 0.0, &mut w, dt);
        state.w = w[0];
    }
    state.last = Some(input);
    diff_output(state.w, input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(f: impl Fn(f64) -> f64, dt: f64, horizon: f64) -> Vec<(f64, f64)> {
        let mut st = DiffFilterState::new();
        (0..=(horizon / dt).round() as usize)
            .map(|k| {
                let t = k as f64 * dt;
                (t, approx_derivative(&mut st, f(t), dt))
            })
            .collect()
    }

    #[test]
    fn constant_decays_with_tenth_second_time_constant() {
        let out = drive(|_| 2.0, 1e-3, 1.0);
        // the first sample sees a jump from zero: 2/0.1
        assert!((out[0].1 - 20.0).abs() < 1e-12);
        let at = |t: f64| out[(t / 1e-3).round() as usize].1;
        assert!((at(0.1) / at(0.0) - (-1.0f64).exp()).abs() < 1e-6);
        assert!(at(1.0).abs() < 20.0 * 1e-4);
    }

    #[test]
    fn ramp_settles_to_unit_slope() {
        let out = drive(|t| t, 1e-3, 0.5);
        let last = out.last().unwrap().1;
        assert!((last - (1.0 - (-5.0f64).exp())).abs() < 1e-6);
        assert!((last - 1.0).abs() < 0.01);
    }

    #[test]
    fn slow_sine_gain_error_small() {
        let out = drive(|t| (0.2 * t).sin(), 1e-3, 60.0);
        let worst = out
            .iter()
            .filter(|(t, _)| *t > 5.0)
            .map(|(t, d)| (d - 0.2 * (0.2 * t).cos()).abs())
            .fold(0.0, f64::max);
        // phase lag atan(0.02) dominates the residual
        assert!(worst < 0.2 * 0.021, "{worst}");
    }
}
