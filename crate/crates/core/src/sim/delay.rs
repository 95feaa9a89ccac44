use std::collections::VecDeque;

use super::block::DynamicBlock;
use super::SimError;

/// Transport delay `e^{−τs}` over a buffer of `(time, value)` samples.
///
/// Reads at `t` return the linear interpolation at `t − τ`; reads with
/// `t − τ < 0` return the pre-history value.
#[derive(Debug, Clone)]
pub struct DelayLine {
    delay: f64,
    prehistory: f64,
    buf: VecDeque<(f64, f64)>,
    trimmed: bool,
}

impl DelayLine {
    pub fn new(delay: f64) -> Self {
        Self::with_prehistory(delay, 0.0)
    }

    pub fn with_prehistory(delay: f64, prehistory: f64) -> Self {
        assert!(delay >= 0.0 && delay.is_finite(), "delay must be finite and nonnegative");
        Self {
            delay,
            prehistory,
            buf: VecDeque::new(),
            trimmed: false,
        }
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// Appends a sample; times must be strictly increasing.
    pub fn push(&mut self, t: f64, value: f64) -> Result<(), SimError> {
        if let Some(&(last, _)) = self.buf.back() {
            if t <= last {
                return Err(SimError::Causality {
                    requested: t,
                    latest: last,
                });
            }
        }
        self.buf.push_back((t, value));
        // keep the newest sample at or before the earliest future read, t − τ
        let horizon = t - self.delay;
        while self.buf.len() > 2 && self.buf[1].0 <= horizon {
            self.buf.pop_front();
            self.trimmed = true;
        }
        Ok(())
    }

    /// Value delayed by `τ` at time `t`.
    pub fn sample(&self, t: f64) -> Result<f64, SimError> {
        let q = t - self.delay;
        if q < 0.0 {
            return Ok(self.prehistory);
        }
        let (Some(&(t0, v0)), Some(&(tn, vn))) = (self.buf.front(), self.buf.back()) else {
            return Err(SimError::Causality {
                requested: q,
                latest: f64::NEG_INFINITY,
            });
        };
        // tolerate round-off in grid arithmetic
        let slack = 1e-9 * (1.0 + tn.abs());
        if q > tn + slack {
            return Err(SimError::Causality {
                requested: q,
                latest: tn,
            });
        }
        if q >= tn {
            return Ok(vn);
        }
        if q < t0 {
            if self.trimmed {
                return Err(SimError::Causality {
                    requested: q,
                    latest: tn,
                });
            }
            // between t = 0 and the first stored sample
            return Ok(v0);
        }
        let idx = self.buf.partition_point(|&(ts, _)| ts <= q);
        let (ta, va) = self.buf[idx - 1];
        let (tb, vb) = self.buf[idx];
        Ok(va + (vb - va) * (q - ta) / (tb - ta))
    }
}

/// Network block around a [`DelayLine`]; direct feedthrough only when `τ = 0`.
pub struct DelayBlock {
    name: String,
    line: DelayLine,
}

impl DelayBlock {
    pub fn new(name: &str, delay: f64) -> Self {
        Self {
            name: name.to_string(),
            line: DelayLine::new(delay),
        }
    }
}

impl DynamicBlock for DelayBlock {
    fn name(&self) -> &str {
        &self.name
    }
    fn state_dim(&self) -> usize {
        0
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_names(&self) -> Vec<String> {
        vec!["y".into()]
    }
    fn direct_feedthrough(&self) -> bool {
        self.line.delay == 0.0
    }
    fn initial_state(&self) -> Vec<f64> {
        Vec::new()
    }
    fn derivative(&self, _t: f64, _state: &[f64], _inputs: &[f64], _dx: &mut [f64]) {}

    fn output(&self, t: f64, _state: &[f64], inputs: &[f64], out: &mut [f64]) {
        out[0] = if self.line.delay == 0.0 {
            inputs[0]
        } else {
            // validate() guarantees τ ≥ dt, so stage reads never pass the newest sample
            self.line.sample(t).unwrap_or(f64::NAN)
        };
    }

    fn validate(&self, dt: f64) -> Result<(), SimError> {
        let tau = self.line.delay;
        if tau > 0.0 && tau < dt * (1.0 - 1e-9) {
            return Err(SimError::Config(format!(
                "delay {tau} s in block '{}' is shorter than the step {dt} s",
                self.name
            )));
        }
        Ok(())
    }

    fn commit(&mut self, t: f64, _state: &[f64], inputs: &[f64]) -> Result<(), SimError> {
        if self.line.delay > 0.0 {
            self.line.push(t, inputs[0])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delay_is_identity() {
        let mut d = DelayLine::new(0.0);
        for k in 0..10 {
            let t = k as f64 * 0.1;
            d.push(t, t.sin()).unwrap();
            assert_eq!(d.sample(t).unwrap(), t.sin());
        }
    }

    #[test]
    fn prehistory_before_delay() {
        let mut d = DelayLine::new(0.1);
        d.push(0.0, 3.0).unwrap();
        assert_eq!(d.sample(0.05).unwrap(), 0.0);
    }

    #[test]
    fn shifted_sine_within_interpolation_error() {
        let dt = 1e-3;
        let mut d = DelayLine::new(0.1);
        let mut worst = 0.0f64;
        for k in 0..5000 {
            let t = k as f64 * dt;
            d.push(t, t.sin()).unwrap();
            // off-grid read, as an RK4 midpoint stage would do
            let q = t + 0.5 * dt;
            if q >= 0.1 {
                worst = worst.max((d.sample(q).unwrap() - (q - 0.1).sin()).abs());
            }
        }
        // linear interpolation error ≤ dt²/8 · max|sin''|
        assert!(worst <= dt * dt / 8.0 + 1e-15, "worst {worst}");
    }

    #[test]
    fn read_past_newest_sample_is_causality_error() {
        let mut d = DelayLine::new(0.1);
        d.push(0.0, 1.0).unwrap();
        d.push(0.01, 1.0).unwrap();
        assert!(matches!(d.sample(0.2), Err(SimError::Causality { .. })));
        assert!(d.push(0.005, 0.0).is_err());
    }

    #[test]
    fn exact_for_piecewise_linear_input_on_grid_multiple() {
        let dt = 0.01;
        let ramp = |t: f64| if t < 0.5 { 2.0 * t } else { 1.0 - (t - 0.5) };
        let mut d = DelayLine::new(0.05);
        for k in 0..200 {
            let t = k as f64 * dt;
            d.push(t, ramp(t)).unwrap();
            let q = t + 0.5 * dt;
            if q >= 0.05 + dt {
                assert!((d.sample(q).unwrap() - ramp(q - 0.05)).abs() < 1e-12);
            }
        }
    }
}
