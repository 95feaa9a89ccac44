//! Deterministic fixed-step simulation of interconnected blocks.

mod block;
mod delay;
mod network;
mod noise;
mod rk4;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use block::{DynamicBlock, FnMap, FnOde, LtiBlock};
pub use delay::{DelayBlock, DelayLine};
pub use network::{run_network, BlockId, Network, NetworkBuilder, PortRef};
pub use noise::{colored_noise_step, ColoredNoise, NoiseBlock};
pub use rk4::{rk4_step, Rk4};

/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite value in block '{block}' at t = {t}")]
    NonFinite { block: String, t: f64 },
    #[error("causality violation: read at {requested} beyond newest sample {latest}")]
    Causality { requested: f64, latest: f64 },
    #[error("algebraic loop through memoryless blocks {0:?}")]
    AlgebraicLoop(Vec<String>),
    #[error("input {input} of block '{block}' is not wired")]
    Unwired { block: String, input: usize },
    #[error("wiring error: {0}")]
    Wiring(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("'{what}' diverged at t = {t}")]
    Diverged { what: String, t: f64 },
}

/// Shared clock of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, rng_seed: u64) -> Self {
        Self { dt, horizon, rng_seed }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(SimError::Config(format!(
                "horizon {} must be at least dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    /// `round(horizon / dt)`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// `sign(v)·min(|v|, a)`.
pub fn saturate(v: f64, a: f64) -> f64 {
    debug_assert!(a > 0.0);
    v.clamp(-a, a)
}

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub dt: f64,
    pub start: f64,
    pub values: Vec<f64>,
}

impl Signal {
    pub fn new(dt: f64, start: f64, values: Vec<f64>) -> Self {
        Self { dt, start, values }
    }

    /// Samples `f` on `start + k·dt`, `k = 0..n`.
    pub fn from_fn(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::new(dt, 0.0, (0..n).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.dt
    }

    /// Linear interpolation, held constant outside the sampled span.
    pub fn at(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let pos = ((t - self.start) / self.dt).max(0.0);
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Probe traces recorded on a shared uniform clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Traces {
    pub dt: f64,
    pub time: Vec<f64>,
    names: Vec<String>,
    data: Vec<Vec<f64>>,
}

impl Traces {
    pub fn new(dt: f64, names: &[String], capacity: usize) -> Self {
        Self {
            dt,
            time: Vec::with_capacity(capacity),
            names: names.to_vec(),
            data: names.iter().map(|_| Vec::with_capacity(capacity)).collect(),
        }
    }

    pub fn push_row(&mut self, t: f64, row: &[f64]) {
        self.time.push(t);
        for (col, v) in self.data.iter_mut().zip(row) {
            col.push(*v);
        }
    }

    /// Adds a derived column of the same length.
    pub fn insert(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.time.len(), "column length mismatch");
        if let Some(i) = self.names.iter().position(|n| n == name) {
            self.data[i] = values;
        } else {
            self.names.push(name.to_string());
            self.data.push(values);
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    pub fn signal(&self, name: &str) -> Option<Signal> {
        self.get(name).map(|v| Signal::new(self.dt, 0.0, v.to_vec()))
    }

    /// CSV with header `t,<columns>` and 9 significant digits per value.
    pub fn to_csv(&self, columns: &[&str]) -> Result<String, SimError> {
        let cols = columns
            .iter()
            .map(|c| self.get(c).ok_or_else(|| SimError::Config(format!("no trace named '{c}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = String::with_capacity(self.len() * (columns.len() + 1) * 16);
        out.push('t');
        for c in columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            let _ = write!(out, "{}", fmt_sig9(*t));
            for c in &cols {
                let _ = write!(out, ",{}", fmt_sig9(c[k]));
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Scientific notation with 9 significant digits, e.g. `5.00000000e-1`.
pub fn fmt_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturation_examples() {
        assert_eq!(saturate(0.5, 1.0), 0.5);
        assert_eq!(saturate(3.0, 1.0), 1.0);
        assert_eq!(saturate(-3.0, 1.0), -1.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1.0, 0).validate().is_err());
        assert!(SimConfig::new(0.1, 0.01, 0).validate().is_err());
        assert_eq!(SimConfig::new(1e-3, 60.0, 0).steps(), 60_000);
    }

    #[test]
    fn csv_layout() {
        let mut tr = Traces::new(0.5, &["y".to_string()], 2);
        tr.push_row(0.0, &[1.0]);
        tr.push_row(0.5, &[-0.25]);
        let csv = tr.to_csv(&["y"]).unwrap();
        assert_eq!(csv, "t,y\n0.00000000e0,1.00000000e0\n5.00000000e-1,-2.50000000e-1\n");
        assert!(tr.to_csv(&["missing"]).is_err());
    }

    #[test]
    fn signal_interpolation() {
        let s = Signal::from_fn(0.1, 11, |t| 2.0 * t);
        assert!((s.at(0.25) - 0.5).abs() < 1e-12);
        assert_eq!(s.at(5.0), 2.0);
    }
}
