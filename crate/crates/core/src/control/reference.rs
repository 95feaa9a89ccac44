use serde::{Deserialize, Serialize};

/// Desired trajectory `r(t)` with its analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReferenceSignal {
    Zero,
    Step { level: f64 },
    Sine { amplitude: f64, omega: f64 },
}

impl ReferenceSignal {
    /// `r = 0.5`.
    pub fn step() -> Self {
        Self::Step { level: 0.5 }
    }

    /// `r = 0.5 sin(0.2 t)`.
    pub fn sine() -> Self {
        Self::Sine {
            amplitude: 0.5,
            omega: 0.2,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Step { level } => level,
            Self::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Self::Zero | Self::Step { .. } => 0.0,
            Self::Sine { amplitude, omega } => amplitude * omega * (omega * t).cos(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_rate_is_derivative() {
        let r = ReferenceSignal::sine();
        let h = 1e-6;
        for t in [0.0, 1.3, 7.7] {
            let fd = (r.value(t + h) - r.value(t - h)) / (2.0 * h);
            assert!((fd - r.rate(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn step_is_flat() {
        let r = ReferenceSignal::step();
        assert_eq!(r.value(12.0), 0.5);
        assert_eq!(r.rate(12.0), 0.0);
    }
}
