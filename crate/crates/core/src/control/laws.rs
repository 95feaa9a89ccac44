use super::ControlError;
use crate::lti::{proper_inverse, realize, StateSpaceModel, TransferFunction};

/// Rohrs tracking law `u_p = ½[(2 + θ̂)x_p + r + ṙ − d − ḋ]`, which gives
/// primary error dynamics `ė_p = −e_p`.
pub fn rohrs_law(x_p: f64, r: f64, r_dot: f64, d: f64, d_dot: f64, theta_hat: f64) -> f64 {
    0.5 * ((2.0 + theta_hat) * x_p + r + r_dot - d - d_dot)
}

/// Cubic-plant tracking law `u_p = (1 + θ̂)x_p³ + ṙ + r − ḋ − d`.
pub fn nonlinear_law(x_p: f64, r: f64, r_dot: f64, d: f64, d_dot: f64, theta_hat: f64) -> f64 {
    (1.0 + theta_hat) * x_p.powi(3) + r_dot + r - d_dot - d
}

/// `Q(s) = 1/∏_{k=1}^{5}(s/(10k) + 1)`.
pub fn fifth_order_filter() -> TransferFunction {
    (1..=5)
        .map(|k| TransferFunction::first_order_lag(1.0 / (10.0 * k as f64)))
        .fold(TransferFunction::constant(1.0), |acc, g| acc.series(&g))
}

/// Feedforward inversion driven by `e = r − d̂_new`: one realization of
/// `Q G⁻¹` producing `u_p` and one of `Q C⁻¹ G⁻¹` producing `v` directly.
#[derive(Debug, Clone)]
pub struct InversionCompensator {
    pub primary: TransferFunction,
    pub input: TransferFunction,
    primary_model: StateSpaceModel,
    input_model: StateSpaceModel,
}

impl InversionCompensator {
    /// Inverts `g` (the primary plant `G_yu`) through shaping filter `c`
    /// and low-pass `q`.
    pub fn new(g: &TransferFunction, c: &TransferFunction, q: &TransferFunction) -> Result<Self, ControlError> {
        let primary = proper_inverse(g, q)?;
        let input = proper_inverse(&g.series(c), q)?;
        Ok(Self {
            primary_model: realize(&primary)?,
            input_model: realize(&input)?,
            primary,
            input,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.primary_model.order() + self.input_model.order()
    }

    /// `(u_p, v)` for compensator state `w` and error `e`.
    pub fn outputs(&self, w: &[f64], e: f64) -> (f64, f64) {
        let m = self.primary_model.order();
        (self.primary_model.output(&w[..m], e), self.input_model.output(&w[m..], e))
    }

    pub fn rates(&self, w: &[f64], e: f64, dw: &mut [f64]) {
        let m = self.primary_model.order();
        self.primary_model.rate(&w[..m], e, &mut dw[..m]);
        self.input_model.rate(&w[m..], e, &mut dw[m..]);
    }
}

/// Problem-1 tracking law selected by a scenario.
#[derive(Debug, Clone)]
pub enum TrackingLaw {
    Rohrs { theta_hat: f64 },
    Nonlinear { theta_hat: f64 },
    Inversion(Box<InversionCompensator>),
}

/// Time constant `T` of a shaping filter `C(s) = 1/(T s + 1)`, for which
/// `v = C⁻¹ u_p = u_p + T u̇_p`.
pub fn lead_time_constant(c: &TransferFunction) -> Result<f64, ControlError> {
    let (num, den) = (c.num(), c.den());
    if num.len() == 1 && den.len() == 2 && den[1] > 0.0 && (num[0] - den[1]).abs() <= 1e-12 * den[1] {
        Ok(1.0 / den[1])
    } else {
        Err(ControlError::UnsupportedFilter(c.to_string()))
    }
}

/// `v = u_p + T u̇_p`, the realization of `C⁻¹(s) u_p` for first-order `C`.
pub fn realize_input(u_p: f64, u_p_dot: f64, time_constant: f64) -> f64 {
    u_p + time_constant * u_p_dot
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn rohrs_law_examples() {
        assert!((rohrs_law(0.0, 0.5, 0.0, 0.0, 0.0, 0.0) - 0.25).abs() < 1e-15);
        assert_eq!(rohrs_law(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn nonlinear_law_examples() {
        assert_eq!(nonlinear_law(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0);
        assert_eq!(nonlinear_law(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn filter_has_unit_dc_and_relative_degree_five() {
        let q = fifth_order_filter();
        assert!((q.dc_gain() - 1.0).abs() < 1e-12);
        assert_eq!(q.relative_degree(), 5);
    }

    #[test]
    fn lead_constant_of_standard_filter() {
        assert_eq!(lead_time_constant(&TransferFunction::first_order_lag(2.0)).unwrap(), 2.0);
        let two = TransferFunction::new(vec![1.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert!(lead_time_constant(&two).is_err());
    }

    #[test]
    fn compensator_inverts_plant() {
        let g = TransferFunction::new(vec![1.0, 3.0], vec![1.0, 4.0, 5.0, 2.0]).unwrap();
        let c = TransferFunction::first_order_lag(2.0);
        let q = fifth_order_filter();
        let comp = InversionCompensator::new(&g, &c, &q).unwrap();
        let jw = Complex64::new(0.0, 0.2);
        let lhs = (g.eval(jw) * comp.primary.eval(jw)).norm();
        assert!((lhs - q.eval(jw).norm()).abs() < 1e-9);
        let lhs_v = (g.eval(jw) * c.eval(jw) * comp.input.eval(jw)).norm();
        assert!((lhs_v - q.eval(jw).norm()).abs() < 1e-9);
        assert!(comp.input.is_strictly_proper());
    }

    #[test]
    fn non_minimum_phase_rejected() {
        let g = TransferFunction::new(vec![-1.0, 1.0], vec![1.0, 3.0, 2.0]).unwrap();
        let c = TransferFunction::first_order_lag(2.0);
        assert!(InversionCompensator::new(&g, &c, &fifth_order_filter()).is_err());
    }
}
