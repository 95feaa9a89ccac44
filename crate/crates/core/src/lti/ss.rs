use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::poly::Poly;
use super::tf::TransferFunction;
use super::LtiError;
use crate::linalg;

/// SISO state-space model `ẋ = A x + b u`, `y = cᵀ x + d u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b_in: DVector<f64>,
    pub c_out: DVector<f64>,
    pub d_thru: f64,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b_in: DVector<f64>,
        c_out: DVector<f64>,
        d_thru: f64,
    ) -> Result<Self, LtiError> {
        let n = a.nrows();
        if a.ncols() != n || b_in.len() != n || c_out.len() != n {
            return Err(LtiError::Dimension(format!(
                "A is {}x{}, b has {}, c has {}",
                a.nrows(),
                a.ncols(),
                b_in.len(),
                c_out.len()
            )));
        }
        Ok(Self { a, b_in, c_out, d_thru })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `ẋ` for state `x` and input `u`, written into `dx`.
    pub fn rate(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let mut acc = self.b_in[i] * u;
            for j in 0..n {
                acc += self.a[(i, j)] * x[j];
            }
            dx[i] = acc;
        }
    }

    pub fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c_out.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d_thru * u
    }

    /// `cᵀ (jωI − A)⁻¹ b + d`.
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        let n = self.order();
        let d = Complex64::new(self.d_thru, 0.0);
        if n == 0 {
            return d;
        }
        let s = Complex64::new(0.0, omega);
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let b = DVector::<Complex64>::from_iterator(n, self.b_in.iter().map(|v| Complex64::new(*v, 0.0)));
        match m.lu().solve(&b) {
            Some(x) => self.c_out.iter().zip(x.iter()).map(|(c, x)| x * *c).sum::<Complex64>() + d,
            None => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    pub fn dc_gain(&self) -> f64 {
        self.freq_response(0.0).re
    }

    /// Transfer function `cᵀ adj(sI − A) b / det(sI − A) + d`.
    pub fn transfer_function(&self) -> Result<TransferFunction, LtiError> {
        let (char_poly, adj) = linalg::faddeev_leverrier(&self.a);
        let n = self.order();
        let mut num = vec![0.0; n + 1];
        for (k, nk) in adj.iter().enumerate() {
            num[k + 1] = (self.c_out.transpose() * nk * &self.b_in)[(0, 0)];
        }
        let num = Poly::new(num).add(&Poly::new(char_poly.clone()).scale(self.d_thru));
        TransferFunction::from_polys(num, Poly::new(char_poly))
    }
}

fn split_proper(tf: &TransferFunction) -> Result<(f64, Vec<f64>, Vec<f64>), LtiError> {
    if !tf.is_proper() {
        return Err(LtiError::Improper {
            num_degree: tf.num().len() - 1,
            den_degree: tf.den().len() - 1,
        });
    }
    let n = tf.order();
    let (q, r) = tf.num_poly().div_rem(tf.den_poly());
    let d = if tf.relative_degree() == 0 { q.coeffs()[0] } else { 0.0 };
    let rem = if tf.relative_degree() == 0 { r } else { tf.num_poly().clone() };
    // strictly proper remainder padded to n coefficients r_1 .. r_n
    let mut rcoef = vec![0.0; n];
    let rc = rem.coeffs();
    if !rem.is_zero() {
        rcoef[n - rc.len()..].copy_from_slice(rc);
    }
    Ok((d, tf.den()[1..].to_vec(), rcoef))
}

/// Observable canonical realization of a proper transfer function.
///
/// With `den = sⁿ + a₁sⁿ⁻¹ + … + aₙ` and strictly proper remainder
/// `r₁sⁿ⁻¹ + … + rₙ`, the first column of `A` is `−a`, the superdiagonal is
/// ones, `b = r` and `c = e₁`. A first-order lag `1/(Ts+1)` realizes as
/// `ż = −z/T + σ/T`, `u = z`.
pub fn realize(tf: &TransferFunction) -> Result<StateSpaceModel, LtiError> {
    let (d, a_coef, r) = split_proper(tf)?;
    let n = a_coef.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, 0)] = -a_coef[i];
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    let mut c = DVector::<f64>::zeros(n);
    if n > 0 {
        c[0] = 1.0;
    }
    StateSpaceModel::new(a, DVector::from_vec(r), c, d)
}

/// Controllable canonical realization; same transfer function as
/// [`realize`], different coordinates.
pub fn realize_controllable(tf: &TransferFunction) -> Result<StateSpaceModel, LtiError> {
    let (d, a_coef, r) = split_proper(tf)?;
    let n = a_coef.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -a_coef[j];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    if n > 0 {
        b[0] = 1.0;
    }
    StateSpaceModel::new(a, b, DVector::from_vec(r), d)
}
