//! Real polynomials in descending powers of `s`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg;

/// Coefficients below this fraction of the largest one are treated as
/// round-off when trimming leading terms.
const TRIM_REL: f64 = 1e-13;

/// A real polynomial stored with descending powers: `[a_n, ..., a_0]`.
///
/// The zero polynomial is `[0.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(if coeffs.is_empty() { vec![0.0] } else { coeffs });
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    /// `s - root` for a real root.
    pub fn linear_factor(root: f64) -> Self {
        Poly(vec![1.0, -root])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.len() == 1 && self.0[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.0[0]
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn trim(&mut self) {
        let scale = self.max_abs();
        let cut = self
            .0
            .iter()
            .position(|c| c.abs() > TRIM_REL * scale && *c != 0.0)
            .unwrap_or(self.0.len() - 1);
        self.0.drain(..cut);
        if scale == 0.0 {
            self.0 = vec![0.0];
        }
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.0
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let pad = |p: &Poly| {
            let mut v = vec![0.0; n - p.0.len()];
            v.extend_from_slice(&p.0);
            v
        };
        let (a, b) = (pad(self), pad(other));
        Poly::new(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    /// Polynomial long division: `self = q·divisor + r`, `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dn = divisor.degree();
        if self.degree() < dn {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.0.clone();
        let qlen = self.degree() - dn + 1;
        let mut quot = vec![0.0; qlen];
        let lead = divisor.leading();
        for i in 0..qlen {
            let f = rem[i] / lead;
            quot[i] = f;
            for (j, d) in divisor.0.iter().enumerate() {
                rem[i + j] -= f * d;
            }
        }
        let r = rem[qlen..].to_vec();
        (Poly::new(quot), Poly::new(if r.is_empty() { vec![0.0] } else { r }))
    }

    /// Roots as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            comp[(0, j)] = -self.0[j + 1] / lead;
        }
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        linalg::eigenvalues(&comp)
    }

    /// Monic polynomial with the given roots; complex roots must come in
    /// conjugate pairs.
    pub fn from_roots(roots: &[Complex64]) -> Poly {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * r;
            }
            acc = next;
        }
        Poly::new(acc.iter().map(|c| c.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_leading_zeros() {
        assert_eq!(Poly::new(vec![0.0, 0.0, 2.0, 1.0]).coeffs(), &[2.0, 1.0]);
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
        assert!(Poly::new(vec![]).is_zero());
    }

    #[test]
    fn division_recovers_factors() {
        let a = Poly::new(vec![1.0, 3.0, 2.0]);
        let (q, r) = a.div_rem(&Poly::new(vec![1.0, 1.0]));
        assert_eq!(q.coeffs(), &[1.0, 2.0]);
        assert!(r.is_zero());
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = Poly::new(vec![1.0, 30.0, 229.0]).roots();
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((r[0].re + 15.0).abs() < 1e-12 && (r[0].im + 2.0).abs() < 1e-12);
    }

    #[test]
    fn multiply_and_evaluate() {
        let p = Poly::new(vec![2.0, 1.0]).mul(&Poly::new(vec![2.0, 1.0]));
        assert_eq!(p.coeffs(), &[4.0, 4.0, 1.0]);
        assert_eq!(p.eval(1.0), 9.0);
    }
}
