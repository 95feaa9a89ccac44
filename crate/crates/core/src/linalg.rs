//! Small dense linear-algebra helpers shared by the LTI and ASD layers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues of a real square matrix (empty for a 0×0 matrix).
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.complex_eigenvalues().iter().copied().collect()
}

/// True iff every eigenvalue has real part below `-margin`.
pub fn is_hurwitz(a: &DMatrix<f64>, margin: f64) -> bool {
    eigenvalues(a).iter().all(|l| l.re < -margin)
}

/// Characteristic polynomial and resolvent coefficients by Faddeev–LeVerrier.
///
/// Returns `(p, n_k)` with `det(sI - A) = s^n + p[1] s^{n-1} + ... + p[n]`
/// (descending, `p[0] = 1`) and `adj(sI - A) = Σ_k n_k[k] s^{n-1-k}`.
pub fn faddeev_leverrier(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut adj = Vec::with_capacity(n);
    if n == 0 {
        return (coeffs, adj);
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mut m = eye.clone();
    for k in 1..=n {
        let am = a * &m;
        let ck = -am.trace() / k as f64;
        adj.push(m.clone());
        coeffs.push(ck);
        m = am + &eye * ck;
    }
    (coeffs, adj)
}

/// Solves `Aᵀ P + P A = -Q` through the Kronecker-vectorized system.
///
/// Returns `None` when the Lyapunov operator is singular, which happens iff
/// two eigenvalues of `A` sum to zero.
pub fn lyapunov_solve(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    // vec(AᵀP) = (I ⊗ Aᵀ) vec(P), vec(PA) = (Aᵀ ⊗ I) vec(P), column-major vec.
    let op = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
    let sol = op.lu().solve(&rhs)?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Some((&p + p.transpose()) * 0.5)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_of_companion() {
        // s^2 + 3 s + 2
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let (p, adj) = faddeev_leverrier(&a);
        assert_eq!(p.len(), 3);
        assert!((p[1] - 3.0).abs() < 1e-12 && (p[2] - 2.0).abs() < 1e-12);
        assert_eq!(adj.len(), 2);
    }

    #[test]
    fn lyapunov_residual_small() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, 0.0, -3.0, 1.0, 0.5, 0.0, -2.0]);
        let q = DMatrix::identity(3, 3);
        let p = lyapunov_solve(&a, &q).unwrap();
        let res = a.transpose() * &p + &p * &a + &q;
        assert!(res.norm() < 1e-12);
        assert!(symmetric_eigenvalues(&p)[0] > 0.0);
    }

    #[test]
    fn hurwitz_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(!is_hurwitz(&a, 1e-9));
        assert!(is_hurwitz(&(-DMatrix::<f64>::identity(2, 2)), 1e-9));
    }
}
