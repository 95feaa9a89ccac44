use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use super::AsdError;
use crate::linalg;

/// Eigenvalue floor for positive definiteness.
const PD_FLOOR: f64 = 1e-12;

/// Lyapunov pair `(P, Q)` with `AᵀP + PA = −Q` and the ISS gain
/// `γ = 2 λ_max(P)² / (λ_min(P) λ_min(Q))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainCertificate {
    #[serde(serialize_with = "rows")]
    pub p: DMatrix<f64>,
    #[serde(serialize_with = "rows")]
    pub q: DMatrix<f64>,
    pub gamma: f64,
}

fn rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    serde::Serialize::serialize(&v, s)
}

impl GainCertificate {
    /// Builds a certificate from a given pair, checking definiteness.
    pub fn from_pair(p: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self, AsdError> {
        let ep = linalg::symmetric_eigenvalues(&p);
        let eq = linalg::symmetric_eigenvalues(&q);
        let (pmin, pmax) = (ep[0], ep[ep.len() - 1]);
        let qmin = eq[0];
        if pmin <= PD_FLOOR || qmin <= PD_FLOOR {
            return Err(AsdError::NotPositiveDefinite {
                lambda_min_p: pmin,
                lambda_min_q: qmin,
            });
        }
        Ok(Self {
            gamma: 2.0 * pmax * pmax / (pmin * qmin),
            p,
            q,
        })
    }

    /// `‖AᵀP + PA + Q‖_F`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        (a.transpose() * &self.p + &self.p * a + &self.q).norm()
    }

    pub fn lambda_min_p(&self) -> f64 {
        linalg::symmetric_eigenvalues(&self.p)[0]
    }
}

/// Solves `AᵀP + PA = −I` and returns the certificate for Hurwitz `A`.
pub fn lyapunov_gamma(a: &DMatrix<f64>) -> Result<GainCertificate, AsdError> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(AsdError::Dimension(format!("A must be square and nonempty, got {}x{}", n, a.ncols())));
    }
    if !linalg::is_hurwitz(a, crate::lti::STABILITY_MARGIN) {
        return Err(AsdError::NotHurwitz {
            eigenvalues: linalg::eigenvalues(a).iter().map(|l| (l.re, l.im)).collect(),
        });
    }
    let q = DMatrix::<f64>::identity(n, n);
    let p = linalg::lyapunov_solve(a, &q).ok_or_else(|| AsdError::Dimension("singular Lyapunov operator".into()))?;
    GainCertificate::from_pair(p, q)
}

fn write_matrix(f: &mut fmt::Formatter<'_>, name: &str, m: &DMatrix<f64>) -> fmt::Result {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ")))
        .collect();
    writeln!(f, "{name} = [{}]", rows.join(", "))
}

impl fmt::Display for GainCertificate {
    /// TOML-compatible audit text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gamma = {:e}", self.gamma)?;
        write_matrix(f, "p", &self.p)?;
        write_matrix(f, "q", &self.q)
    }
}
