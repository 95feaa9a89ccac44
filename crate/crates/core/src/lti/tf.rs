use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::LtiError;

/// Real part a pole must stay below to count as stable.
pub const STABILITY_MARGIN: f64 = 1e-9;
/// Root-match tolerance for common-factor cancellation.
pub const CANCEL_TOL: f64 = 1e-9;

/// A SISO rational transfer function `num(s) / den(s)`.
///
/// Both polynomials use descending powers of `s`. After construction the
/// denominator is monic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TransferFunction {
    num: Poly,
    den: Poly,
}

/// How [`compose`] combines its operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    Series,
    Parallel,
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self, LtiError> {
        Self::from_polys(Poly::new(num), Poly::new(den))
    }

    pub(crate) fn from_polys(num: Poly, den: Poly) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        if num.coeffs().iter().chain(den.coeffs()).any(|c| !c.is_finite()) {
            return Err(LtiError::NonFinite);
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: Poly::constant(k),
            den: Poly::constant(1.0),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `1 / (T s + 1)`.
    pub fn first_order_lag(time_constant: f64) -> Self {
        Self::new(vec![1.0], vec![time_constant, 1.0]).expect("nonzero denominator")
    }

    pub fn num(&self) -> &[f64] {
        self.num.coeffs()
    }

    pub fn den(&self) -> &[f64] {
        self.den.coeffs()
    }

    pub(crate) fn num_poly(&self) -> &Poly {
        &self.num
    }

    pub(crate) fn den_poly(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    /// `deg(den) - deg(num)`; negative for improper functions.
    pub fn relative_degree(&self) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        self.den.degree() as i64 - self.num.degree() as i64
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree() >= 0
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree() > 0
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// `G(jω)`.
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn dc_gain(&self) -> f64 {
        self.num.eval(0.0) / self.den.eval(0.0)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if self.is_zero() {
            return Vec::new();
        }
        self.num.roots()
    }

    /// True iff every pole has real part below `-STABILITY_MARGIN`.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < -STABILITY_MARGIN)
    }

    pub fn is_minimum_phase(&self) -> bool {
        !self.is_zero() && self.zeros().iter().all(|z| z.re < -STABILITY_MARGIN)
    }

    /// Slowest time constant `1 / min |Re p|`; zero for a static gain.
    pub fn slowest_time_constant(&self) -> f64 {
        self.poles()
            .iter()
            .map(|p| 1.0 / p.re.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// `1 / G`, with no properness check.
    pub fn reciprocal(&self) -> Result<Self, LtiError> {
        if self.is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        Self::from_polys(self.den.clone(), self.num.clone())
    }

    pub fn series(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.num);
        let den = self.den.mul(&other.den);
        cancel_common_factors(num, den)
    }

    pub fn parallel(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        cancel_common_factors(num, den)
    }
}

/// Folds `tfs` in series (product) or parallel (sum).
pub fn compose(tfs: &[TransferFunction], mode: Composition) -> Result<TransferFunction, LtiError> {
    let (first, rest) = tfs.split_first().ok_or(LtiError::EmptyComposition)?;
    Ok(rest.iter().fold(first.clone(), |acc, g| match mode {
        Composition::Series => acc.series(g),
        Composition::Parallel => acc.parallel(g),
    }))
}

/// `q · g⁻¹`, rejecting inversions that would be unstable or improper.
pub fn proper_inverse(g: &TransferFunction, q: &TransferFunction) -> Result<TransferFunction, LtiError> {
    if !g.is_minimum_phase() {
        return Err(LtiError::NonMinimumPhase {
            zeros: g.zeros().iter().map(|z| (z.re, z.im)).collect(),
        });
    }
    let needed = g.relative_degree();
    let available = q.relative_degree();
    if available < needed {
        return Err(LtiError::InsufficientFilterOrder { needed, available });
    }
    Ok(q.series(&g.reciprocal()?))
}

/// True iff all poles of `tf` lie strictly in the open left half plane.
pub fn stability_check(tf: &TransferFunction) -> bool {
    tf.is_stable()
}

/// Cancels pole/zero pairs that coincide within [`CANCEL_TOL`] and divide
/// both polynomials exactly.
fn cancel_common_factors(mut num: Poly, mut den: Poly) -> TransferFunction {
    if num.is_zero() {
        return TransferFunction::zero();
    }
    'outer: loop {
        let zs = num.roots();
        let ps = den.roots();
        for z in &zs {
            for p in &ps {
                if (z - p).norm() > CANCEL_TOL * (1.0 + p.norm()) {
                    continue;
                }
                let factor = if p.im.abs() <= CANCEL_TOL {
                    Poly::linear_factor(0.5 * (z.re + p.re))
                } else {
                    let m = 0.5 * (z + p);
                    Poly::new(vec![1.0, -2.0 * m.re, m.norm_sqr()])
                };
                let (qn, rn) = num.div_rem(&factor);
                let (qd, rd) = den.div_rem(&factor);
                let scale_n = num.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
                let scale_d = den.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
                let exact = rn.coeffs().iter().all(|c| c.abs() <= CANCEL_TOL * scale_n)
                    && rd.coeffs().iter().all(|c| c.abs() <= CANCEL_TOL * scale_d);
                if exact {
                    num = qn;
                    den = qd;
                    continue 'outer;
                }
            }
        }
        break;
    }
    TransferFunction::from_polys(num, den).expect("cancellation keeps a nonzero denominator")
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |p: &Poly| {
            p.coeffs()
                .iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "num: [{}]; den: [{}]", join(&self.num), join(&self.den))
    }
}

impl FromStr for TransferFunction {
    type Err = LtiError;

    /// Parses `"num: [a_n ... a_0]; den: [b_m ... b_0]"`; commas between
    /// coefficients are accepted.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| LtiError::Parse(format!("{why} in {text:?}"));
        let mut num = None;
        let mut den = None;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, list) = part.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let list = list.trim();
            let inner = list
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or_else(|| bad("coefficients must be bracketed"))?;
            let coeffs = inner
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad coefficient")))
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.is_empty() {
                return Err(bad("empty coefficient list"));
            }
            match key.trim() {
                "num" => num = Some(coeffs),
                "den" => den = Some(coeffs),
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }
        TransferFunction::new(num.ok_or_else(|| bad("missing num"))?, den.ok_or_else(|| bad("missing den"))?)
    }
}

impl TryFrom<String> for TransferFunction {
    type Error = LtiError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TransferFunction> for String {
    fn from(tf: TransferFunction) -> String {
        tf.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> TransferFunction {
        TransferFunction::first_order_lag(2.0)
    }

    fn h() -> TransferFunction {
        TransferFunction::new(vec![229.0], vec![1.0, 30.0, 229.0]).unwrap()
    }

    #[test]
    fn canonical_monic_denominator() {
        let g = c();
        assert_eq!(g.den(), &[1.0, 0.5]);
        assert_eq!(g.num(), &[0.5]);
        assert!(g.is_strictly_proper());
    }

    #[test]
    fn series_with_inverse_cancels_to_one() {
        let inv = TransferFunction::new(vec![2.0, 1.0], vec![1.0]).unwrap();
        let one = compose(&[c(), inv], Composition::Series).unwrap();
        assert_eq!(one.den(), &[1.0]);
        assert!((one.num()[0] - 1.0).abs() < 1e-12 && one.num().len() == 1);
    }

    #[test]
    fn parallel_with_negative_unit() {
        let g = compose(&[h(), TransferFunction::constant(-1.0)], Composition::Parallel).unwrap();
        // -s^2 - 30 s
        assert_eq!(g.num(), &[-1.0, -30.0, 0.0]);
        assert_eq!(g.den(), &[1.0, 30.0, 229.0]);
    }

    #[test]
    fn squaring_first_order_lag() {
        let g = c().series(&c());
        // 1/(4s^2+4s+1) normalized
        assert_eq!(g.den(), &[1.0, 1.0, 0.25]);
        assert_eq!(g.num(), &[0.25]);
    }

    #[test]
    fn stability_examples() {
        assert!(stability_check(&c()));
        assert!(!stability_check(&TransferFunction::new(vec![1.0], vec![1.0, -1.0]).unwrap()));
        assert!(stability_check(&h()));
    }

    #[test]
    fn inverse_of_first_order() {
        let q = TransferFunction::first_order_lag(0.1);
        let inv = proper_inverse(&c(), &q).unwrap();
        let want = TransferFunction::new(vec![2.0, 1.0], vec![0.1, 1.0]).unwrap();
        assert_eq!(inv, want);
    }

    #[test]
    fn inverse_rejects_nonminimum_phase() {
        let g = TransferFunction::new(vec![1.0, -1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let err = proper_inverse(&g, &TransferFunction::first_order_lag(0.1)).unwrap_err();
        assert!(matches!(err, LtiError::NonMinimumPhase { .. }));
    }

    #[test]
    fn inverse_rejects_short_filter() {
        let err = proper_inverse(&c().series(&c()), &TransferFunction::first_order_lag(0.1)).unwrap_err();
        assert!(matches!(err, LtiError::InsufficientFilterOrder { needed: 2, available: 1 }));
    }

    #[test]
    fn text_round_trip() {
        let g: TransferFunction = "num: [229]; den: [1, 30, 229]".parse().unwrap();
        assert_eq!(g, h());
        let back: TransferFunction = g.to_string().parse().unwrap();
        assert_eq!(back, g);
        assert!("num: [1]".parse::<TransferFunction>().is_err());
        assert!("num: [1]; den: [0]".parse::<TransferFunction>().is_err());
    }
}
