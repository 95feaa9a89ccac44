use serde::Serialize;

use super::ScenarioError;
use crate::sim::Traces;

/// Default settled fraction of the horizon.
pub const DEFAULT_SETTLE_FRACTION: f64 = 0.5;

/// Summary numbers of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub window_start: f64,
    pub window_end: f64,
    /// `sup |y − r|` over the settled window.
    pub settled_sup_error: f64,
    /// RMS of `y − r` over the settled window.
    pub settled_rms_error: f64,
    /// `sup |ξ|` over the whole run.
    pub sup_xi: f64,
    /// `max |x_p + x_s − x_new|`, `max |y_p + y_s − y|`, relative to
    /// `1 + max |x_new|`.
    pub decomposition_residual: f64,
    /// `max |x̂_new − x_new|` and `max |x̂_p − x_p|`.
    pub observer_residual: f64,
    /// `max |d̂_new − (y − cᵀx_new)|`.
    pub d_new_identity_residual: f64,
    /// `max |z_p + z_s − z|`, `max |u_zp + u_zs − u|`, relative to
    /// `1 + max |z|` and `1 + max |u|`.
    pub saturation_split_residual: f64,
    /// Fraction of samples with `|v| > a`.
    pub saturated_fraction: f64,
}

/// `sup` and RMS of `y − r` for samples with `t ≥ from`.
pub fn tracking_error(time: &[f64], y: &[f64], r: &[f64], from: f64) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    let mut count = 0usize;
    for ((t, y), r) in time.iter().zip(y).zip(r) {
        if *t + 1e-12 >= from {
            let e = y - r;
            sup = sup.max(e.abs());
            sq += e * e;
            count += 1;
        }
    }
    let rms = if count > 0 { (sq / count as f64).sqrt() } else { 0.0 };
    (sup, rms)
}

/// Start of the trailing `fraction` of the traced horizon.
pub fn settled_window_start(traces: &Traces, fraction: f64) -> f64 {
    let end = traces.time.last().copied().unwrap_or(0.0);
    end * (1.0 - fraction.clamp(0.0, 1.0))
}

fn column<'a>(traces: &'a Traces, name: &str) -> Result<&'a [f64], ScenarioError> {
    traces
        .get(name)
        .ok_or_else(|| ScenarioError::Invalid(format!("trace '{name}' missing")))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `max_t |Σ parts − whole|`.
fn sum_residual(parts: &[&[f64]], whole: &[f64]) -> f64 {
    (0..whole.len())
        .map(|k| (parts.iter().map(|p| p[k]).sum::<f64>() - whole[k]).abs())
        .fold(0.0, f64::max)
}

/// Metrics of a closed-loop run with plant order `n`, settled from `from`.
pub fn compute_metrics(traces: &Traces, from: f64, n: usize) -> Result<Metrics, ScenarioError> {
    if traces.is_empty() {
        return Err(ScenarioError::Invalid("no samples to evaluate".into()));
    }
    let y = column(traces, "y")?;
    let r = column(traces, "r")?;
    let (settled_sup_error, settled_rms_error) = tracking_error(&traces.time, y, r, from);

    let mut decomposition: f64 = 0.0;
    let mut observer: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let x_new = column(traces, &format!("xnew_x{i}"))?;
        let x_p = column(traces, &format!("xp_x{i}"))?;
        let x_s = column(traces, &format!("xs_x{i}"))?;
        scale = scale.max(max_abs(x_new));
        decomposition = decomposition.max(sum_residual(&[x_p, x_s], x_new));
        let xh_new = column(traces, &format!("xnew_hat{i}"))?;
        let xh_p = column(traces, &format!("xp_hat{i}"))?;
        observer = observer.max(sum_residual(&[xh_new], x_new));
        observer = observer.max(sum_residual(&[xh_p], x_p));
    }
    let cx_new = column(traces, "xnew_cx")?;
    let y_p_minus_d = column(traces, "xp_cx")?;
    let y_s = column(traces, "xs_cx")?;
    // y_p + y_s − y = cᵀx_p + d_new + cᵀx_s − (cᵀx_new + d_new)
    decomposition = decomposition.max(sum_residual(&[y_p_minus_d, y_s], cx_new));
    decomposition /= 1.0 + scale;

    let d_hat = column(traces, "d_new_hat")?;
    let d_new_identity_residual = (0..y.len())
        .map(|k| (d_hat[k] - (y[k] - cx_new[k])).abs())
        .fold(0.0, f64::max);

    let mut split: f64 = 0.0;
    let mut i = 0;
    while let Some(z) = traces.get(&format!("z{i}")) {
        let z_p = column(traces, &format!("z_p{i}"))?;
        let z_s = column(traces, &format!("z_s{i}"))?;
        split = split.max(sum_residual(&[z_p, z_s], z) / (1.0 + max_abs(z)));
        i += 1;
    }
    let u = column(traces, "u")?;
    let u_zp = column(traces, "u_zp")?;
    let u_zs = column(traces, "u_zs")?;
    split = split.max(sum_residual(&[u_zp, u_zs], u) / (1.0 + max_abs(u)));

    let v = column(traces, "v")?;
    let sat = column(traces, "sat_v")?;
    let saturated = v.iter().zip(sat).filter(|(v, s)| v != s).count();

    Ok(Metrics {
        window_start: from,
        window_end: *traces.time.last().unwrap(),
        settled_sup_error,
        settled_rms_error,
        sup_xi: max_abs(column(traces, "xi")?),
        decomposition_residual: decomposition,
        observer_residual: observer,
        d_new_identity_residual,
        saturation_split_residual: split,
        saturated_fraction: saturated as f64 / v.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_tracking_has_zero_error() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let y = vec![0.5; 100];
        assert_eq!(tracking_error(&t, &y, &y, 5.0), (0.0, 0.0));
    }

    #[test]
    fn sine_error_statistics() {
        let dt = 1e-3;
        let t: Vec<f64> = (0..=(20.0 * std::f64::consts::PI / dt) as usize).map(|k| k as f64 * dt).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.1 * t.sin()).collect();
        let r = vec![0.0; t.len()];
        let (sup, rms) = tracking_error(&t, &y, &r, 0.0);
        assert!((sup - 0.1).abs() < 1e-6);
        assert!((rms - 0.1 / 2f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn settled_window_is_trailing_fraction() {
        let mut tr = Traces::new(1.0, &["y".to_string()], 11);
        for k in 0..=10 {
            tr.push_row(k as f64, &[0.0]);
        }
        assert_eq!(settled_window_start(&tr, 0.5), 5.0);
    }
}
