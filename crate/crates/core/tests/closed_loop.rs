use asd_core::asd::{lyapunov_gamma, ParamSchedule};
use asd_core::benchmarks::{
    build_scenario, build_scenario_with, run_scenario, ReferenceKind, ScenarioError, ScenarioName, ScenarioOverrides,
    CSV_COLUMNS,
};
use asd_core::lti::TransferFunction;

fn tail_sup(time: &[f64], v: &[f64], from: f64) -> f64 {
    time.iter()
        .zip(v)
        .filter(|(t, _)| **t >= from)
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

#[test]
fn rohrs_step_threshold_holds_when_dt_halves() {
    for dt in [1e-3, 5e-4] {
        let ov = ScenarioOverrides {
            dt: Some(dt),
            ..Default::default()
        };
        let s = build_scenario_with(ScenarioName::Rohrs, None, &ov).unwrap();
        let res = run_scenario(&s, ReferenceKind::Step).unwrap();
        assert_eq!(res.metrics.window_start, 20.0);
        assert!(res.metrics.settled_sup_error <= 0.05, "dt={dt}: {}", res.metrics.settled_sup_error);
        assert!(res.invariants.all(), "{:?}", res.invariants);
    }
}

#[test]
fn cubic_plant_exact_compensation_limit() {
    let mut s = build_scenario(ScenarioName::Nonlinear, None).unwrap();
    s.plant.theta = ParamSchedule::Constant(vec![0.2]);
    s.theta_hat = vec![0.2];
    s.plant.disturbance = None;
    s.plant.delay = 0.0;
    s.plant.channel = TransferFunction::constant(1.0);
    let res = run_scenario(&s, ReferenceKind::Step).unwrap();
    let tr = &res.traces;
    let e: Vec<f64> = tr.get("y").unwrap().iter().zip(tr.get("r").unwrap()).map(|(y, r)| y - r).collect();
    let late = tail_sup(&tr.time, &e, 15.0);
    assert!(late < 1e-3, "{late}");
}

#[test]
fn rohrs_matched_model_disturbance_is_free_response() {
    let mut s = build_scenario(ScenarioName::Rohrs, None).unwrap();
    s.theta_hat = vec![-2.0];
    s.plant.channel = TransferFunction::constant(1.0);
    let res = run_scenario(&s, ReferenceKind::Step).unwrap();
    let d = res.traces.get("d_new_hat").unwrap();
    for (t, d) in res.traces.time.iter().zip(d) {
        assert!((d - (-t).exp()).abs() < 1e-6, "t={t}: {d}");
    }
}

/// `limsup|y − r| ≤ δ_r + γ‖b‖‖c‖δ_s` with both residuals measured over the
/// last quarter of the horizon.
///
/// On a step every residual decays towards round-off, where a limsup over a
/// finite window is meaningless, so the comparison starts at `FLOOR`.
const FLOOR: f64 = 1e-8;

#[test]
fn rohrs_tracking_obeys_composition_bound() {
    for reference in [ReferenceKind::Step, ReferenceKind::Sine] {
        let s = build_scenario(ScenarioName::Rohrs, None).unwrap();
        let res = run_scenario(&s, reference).unwrap();
        let tr = &res.traces;
        let from = 0.75 * s.config.horizon;
        let y = tr.get("y").unwrap();
        let r = tr.get("r").unwrap();
        let cx_new = tr.get("xnew_cx").unwrap();
        let cx_p = tr.get("xp_cx").unwrap();
        let (u, u_p) = (tr.get("u").unwrap(), tr.get("u_p").unwrap());
        let n = y.len();
        let err: Vec<f64> = (0..n).map(|k| y[k] - r[k]).collect();
        // y_p − r = cᵀx_p + d_new − r with d_new = y − cᵀx_new
        let primary: Vec<f64> = (0..n).map(|k| cx_p[k] + y[k] - cx_new[k] - r[k]).collect();
        let mismatch: Vec<f64> = (0..n).map(|k| u[k] - u_p[k]).collect();
        let delta_r = tail_sup(&tr.time, &primary, from);
        let delta_s = tail_sup(&tr.time, &mismatch, from);
        let model = s.design().unwrap().model;
        let gamma = lyapunov_gamma(&model.linear_matrix().unwrap()).unwrap().gamma;
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let bound = delta_r + gamma * norm(&model.b_in) * norm(&model.c_out) * delta_s;
        let measured = tail_sup(&tr.time, &err, from);
        assert!(measured <= bound + FLOOR, "{reference}: {measured} > {bound}");
    }
}

#[test]
fn rohrs_xi_respects_channel_bound() {
    let s = build_scenario(ScenarioName::Rohrs, None).unwrap();
    let res = run_scenario(&s, ReferenceKind::Sine).unwrap();
    assert!(res.metrics.sup_xi <= 0.12 * s.a);
    assert!(res.invariants.xi_bounded);
}

#[test]
fn noisy_runs_repeat_exactly_for_a_seed() {
    let ov = ScenarioOverrides {
        seed: Some(7),
        horizon: Some(10.0),
        ..Default::default()
    };
    let s = build_scenario_with(ScenarioName::TwoCart, Some(2), &ov).unwrap();
    let a = run_scenario(&s, ReferenceKind::Step).unwrap();
    let b = run_scenario(&s, ReferenceKind::Step).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.traces.to_csv(&CSV_COLUMNS).unwrap(), b.traces.to_csv(&CSV_COLUMNS).unwrap());

    let other = ScenarioOverrides { seed: Some(8), ..ov };
    let c = run_scenario(&build_scenario_with(ScenarioName::TwoCart, Some(2), &other).unwrap(), ReferenceKind::Step)
        .unwrap();
    assert_ne!(a.traces.get("zeta"), c.traces.get("zeta"));
}

#[test]
fn csv_header_is_fixed() {
    let ov = ScenarioOverrides {
        horizon: Some(0.01),
        ..Default::default()
    };
    let s = build_scenario_with(ScenarioName::Rohrs, None, &ov).unwrap();
    let csv = run_scenario(&s, ReferenceKind::Step).unwrap().traces.to_csv(&CSV_COLUMNS).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,y,r,u,u_p,v,d_new_hat,xi");
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn scenario_requests_are_validated() {
    assert_eq!(build_scenario(ScenarioName::TwoCart, None).unwrap_err(), ScenarioError::MissingCase);
    assert_eq!(build_scenario(ScenarioName::TwoCart, Some(9)).unwrap_err(), ScenarioError::UnknownCase(9));
    assert!(matches!(
        build_scenario(ScenarioName::Rohrs, Some(1)),
        Err(ScenarioError::UnexpectedCase { .. })
    ));
    assert!("pendulum".parse::<ScenarioName>().is_err());
    let bad = ScenarioOverrides {
        dt: Some(-1.0),
        ..Default::default()
    };
    assert!(build_scenario_with(ScenarioName::Rohrs, None, &bad).is_err());
}
