use std::path::Path;
use std::process::{Command, Output};

fn asd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asd")).args(args).output().expect("binary runs")
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn run_writes_fixed_schema_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let o = asd(&["run", "rohrs", "--ref", "step", "--horizon", "2", "--out", out_dir(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rohrs_step.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,y,r,u,u_p,v,d_new_hat,xi");
    assert_eq!(lines.count(), 2001);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rohrs_step_metrics.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"], "rohrs");
    assert_eq!(json["invariants"]["additive_sum"], true);
    assert!(json["metrics"]["sup_xi"].as_f64().unwrap() <= json["xi_bound"].as_f64().unwrap());
}

#[test]
fn seeded_two_cart_runs_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = asd(&["run", "twocart", "--case", "2", "--seed", "7", "--horizon", "5", "--out", out_dir(dir.path())]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["twocart_step_2.csv", "twocart_step_2_metrics.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn invalid_requests_exit_with_code_two() {
    for args in [
        &["run", "twocart", "--case", "9"][..],
        &["run", "--scenario", "pendulum"][..],
        &["run", "twocart"][..],
        &["run", "rohrs", "--ref", "ramp"][..],
        &["run", "rohrs", "--dt", "-1"][..],
    ] {
        let o = asd(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn divergence_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = asd(&["run", "rohrs", "--dt", "0.5", "--out", out_dir(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("observer") && err.contains("t ="), "{err}");
    assert!(!dir.path().join("rohrs_step.csv").exists());
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "scenario = \"twocart\"\ncase = 3\nref = \"sine\"\nhorizon = 1.0\nnoise = \"off\"\nseed = 3\nout = {:?}\n",
            out_dir(dir.path())
        ),
    )
    .unwrap();
    let o = asd(&["run", "--config", cfg.to_str().unwrap(), "--horizon", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("twocart_sine_3_metrics.json")).unwrap())
            .unwrap();
    assert_eq!(json["horizon"], 0.5);
    assert_eq!(json["noise"], false);
    assert_eq!(json["seed"], 3);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "scenario = \"rohrs\"\nhorizn = 3\n").unwrap();
    let o = asd(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_l1_reports_constants() {
    let o = asd(&["verify", "l1"]);
    assert!(o.status.success());
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("eps_tau") && report.contains("eps_H"));
    assert!(report.contains("2 of 2 checks passed"), "{report}");
}

#[test]
fn verify_run_suites_pass_on_short_horizon() {
    for suite in ["decomposition", "xi", "observer"] {
        let o = asd(&["verify", suite, "--horizon", "5"]);
        let report = String::from_utf8_lossy(&o.stdout);
        assert!(o.status.success(), "{suite}: {report}");
        assert!(report.lines().filter(|l| l.ends_with("PASS")).count() >= 5);
        assert!(!report.contains("FAIL"));
    }
}
