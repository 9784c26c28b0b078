//! End-to-end checks of the command-line surface: exact outputs, exit codes,
//! and the structured error stream.

use std::process::Command;

fn betamap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_betamap"))
}

#[test]
fn digit_table_is_exact() {
    let out = betamap()
        .args(["digits", "--beta", "poly:1,-3,-2,0,-3@(3,4)", "--x", "1", "--n", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3 2 0 3 0 0 0 0");
}

#[test]
fn spectrum_of_truncated_golden_ratio_is_clean() {
    let out = betamap()
        .args(["spectrum", "--beta", "1.6180339887"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    let eigs = doc["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 1);
    assert_eq!(eigs[0]["kind"], "Leading");
}

#[test]
fn usage_errors_exit_two() {
    let out = betamap().args(["digits", "--beta", "2.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = betamap().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_one_with_json_error() {
    let out = betamap()
        .args(["spectrum", "--beta", "0.9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["schema"], 1);
    assert!(err["error"].as_str().unwrap().contains("base"));
}

#[test]
fn verify_appendix_member_passes() {
    let out = betamap()
        .args(["verify-appendix", "--family", "P", "--n", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_ok"], true);
}

#[test]
fn functional_emits_csv_curve() {
    let out = betamap()
        .args(["functional", "--beta", "2.5", "--lambda", "1,0", "--samples", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,f_re,f_im"));
    assert_eq!(text.lines().count(), 6);
    // F_1 is the identity: the middle sample reads back its x
    let row: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    let x: f64 = row[0].parse().unwrap();
    let fx: f64 = row[1].parse().unwrap();
    assert!((fx - x).abs() < 1e-8);
}

#[test]
fn track_emits_csv_by_default() {
    let out = betamap()
        .args([
            "track", "--beta0", "2.65", "--lambda", "-0.408,0", "--window", "1e-6", "--steps", "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("beta,lambda_re,lambda_im,residual"));
}

#[test]
fn decay_reports_fit_json() {
    let out = betamap()
        .args(["decay", "--beta", "poly:1,-3,-2,0,-3@(3,4)", "--construct", "--nmax", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let alpha = doc["fit"]["fitted_alpha"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha < 0.27, "constructed rate {alpha}");
}

#[test]
fn precision_env_override_is_honored() {
    let out = betamap()
        .env("BETAMAP_PRECISION", "nonsense")
        .args(["digits", "--beta", "2.5", "--x", "0.5", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = betamap()
        .env("BETAMAP_PRECISION", "double-double")
        .args(["digits", "--beta", "2.5", "--x", "0.5", "--n", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
