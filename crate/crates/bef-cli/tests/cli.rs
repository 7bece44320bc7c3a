//! End-to-end runs of the `bef` binary: file outputs, determinism, exit
//! codes, and the budget guard.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bef() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bef"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("bef.toml");
    fs::write(&path, body).unwrap();
    path
}

fn base_config(out_dir: &Path) -> String {
    format!(
        r#"[model]
family = "tfim"
id = "tfim_g2"

[model.couplings]
J_zz = 1.0
g_x = 2.0

[ranges]
n = [7, 9]
r = [1, 4]

[solver]
seed = 7

[suites.eta_scan]
m = 4

[suites.entropy_scan]
m = 4
q = 2

[output]
directory = "{}"
formats = ["csv", "json"]
"#,
        out_dir.display()
    )
}

fn run(args: &[&str]) -> Output {
    bef().args(args).output().expect("binary runs")
}

#[test]
fn decoupled_profile_writes_all_zero_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--set",
        "model.couplings.J_zz=0.0",
        "--set",
        "model.id=decoupled",
        "mu-profile",
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(out.join("mu_profile_decoupled.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "model_id,ordering,n,r,mu");
    let mut rows = 0;
    for line in lines {
        let mu: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(mu, 0.0, "nonzero mu in decoupled profile: {line}");
        rows += 1;
    }
    assert_eq!(rows, 3 * 4);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    let args = ["--config", config.to_str().unwrap(), "mu-profile"];
    assert!(run(&args).status.success());
    let csv1 = fs::read(out.join("mu_profile_tfim_g2.csv")).unwrap();
    let json1 = fs::read(out.join("mu_profile_tfim_g2.json")).unwrap();
    assert!(run(&args).status.success());
    let csv2 = fs::read(out.join("mu_profile_tfim_g2.csv")).unwrap();
    let json2 = fs::read(out.join("mu_profile_tfim_g2.json")).unwrap();
    assert_eq!(csv1, csv2);
    assert_eq!(json1, json2);
}

#[test]
fn budget_violations_refuse_before_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--set",
        "ranges.n=[8, 23]",
        "solve",
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("budget exceeded"), "stderr: {stderr}");
    assert!(!out.exists(), "no partial files on refusal");
}

#[test]
fn verify_passes_on_the_gapped_chain_and_collates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    let output = run(&["--config", config.to_str().unwrap(), "verify"]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("pass"));
    assert!(!stdout.contains("FAIL"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("verify_tfim_g2.json")).unwrap())
            .unwrap();
    assert_eq!(json["kind"], "verify");
    assert_eq!(json["all_pass"], true);

    // entropy scan for the growth curve, then collate everything.
    assert!(run(&[
        "--config",
        config.to_str().unwrap(),
        "--format",
        "csv",
        "--format",
        "json",
        "--format",
        "svg",
        "entropy-scan"
    ])
    .status
    .success());
    let report = run(&["--config", config.to_str().unwrap(), "report"]);
    assert!(report.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["kind"], "summary");
    assert_eq!(summary["failures"], 0);
    assert!(out.join("entropy_growth.svg").exists());
}

#[test]
fn correlations_require_a_bridge_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut body = base_config(&out);
    body.push_str("\n[suites.correlations]\npauli_pairs = [\"ZZ\"]\n");
    let config = write_config(tmp.path(), &body);
    let output = run(&["--config", config.to_str().unwrap(), "correlations"]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bridge"), "stderr: {stderr}");

    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--set",
        "ordering.mode=bridge",
        "--set",
        "ordering.left=3",
        "--set",
        "ranges.n=[7, 8]",
        "--set",
        "ranges.r=[2, 3]",
        "correlations",
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(out.join("correlations_tfim_g2.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn gap_scan_reports_inf_for_the_decoupled_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut body = base_config(&out);
    body.push_str("\n[suites.gap_scan]\nparameter = \"J_zz\"\nvalues = [0.0, 1.0]\n");
    let config = write_config(tmp.path(), &body);
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--set",
        "ranges.n=[6, 8]",
        "gap-scan",
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(out.join("gap_scan_tfim_g2.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].contains(",inf,"), "decoupled row: {}", lines[1]);
    assert!(!lines[2].contains(",inf,"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let output = run(&["solve"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn report_without_artifacts_is_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir_all(tmp.path().join("empty")).unwrap();
    let output = run(&["--out", tmp.path().join("empty").to_str().unwrap(), "report"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("missing input"), "stderr: {stderr}");
}
