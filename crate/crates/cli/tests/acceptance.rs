//! Acceptance checks for the command-line surface, driving the compiled
//! binary end to end: determinism of emitted files (criterion 10 of the
//! suite started in the core crate), the contractual CSV schemas, the
//! config round trip, and the exit-code policy.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wavebell_cli::{extract_embedded_config, RunConfig};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_wavebell")
}

fn run_with_config(dir: &Path, config_text: &str, extra: &[&str]) -> (Output, PathBuf) {
    let config_path = dir.join("run.toml");
    std::fs::write(&config_path, config_text).unwrap();
    let output = Command::new(binary())
        .arg("--config")
        .arg(&config_path)
        .args(extra)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (output, config_path)
}

fn sample_config(out: &str) -> String {
    format!(
        r#"
mode = "sample"

[experiment]
gamma_a = 0.05
gamma_b = 0.05
alpha = 0.3
beta = 0.1

[sample]
shots = 200000
seed = 42

[output]
path = "{out}"
"#
    )
}

fn fringe_config(out: &str) -> String {
    format!(
        r#"
mode = "fringe"

[experiment]
gamma_a = 0.05
gamma_b = 0.05

[grid]
count = 64

[output]
path = "{out}"
"#
    )
}

fn chsh_config(out: &str) -> String {
    format!(
        r#"
mode = "chsh"

[experiment]
gamma_a = 0.01
gamma_b = 0.01

[settings]
alpha_1 = 0.0
alpha_2 = 1.5707963267948966
beta_1 = 0.7853981633974483
beta_2 = -0.7853981633974483

[output]
path = "{out}"
"#
    )
}

fn check(criterion: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("[{status}] {criterion}: {detail}");
    assert!(ok, "{criterion} failed: {detail}");
}

/// Criterion 10: identical configs and seeds produce bit-identical output
/// files across consecutive runs, in both seeded and deterministic modes.
#[test]
fn criterion_10_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut all_identical = true;
    for config in [sample_config("out.csv"), fringe_config("out.csv")] {
        let (out1, _) = run_with_config(dir.path(), &config, &[]);
        assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
        let first = std::fs::read(dir.path().join("out.csv")).unwrap();
        let (out2, _) = run_with_config(dir.path(), &config, &[]);
        assert!(out2.status.success());
        let second = std::fs::read(dir.path().join("out.csv")).unwrap();
        all_identical &= first == second;
    }
    check(
        "criterion 10 (deterministic outputs)",
        all_identical,
        "sample and fringe reruns byte-identical",
    );
}

#[test]
fn chsh_summary_reports_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run_with_config(dir.path(), &chsh_config("s.csv"), &[]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("S = 2.828"), "summary was: {stdout}");
    assert!(stdout.contains("violated = true"));
    // exactly one summary line
    assert_eq!(stdout.trim().lines().count(), 1);
}

#[test]
fn quiet_suppresses_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run_with_config(dir.path(), &chsh_config("s.csv"), &["--quiet"]);
    assert!(output.status.success());
    assert!(output.stdout.is_empty());
}

#[test]
fn fringe_csv_has_the_contractual_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run_with_config(dir.path(), &fringe_config("f.csv"), &[]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();

    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "delta_rad,p11,p12,p21,p22,s1A,s2A,s1B,s2B");
    let rows = &lines[1..];
    assert_eq!(rows.len(), 64);
    let deltas: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(deltas.windows(2).all(|w| w[1] > w[0]), "delta not monotone");
}

#[test]
fn emitted_config_reproduces_the_run_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run_with_config(dir.path(), &sample_config("out.csv"), &[]);
    assert!(output.status.success());
    let out_path = dir.path().join("out.csv");
    let first = std::fs::read_to_string(&out_path).unwrap();

    // extract the embedded config and run it again, overwriting the file
    let embedded = extract_embedded_config(&first).expect("config preamble");
    let config = RunConfig::from_toml(&embedded).expect("embedded config parses");
    let rerun_config_path = dir.path().join("rerun.toml");
    std::fs::write(&rerun_config_path, &embedded).unwrap();
    let output = Command::new(binary())
        .arg("--config")
        .arg(&rerun_config_path)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    let second = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(first, second, "re-run from embedded config diverged");
    assert_eq!(config.output.path, PathBuf::from("out.csv"));
}

#[test]
fn sample_with_settings_estimates_chsh() {
    let dir = tempfile::tempdir().unwrap();
    let config = sample_config("est.csv").replace(
        "[output]",
        r#"[settings]
alpha_1 = 0.0
alpha_2 = 1.5707963267948966
beta_1 = 0.7853981633974483
beta_2 = -0.7853981633974483

[output]"#,
    );
    let (output, _) = run_with_config(dir.path(), &config, &[]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("S_hat = 2."), "summary was: {stdout}");

    let text = std::fs::read_to_string(dir.path().join("est.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "pattern,count,frequency");
    assert_eq!(rows.len(), 1 + 40); // ten patterns per setting pair
    assert!(rows[1].starts_with("pair0_coinc_A1_B1,"));
}

#[test]
fn seed_override_changes_only_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let (o1, _) = run_with_config(dir.path(), &sample_config("a.csv"), &["--seed", "1"]);
    let (o2, _) = run_with_config(dir.path(), &sample_config("b.csv"), &["--seed", "2"]);
    let (o3, _) = run_with_config(dir.path(), &sample_config("c.csv"), &["--seed", "1", "--output", "c.csv"]);
    assert!(o1.status.success() && o2.status.success() && o3.status.success());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let c = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let body = |t: &str| {
        t.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_ne!(body(&a), body(&b), "different seeds must differ");
    assert_eq!(body(&a), body(&c), "same seed must agree");
}

#[test]
fn json_format_embeds_config_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) =
        run_with_config(dir.path(), &chsh_config("r.json"), &["--format", "json"]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["config"]["mode"], "chsh");
    let s = doc["results"]["s_value"].as_f64().unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-3);
    assert_eq!(doc["results"]["violated"], true);
}

#[test]
fn config_errors_exit_2_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let broken = chsh_config("x.csv").replace("gamma_b = 0.01\n", "");
    let (output, _) = run_with_config(dir.path(), &broken, &[]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("gamma_b"), "stderr was: {stderr}");
    assert!(!dir.path().join("x.csv").exists(), "no output on failure");
}

#[test]
fn truncation_failures_exit_3_with_the_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let config = chsh_config("x.csv")
        .replace("gamma_a = 0.01", "gamma_a = 0.9")
        .replace("gamma_b = 0.01", "gamma_b = 0.9\ncutoff = 2");
    let (output, _) = run_with_config(dir.path(), &config, &[]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("leakage"), "stderr was: {stderr}");
}

#[test]
fn seed_override_outside_sample_mode_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = run_with_config(dir.path(), &chsh_config("x.csv"), &["--seed", "7"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn scan_csv_has_the_contractual_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
mode = "scan"

[experiment]
gamma_a = 0.01
gamma_b = 0.01

[settings]
alpha_1 = 0.0
alpha_2 = 1.5707963267948966
beta_1 = 0.7853981633974483
beta_2 = -0.7853981633974483

[grid]
count = 4
start = 0.01
stop = 0.2

[output]
path = "scan.csv"
"#;
    let (output, _) = run_with_config(dir.path(), config, &[]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "gamma,S_exact,S_approx,visibility");
    assert_eq!(rows.len(), 5);
    // S decreases along the gamma sweep and exact dominates the closed form
    let parse = |row: &str| {
        let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        (f[0], f[1], f[2], f[3])
    };
    let first = parse(rows[1]);
    let last = parse(rows[4]);
    assert!((first.0 - 0.01).abs() < 1e-12 && (last.0 - 0.2).abs() < 1e-12);
    assert!(first.1 > last.1);
    assert!(first.3 > last.3);
}
