//! End-to-end checks of the `qdot` binary: output shape, determinism, exit
//! codes, and the layering of configuration files under flags.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qdot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = qdot(args);
    assert!(
        out.status.success(),
        "`qdot {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Column index by header name in a CSV table.
fn column(table: &str, name: &str) -> usize {
    table
        .lines()
        .next()
        .expect("header row")
        .split(',')
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name:?}"))
}

fn cell(line: &str, idx: usize) -> f64 {
    line.split(',')
        .nth(idx)
        .expect("row has the column")
        .parse()
        .expect("numeric cell")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qdot-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let args = [
        "run",
        "--t-end",
        "3.5",
        "--grid-points",
        "17",
        "--epsilon",
        "-0.4",
    ];
    let first = qdot(&args);
    let second = qdot(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn run_emits_the_documented_columns() {
    let table = stdout_ok(&["run", "--t-end", "1", "--grid-points", "5"]);
    let header = table.lines().next().unwrap();
    assert_eq!(
        header,
        "t,I_D,I_S,Q_D,Q_S,occ_empty,occ_det,occ_dot1,occ_dot2,occ_det+dot1,occ_det+dot2,coherence"
    );
    assert_eq!(table.lines().count(), 6);
    assert!(table.ends_with('\n'));
    // Occupancies in each row sum to one.
    for line in table.lines().skip(1) {
        let total: f64 = (5..11).map(|i| cell(line, i)).sum();
        assert!((total - 1.0).abs() < 1e-9, "row occupancies sum to {total}");
    }
}

#[test]
fn final_run_row_approaches_the_steady_current() {
    let table = stdout_ok(&["run", "--t-end", "10", "--grid-points", "21"]);
    let i_s = column(&table, "I_S");
    let last = table.lines().last().unwrap();
    let transient = cell(last, i_s);

    let report = stdout_ok(&["steady"]);
    let json: serde_json::Value = serde_json::from_str(&report).expect("steady emits JSON");
    let steady = json["I_S"].as_f64().expect("I_S is a number");

    assert!(
        ((transient - steady) / steady).abs() < 1e-2,
        "t=10 current {transient} vs steady {steady}"
    );
}

#[test]
fn zero_horizon_prints_the_initial_state_only() {
    let table = stdout_ok(&["run", "--t-end", "0"]);
    assert_eq!(table.lines().count(), 2);
    let row = table.lines().nth(1).unwrap();
    assert_eq!(cell(row, 0), 0.0);
    assert_eq!(cell(row, column(&table, "occ_empty")), 1.0);
    assert_eq!(cell(row, column(&table, "Q_S")), 0.0);
}

#[test]
fn run_table_renders_as_json_on_request() {
    let text = stdout_ok(&[
        "run",
        "--t-end",
        "1",
        "--grid-points",
        "4",
        "--format",
        "json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    let columns = json["columns"].as_array().expect("columns array");
    let rows = json["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row.as_array().unwrap().len(), columns.len());
    }
}

#[test]
fn steady_reports_the_cross_check_residual() {
    let report = stdout_ok(&["steady", "--gamma0p", "100", "--gamma0pp", "100"]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(json["integration_residual"].as_f64().unwrap() < 1e-6);
    let occupancies = json["occupancies"].as_object().unwrap();
    let total: f64 = occupancies.values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(json["reduced_coherence"].as_f64().is_some());
    assert_eq!(json["coherences"].as_array().unwrap().len(), 15);
}

#[test]
fn flags_override_the_configuration_file() {
    let path = scratch("layering.json");
    std::fs::write(
        &path,
        r#"{"scenario": "double_dot", "params": {"epsilon": 1.0}}"#,
    )
    .unwrap();
    let file = path.to_str().unwrap();

    // File alone: detuned current. The blocked reduced dynamics close
    // exactly, so these match the closed forms to all printed digits.
    let detuned = stdout_ok(&["steady", "--config", file]);
    let json: serde_json::Value = serde_json::from_str(&detuned).unwrap();
    let i_detuned = json["I_S"].as_f64().unwrap();
    assert!((i_detuned - 4.0 / 17.0).abs() < 1e-12);

    // Flag overrides the file's detuning.
    let resonant = stdout_ok(&["steady", "--config", file, "--epsilon", "0"]);
    let json: serde_json::Value = serde_json::from_str(&resonant).unwrap();
    let i_resonant = json["I_S"].as_f64().unwrap();
    assert!((i_resonant - 4.0 / 13.0).abs() < 1e-12);

    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_epsilon_is_symmetric_without_electrostatic_shift() {
    let table = stdout_ok(&["sweep", "--axis", "epsilon", "--grid", "-1,-0.5,0,0.5,1"]);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let i_s = column(&table, "I_S");
    for (a, b) in [(0usize, 4usize), (1, 3)] {
        let va: f64 = cell(rows[a], i_s);
        let vb: f64 = cell(rows[b], i_s);
        assert_eq!(va, vb, "rows {a} and {b} should mirror exactly");
    }
}

#[test]
fn sweep_gamma0p_suppresses_the_current_monotonically() {
    let table = stdout_ok(&[
        "sweep",
        "--axis",
        "gamma0p",
        "--grid",
        "0,1,10,100,10000",
        "--regime",
        "partial",
        "--mode",
        "literal",
    ]);
    let i_s = column(&table, "I_S");
    let currents: Vec<f64> = table.lines().skip(1).map(|l| cell(l, i_s)).collect();
    assert_eq!(currents.len(), 5);
    for w in currents.windows(2) {
        assert!(w[1] < w[0], "suppression is not monotone: {currents:?}");
    }
    assert!(currents[4] < 0.01 * currents[0]);
}

#[test]
fn sweep_records_per_point_failures_and_exits_nonzero() {
    // The open regime has no transcribed matrix, so that point fails while
    // the blocked one still solves.
    let out = qdot(&[
        "sweep",
        "--axis",
        "regime",
        "--grid",
        "blocked,open",
        "--mode",
        "literal",
    ]);
    assert_eq!(exit_code(&out), 2);
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",ok"));
    assert!(!rows[1].ends_with(",ok"));
    assert!(rows[1].starts_with("open,,,,"));
}

#[test]
fn validate_passes_and_reports_the_transcription_discrepancy() {
    let out = qdot(&["validate"]);
    assert_eq!(exit_code(&out), 0);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(!report.contains("FAIL"));
    assert!(report.contains("INFO"));
    assert!(report.contains("do not follow"));
    assert!(report.contains("0 failed"));
}

#[test]
fn bad_usage_and_bad_configuration_exit_one() {
    // Unknown flag.
    assert_eq!(exit_code(&qdot(&["run", "--no-such-flag"])), 1);
    // Invalid combination: no transcription covers the open regime.
    let out = qdot(&["steady", "--regime", "open", "--mode", "literal"]);
    assert_eq!(exit_code(&out), 1);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    // Custom scenario without an inline model.
    assert_eq!(exit_code(&qdot(&["steady", "--scenario", "custom"])), 1);
    // Unreadable configuration file.
    assert_eq!(
        exit_code(&qdot(&["run", "--config", "/no/such/file.json"])),
        1
    );
    // Negative rate, whether from a flag or a file.
    assert_eq!(exit_code(&qdot(&["steady", "--gammaR", "-1"])), 1);
    // Sweeping a custom model has no axis to act on.
    let path = scratch("custom-sweep.json");
    std::fs::write(
        &path,
        r#"{
            "scenario": "custom",
            "model": {
                "sites": 1,
                "states": [[0], [1]],
                "channels": [
                    {"from": 0, "to": 1, "rate": 1.0},
                    {"from": 1, "to": 0, "rate": 1.0}
                ],
                "detector_collector": [[1, 1.0]],
                "system_collector": []
            }
        }"#,
    )
    .unwrap();
    let out = qdot(&[
        "sweep",
        "--axis",
        "epsilon",
        "--grid",
        "0,1",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    std::fs::remove_file(&path).ok();
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(&qdot(&["--help"])), 0);
    assert_eq!(exit_code(&qdot(&["--version"])), 0);
    assert_eq!(exit_code(&qdot(&["run", "--help"])), 0);
}

#[test]
fn degenerate_generators_exit_two() {
    // All rates zero: the generator vanishes and every state is stationary,
    // so the direct solve cannot pick one.
    let path = scratch("degenerate.json");
    std::fs::write(
        &path,
        r#"{
            "scenario": "custom",
            "model": {
                "sites": 1,
                "states": [[0], [1]],
                "channels": [{"from": 0, "to": 1, "rate": 0.0}],
                "detector_collector": [[1, 0.0]],
                "system_collector": []
            }
        }"#,
    )
    .unwrap();
    let out = qdot(&["steady", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn output_flag_redirects_the_table_to_a_file() {
    let path = scratch("redirect.csv");
    let out = qdot(&[
        "run",
        "--t-end",
        "1",
        "--grid-points",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("t,I_D,I_S,"));
    assert_eq!(written.lines().count(), 4);
    std::fs::remove_file(&path).ok();
}
