//! End-to-end tests of the `hybeam` binary: flag plumbing, output schema,
//! exit codes, and determinism across worker counts.

use std::path::Path;
use std::process::{Command, Output};

fn hybeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybeam"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

/// Small scenario file shared by the tests.
fn write_tiny_scenario(dir: &Path) -> String {
    let path = dir.join("tiny.toml");
    std::fs::write(
        &path,
        r#"
        band = "mmwave"
        id = "tiny"
        n_bs = 8
        n_ue = 2
        n_subcarriers = 8
        cp_len = 4
        variant = "v1-mmse"
        trials = 2
        master_seed = 5
        snr_db_sweep = [0.0]

        [bits]
        bs_rf = 3
        ue_rf = 2
        bb = 6
        "#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn rate_csv_has_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let out = dir.path().join("rate.csv");
    let result = hybeam(&[
        "rate",
        "--scenario",
        &scenario,
        "--snr",
        "0:5:5",
        "--trials",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scenario,trial,snr_db,user,metric,value,seed");
    // 2 SNR points x 2 trials x (2 rate + 2 sinr + 1 sum_rate) rows.
    assert_eq!(lines.len(), 1 + 2 * 2 * 5);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7, "row: {line}");
        assert_eq!(fields[0], "tiny");
        fields[2].parse::<f64>().unwrap();
        fields[3].parse::<i32>().unwrap();
        fields[5].parse::<f64>().unwrap();
        fields[6].parse::<u64>().unwrap();
    }
}

#[test]
fn negative_snr_sweeps_parse() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&[
        "rate", "--scenario", &scenario, "--snr", "-10:5:-5", "--trials", "1",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("tiny,0,-10.0,"), "{text}");
    assert!(text.contains("tiny,0,-5.0,"), "{text}");
}

#[test]
fn json_format_emits_an_array_of_objects() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&[
        "rate", "--scenario", &scenario, "--snr", "0", "--trials", "1", "--format", "json",
    ]);
    assert!(result.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4]["metric"], "sum_rate");
    assert_eq!(rows[4]["user"], -1);
}

#[test]
fn identical_csv_for_different_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let result = hybeam(&[
            "rate",
            "--scenario",
            &scenario,
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
        std::fs::read_to_string(&out).unwrap()
    };
    assert_eq!(run("1", "one.csv"), run("3", "three.csv"));
}

#[test]
fn outage_flags_flow_into_metric_names() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&[
        "outage",
        "--scenario",
        &scenario,
        "--snr",
        "0",
        "--target",
        "0",
        "--epsilon",
        "0.5",
    ]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains(",outage_r0,"), "{text}");
    assert!(text.contains(",epsilon_rate_e0.5,"), "{text}");
}

#[test]
fn ber_command_reports_error_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&[
        "ber",
        "--scenario",
        &scenario,
        "--snr",
        "5",
        "--trials",
        "1",
        "--uncoded",
        "--velocity",
        "0",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = String::from_utf8(result.stdout).unwrap();
    // 1296 uncoded payload bits per user, two users.
    assert!(text.contains(",bits,2592"), "{text}");
    assert!(text.contains(",ber,"), "{text}");
}

#[test]
fn energy_command_sweeps_user_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&[
        "energy", "--scenario", &scenario, "--snr", "0", "--trials", "1", "--users", "2",
    ]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("tiny_u1,"), "{text}");
    assert!(text.contains("tiny_u2,"), "{text}");
    assert!(text.contains(",energy_efficiency,"), "{text}");
}

#[test]
fn config_problems_exit_with_code_2() {
    // Unknown preset / missing file.
    let result = hybeam(&["rate", "--scenario", "no-such-thing"]);
    assert_eq!(result.status.code(), Some(2));

    // Unknown key in the file.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "band = \"mmwave\"\nn_userz = 4").unwrap();
    let result = hybeam(&["rate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("n_userz"));

    // Invariant violation: more users than RF chains.
    let invalid = dir.path().join("invalid.toml");
    std::fs::write(&invalid, "band = \"mmwave\"\nn_users = 4").unwrap();
    let result = hybeam(&["rate", "--scenario", invalid.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("n_rf"));

    // Bad variant token.
    let scenario = write_tiny_scenario(dir.path());
    let result = hybeam(&["rate", "--scenario", &scenario, "--variant", "zf"]);
    assert_eq!(result.status.code(), Some(2));

    // Malformed sweep.
    let result = hybeam(&["rate", "--scenario", &scenario, "--snr", "0:-5:10"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn failed_campaigns_exit_with_code_3() {
    // The preset-sized exhaustive search space exceeds the guard, so every
    // trial fails and the campaign dies with the dedicated exit code.
    let result = hybeam(&[
        "rate", "--scenario", "mmwave", "--variant", "exhaustive", "--trials", "1", "--snr", "0",
    ]);
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("search space"));
}
