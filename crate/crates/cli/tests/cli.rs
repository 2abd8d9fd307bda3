//! End-to-end tests of the `betacf` binary: output plumbing, exit-code
//! classes, reproducibility of JSON artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn betacf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betacf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("exit code present")
}

#[test]
fn expand_prints_digits_and_cylinder() {
    let out = betacf(&["expand", "--beta", "10", "--x", "1/4", "--n", "4"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.starts_with("# config "), "echoes config: {text}");
    assert!(text.contains("digits: 2 5 0 0"), "got: {text}");
    assert!(text.contains("orbit terminated at step 2"), "got: {text}");
    assert!(text.contains("cylinder depth"), "got: {text}");
}

#[test]
fn expand_json_carries_exact_and_decimal_endpoints() {
    let out = betacf(&[
        "expand", "--beta", "5/2", "--x", "3/8", "--n", "6", "--json",
    ]);
    assert_eq!(code_of(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(doc["config"]["command"], "expand");
    assert_eq!(doc["result"]["digits"][1], "2");
    let left = &doc["result"]["cylinder"]["left"];
    assert!(left["rational"].as_str().unwrap().contains('/'));
    assert!(left["decimal"].as_str().unwrap().starts_with("0."));
}

#[test]
fn cf_reports_quotients_and_convergents() {
    let out = betacf(&["cf", "--x", "30103/100000", "--max-m", "10", "--json"]);
    assert_eq!(code_of(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    let quotients: Vec<&str> = doc["result"]["quotients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(&quotients[..4], &["3", "3", "9", "2"]);
    let last = doc["result"]["convergents"]
        .as_array()
        .unwrap()
        .last()
        .unwrap();
    assert_eq!(last["p"], "11369");
    assert_eq!(last["q"], "37767");
}

#[test]
fn kn_series_is_nondecreasing_and_echoes_config() {
    let out = betacf(&[
        "kn", "--beta", "2", "--x", "5/7", "--n", "8", "--series", "--json",
    ]);
    assert_eq!(code_of(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(doc["config"]["beta"], "2");
    let entries = doc["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    let ks: Vec<u64> = entries.iter().map(|e| e["k"].as_u64().unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[0] <= w[1]), "nondecreasing: {ks:?}");
}

#[test]
fn csv_header_is_stable() {
    let out = betacf(&[
        "lochs-mean",
        "--beta",
        "10",
        "--n",
        "40",
        "--samples",
        "50",
        "--seed",
        "7",
        "--out",
        "csv",
    ]);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config "));
    assert_eq!(lines.next().unwrap(), "n,estimate,ci_low,ci_high,discarded");
    let row = lines.next().unwrap();
    assert!(row.starts_with("40,"), "row: {row}");
    assert_eq!(row.split(',').count(), 5);
}

#[test]
fn json_artifact_reruns_to_identical_result() {
    let dir = tempfile::tempdir().expect("tempdir");
    let artifact = dir.path().join("run.json");
    let out = betacf(&[
        "deviation",
        "--beta",
        "2",
        "--eps",
        "0.1",
        "--n-list",
        "10,20,30",
        "--samples",
        "200",
        "--seed",
        "99",
        "--json",
        "--out-file",
        artifact.to_str().unwrap(),
    ]);
    assert_eq!(
        code_of(&out),
        0,
        "stderr: {:?}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&artifact).unwrap()).unwrap();

    let rerun = betacf(&["rerun", "--config", artifact.to_str().unwrap(), "--json"]);
    assert_eq!(code_of(&rerun), 0);
    let second: serde_json::Value = serde_json::from_slice(&rerun.stdout).unwrap();

    assert_eq!(first["config"], second["config"], "config echo survives");
    assert_eq!(first["result"], second["result"], "replay is bit-identical");
}

#[test]
fn rerun_accepts_a_bare_config_object() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command":"expand","beta":"10","x":"1/4","n":4}"#).unwrap();
    let out = betacf(&["rerun", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).contains("digits: 2 5 0 0"));
}

#[test]
fn out_file_write_is_atomic_and_complete() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("nested.json");
    let out = betacf(&[
        "pressure",
        "--theta",
        "1.0",
        "--depth",
        "4",
        "--cutoff",
        "60",
        "--json",
        "--out-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);
    assert!(out.stdout.is_empty(), "file mode writes nothing to stdout");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).expect("complete JSON");
    assert_eq!(doc["config"]["command"], "pressure");
    // No temporary files are left behind next to the output.
    let residue: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|name| name != Path::new("nested.json").as_os_str())
        .collect();
    assert!(residue.is_empty(), "leftover files: {residue:?}");
}

#[test]
fn usage_errors_exit_two() {
    // Unknown subcommand (clap).
    assert_eq!(code_of(&betacf(&["nosuch"])), 2);
    // Missing required argument (clap).
    assert_eq!(code_of(&betacf(&["kn", "--beta", "10", "--x", "1/3"])), 2);
    // Both point sources at once.
    assert_eq!(
        code_of(&betacf(&[
            "kn",
            "--beta",
            "10",
            "--x",
            "1/3",
            "--fixture",
            "pi",
            "--n",
            "5"
        ])),
        2
    );
    // CSV for a non-tabular command.
    assert_eq!(
        code_of(&betacf(&["pressure", "--theta", "1.0", "--out", "csv"])),
        2
    );
}

#[test]
fn domain_errors_exit_three() {
    // β must exceed 1.
    assert_eq!(
        code_of(&betacf(&[
            "expand", "--beta", "0.5", "--x", "1/3", "--n", "4"
        ])),
        3
    );
    // γ below the Lyapunov floor.
    assert_eq!(code_of(&betacf(&["tau", "--gamma", "0.5"])), 3);
    // Unknown fixture name.
    assert_eq!(
        code_of(&betacf(&[
            "kn",
            "--beta",
            "10",
            "--fixture",
            "quark",
            "--n",
            "5"
        ])),
        3
    );
    // Unparseable rational.
    assert_eq!(
        code_of(&betacf(&[
            "expand", "--beta", "1/0", "--x", "1/3", "--n", "4"
        ])),
        3
    );
}

#[test]
fn budget_refusals_exit_four() {
    let out = betacf(&[
        "lochs-mean",
        "--beta",
        "10",
        "--n",
        "900",
        "--samples",
        "10",
        "--bits",
        "512",
    ]);
    assert_eq!(code_of(&out), 4);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget"), "stderr: {err}");
}

#[test]
fn indeterminate_sign_exits_five() {
    // At the coarse tier the theta1 enclosure for β = 2 straddles zero, so
    // demanding certified signs must fail with the dedicated code.
    let out = betacf(&[
        "rates",
        "--beta",
        "2",
        "--eps",
        "0.05",
        "--tier",
        "coarse",
        "--require-signs",
    ]);
    assert_eq!(code_of(&out), 5);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("does not exclude zero"), "stderr: {err}");
}

#[test]
fn kn_is_thread_count_independent() {
    let one = betacf(&[
        "kn",
        "--beta",
        "10",
        "--fixture",
        "pi",
        "--n",
        "120",
        "--threads",
        "1",
    ]);
    let four = betacf(&[
        "kn",
        "--beta",
        "10",
        "--fixture",
        "pi",
        "--n",
        "120",
        "--threads",
        "4",
    ]);
    assert_eq!(code_of(&one), 0);
    assert_eq!(code_of(&four), 0);
    assert_eq!(stdout_of(&one), stdout_of(&four));
    assert!(stdout_of(&one).contains("k_120 = "));
}

#[test]
fn seed_changes_samples_but_config_echo_tracks_it() {
    let a = betacf(&[
        "lochs-mean",
        "--beta",
        "2",
        "--n",
        "30",
        "--samples",
        "60",
        "--seed",
        "1",
        "--out",
        "csv",
    ]);
    let b = betacf(&[
        "lochs-mean",
        "--beta",
        "2",
        "--n",
        "30",
        "--samples",
        "60",
        "--seed",
        "2",
        "--out",
        "csv",
    ]);
    let (ta, tb) = (stdout_of(&a), stdout_of(&b));
    assert_ne!(ta, tb, "different seeds draw different samples");
    assert!(ta.contains("\"seed\":1"));
    assert!(tb.contains("\"seed\":2"));
}
