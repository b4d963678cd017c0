//! End-to-end tests of the binary: exit codes, output shapes, manifest
//! embedding, cache behavior, and worker-count determinism of payload
//! bytes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ddescent"));
    // keep lookups hermetic: no ambient cache directory
    cmd.env_remove("DDESCENT_CACHE_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn exact_json_payload_is_canonical() {
    let output = run(&["exact", "--n", "3", "--d", "2", "--format", "json"]);
    assert!(output.status.success());
    assert_eq!(
        stdout_of(&output).trim_end(),
        "{\"counts\":[\"1\",\"2\",\"2\",\"1\"],\"n\":3,\"spec\":{\"d\":2,\"kind\":\"uniform\"},\"total\":\"6\"}"
    );
}

#[test]
fn exact_vector_spec_and_csv() {
    let output = run(&["exact", "--n", "4", "--vector", "3,2,1", "--format", "csv"]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,count"));
    // inversion table of S_4: 1,3,5,6,5,3,1
    let counts: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, vec!["1", "3", "5", "6", "5", "3", "1"]);
}

#[test]
fn oracle_subcommand_matches_known_rows() {
    let output = run(&["oracle", "eulerian", "--n", "2"]);
    assert!(output.status.success());
    assert!(stdout_of(&output).contains("\"counts\":[\"1\",\"1\"]"));

    let output = run(&["oracle", "inversions", "--n", "3"]);
    assert!(stdout_of(&output).contains("\"counts\":[\"1\",\"2\",\"2\",\"1\"]"));
}

#[test]
fn exit_codes_distinguish_input_and_capacity_errors() {
    // unknown flag: usage on stderr, exit 1
    let output = run(&["exact", "--n", "3", "--d", "2", "--definitely-not-a-flag"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());

    // missing spec: input error, exit 1
    let output = run(&["exact", "--n", "3"]);
    assert_eq!(output.status.code(), Some(1));

    // enumeration limit: capacity error, exit 2
    let output = run(&["exact", "--n", "13", "--d", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("capacity"));

    // closed forms refused below n = 2d: exit 1
    let output = run(&["janson", "--n", "5", "--d", "3", "--m", "3"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unsupported regime"));

    // help exits 0
    let output = run(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn janson_bound_example_value() {
    let output = run(&["janson", "--n", "100", "--d", "1", "--m", "3"]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(value["N_n"], 99);
    assert_eq!(value["sigma_sq"], "101/12");
    let bound = value["bound_value"].as_f64().unwrap();
    assert!((bound - 64.87).abs() < 0.01, "bound = {bound}");
}

#[test]
fn janson_table_and_audit_modes() {
    let output = run(&[
        "janson",
        "--table",
        "--d",
        "1",
        "--m",
        "3",
        "--schedule",
        "100,1000",
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    assert!(text.starts_with("n,d,m,N_n,delta_used,sigma_sq,bound_value,simplified_bound"));
    assert_eq!(text.lines().count(), 3);

    let output = run(&["janson", "--audit", "--n", "5", "--d", "2"]);
    assert!(output.status.success());
    assert!(stdout_of(&output).contains("\"passed\":true"));
}

#[test]
fn simulate_growth_mode_emits_one_row_per_entry() {
    let output = run(&[
        "simulate",
        "--epsilon",
        "0.5",
        "--schedule",
        "64,256",
        "--trials",
        "512",
        "--seed",
        "9",
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = stdout_of(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,d,spec,"));
    assert!(lines[1].starts_with("64,8,uniform:8,512,9,"));
    assert!(lines[2].starts_with("256,16,uniform:16,512,9,"));
}

#[test]
fn payloads_are_bit_identical_across_worker_counts() {
    let exact = |workers: &str| {
        stdout_of(&run(&[
            "exact",
            "--n",
            "8",
            "--d",
            "3",
            "--workers",
            workers,
        ]))
    };
    assert_eq!(exact("1"), exact("4"));

    let simulate = |workers: &str| {
        stdout_of(&run(&[
            "simulate",
            "--n",
            "200",
            "--d",
            "1",
            "--trials",
            "4096",
            "--seed",
            "5",
            "--workers",
            workers,
        ]))
    };
    let one = simulate("1");
    assert_eq!(one, simulate("4"));
    // and rerunning with the same seed reproduces the bytes
    assert_eq!(one, simulate("1"));
}

#[test]
fn out_files_embed_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("table.json");
    let output = run(&[
        "exact",
        "--n",
        "5",
        "--d",
        "2",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let document: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(document["manifest"]["command"], "exact");
    assert_eq!(document["manifest"]["parameters"]["n"], "5");
    assert!(document["manifest"]["timestamp"].is_string());
    assert_eq!(document["payload"]["total"], "120");

    // stdout payload equals the embedded payload byte-for-byte
    let stdout_payload = stdout_of(&run(&["exact", "--n", "5", "--d", "2"]));
    assert_eq!(
        stdout_payload.trim_end(),
        ddescent::jsonio::canonical_json(&document["payload"])
    );

    let csv_path = dir.path().join("table.csv");
    let output = run(&[
        "exact",
        "--n",
        "5",
        "--d",
        "2",
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# manifest {\"command\":\"exact\""));
    assert_eq!(lines.next(), Some("k,count"));
}

#[test]
fn cache_round_trip_hit_and_tamper_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let args = |extra: &[&str]| {
        let mut v = vec![
            "exact",
            "--n",
            "7",
            "--d",
            "2",
            "--cache-dir",
            cache_dir.to_str().unwrap(),
        ];
        v.extend_from_slice(extra);
        v.iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };

    let first = bin().args(args(&[])).output().unwrap();
    assert!(first.status.success());
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cache hit"));

    let second = bin().args(args(&[])).output().unwrap();
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(first.stdout, second.stdout);

    // corrupt the single cache file; the next run warns and recomputes
    let entry = std::fs::read_dir(&cache_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|ext| ext == "json"))
        .unwrap();
    let mut bytes = std::fs::read(&entry).unwrap();
    let pos = bytes.len() / 2;
    bytes[pos] = bytes[pos].wrapping_add(1);
    std::fs::write(&entry, &bytes).unwrap();

    let third = bin().args(args(&[])).output().unwrap();
    assert!(third.status.success());
    let stderr = String::from_utf8_lossy(&third.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    assert_eq!(first.stdout, third.stdout);

    // after recomputation the cache is healthy again
    let fourth = bin().args(args(&[])).output().unwrap();
    assert!(String::from_utf8_lossy(&fourth.stderr).contains("cache hit"));
}

#[test]
fn cache_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .env("DDESCENT_CACHE_DIR", dir.path())
        .args(["exact", "--n", "6", "--d", "1"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stored = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(stored, 1);
}

#[test]
fn dumped_samples_are_sorted_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let output = run(&[
        "simulate",
        "--n",
        "50",
        "--d",
        "1",
        "--trials",
        "500",
        "--seed",
        "3",
        "--dump-samples",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z"));
    let samples: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(samples.len(), 500);
    assert!(samples.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn exact_numeric_strings_round_trip_to_identical_integers() {
    let output = run(&["exact", "--n", "10", "--d", "9", "--limit", "10"]);
    assert!(output.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let counts: Vec<num::BigUint> = value["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap().parse().unwrap())
        .collect();
    let total: num::BigUint = value["total"].as_str().unwrap().parse().unwrap();
    assert_eq!(counts.iter().sum::<num::BigUint>(), total);
    assert_eq!(total.to_string(), "3628800");
    // canonical re-serialization reproduces the bytes exactly
    assert_eq!(
        ddescent::jsonio::canonical_json(&value),
        stdout_of(&output).trim_end()
    );
    assert!(Path::new(env!("CARGO_BIN_EXE_ddescent")).exists());
}
