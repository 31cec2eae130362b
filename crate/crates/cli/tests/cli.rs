use std::path::{Path, PathBuf};
use std::process::Command;

use phinlab_cli::{
    aggregate_exit, parse_instance, parse_instance_file, run_batch, run_file, CliError, Options,
    Payload,
};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(command: &str, name: &str) -> phinlab_cli::Report {
    run_file(Some(command), &fixture(name), name, &Options::default())
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phinlab"))
}

#[test]
fn fixtures_parse() {
    for name in [
        "monodromy_qp.json",
        "monodromy_scrambled.json",
        "monodromy_unramified.json",
        "monodromy_ramified.json",
        "degenerate_pair.json",
        "split_bad_line.json",
        "cup_basis.json",
        "germ_vanishing.json",
        "germ_qp.json",
    ] {
        parse_instance_file(&fixture(name), None).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let inst = parse_instance_file(&fixture("monodromy_unramified.json"), Some(20)).unwrap();
    assert_eq!(inst.desc.prec(), 20);
    assert_eq!(inst.seed, 11);
    assert!(inst.scramble);
    assert!(matches!(inst.payload, Payload::Monodromy { .. }));
}

#[test]
fn bad_inputs_exit_two() {
    let err = parse_instance_file(&fixture("bad_condition1.json"), None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("condition 1"), "{err}");

    let err = parse_instance_file(&fixture("truncated.json"), None).unwrap_err();
    assert!(matches!(err, CliError::Json(_)));
    assert_eq!(err.exit_code(), 2);

    let two = br#"{"field": {"p": 5}, "shape": {"e": 1, "f": 1}, "germ": {}, "classes": {}}"#;
    assert_eq!(parse_instance(two, None).unwrap_err().exit_code(), 2);
    let none = br#"{"field": {"p": 5}, "shape": {"e": 1, "f": 1}}"#;
    assert_eq!(parse_instance(none, None).unwrap_err().exit_code(), 2);

    let r = run("cup", "monodromy_qp.json");
    assert_eq!(r.exit_code, 2);
    assert!(r.error.is_some());
    let r = run("admissible", "missing.json");
    assert_eq!(r.exit_code, 2);
}

#[test]
fn single_commands() {
    let r = run("admissible", "monodromy_qp.json");
    assert_eq!((r.status, r.exit_code, r.verdict), ("pass", 0, Some(true)));

    let r = run("colmez", "germ_vanishing.json");
    assert_eq!(r.exit_code, 0);
    assert_eq!(r.value, Some(Value::String("0".into())));

    let r = run("extract", "monodromy_scrambled.json");
    assert_eq!(r.verdict, Some(true));
    let r = run("extract", "monodromy_unramified.json");
    assert_eq!(r.verdict, Some(true));

    let r = run("admissible", "split_bad_line.json");
    assert_eq!((r.status, r.exit_code), ("fail", 1));
    assert!(r.witness.is_some());

    let r = run("solve-ell", "germ_qp.json");
    assert_eq!(r.value.unwrap()["scalar"], Value::String("-11/8".into()));
}

#[test]
fn batches() {
    let opts = Options::default();
    let ok = run_batch(&fixture("passing.json"), 2, &opts).unwrap();
    assert_eq!(ok.len(), 3);
    assert_eq!(aggregate_exit(&ok), 0);

    let serial = run_batch(&fixture("manifest.json"), 1, &opts).unwrap();
    let parallel = run_batch(&fixture("manifest.json"), 8, &opts).unwrap();
    assert_eq!(serial.len(), 21);
    assert_eq!(aggregate_exit(&serial), 1);
    let a: Vec<String> = serial.iter().map(|r| r.to_json()).collect();
    let b: Vec<String> = parallel.iter().map(|r| r.to_json()).collect();
    assert_eq!(a, b);
    let bad = serial
        .iter()
        .find(|r| r.instance.contains("split_bad_line"))
        .unwrap();
    assert!(bad.witness.is_some());
}

#[test]
fn manifest_with_missing_entry() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("monodromy_qp.json"), dir.path().join("a.json")).unwrap();
    let manifest = dir.path().join("m.json");
    std::fs::write(
        &manifest,
        r#"{"instances": [{"path": "a.json", "command": "hodge"}, {"path": "gone.json", "command": "hodge"}]}"#,
    )
    .unwrap();
    let reports = run_batch(&manifest, 2, &Options::default()).unwrap();
    assert_eq!(reports[0].exit_code, 0);
    assert_eq!(reports[1].exit_code, 2);
    assert_eq!(aggregate_exit(&reports), 2);
}

#[test]
fn binary_exit_codes() {
    let out = bin()
        .args(["admissible"])
        .arg(fixture("monodromy_qp.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let line: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(line["status"], "pass");
    assert!(line.get("timing_ms").is_none());

    let out = bin()
        .args(["admissible"])
        .arg(fixture("split_bad_line.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["frobnicate"])
        .arg(fixture("monodromy_qp.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown command"));

    let out = bin()
        .args(["admissible"])
        .arg(fixture("truncated.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["batch"])
        .arg(fixture("passing.json"))
        .args(["--format", "text", "--jobs", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);

    let out = bin()
        .args(["hodge"])
        .arg(fixture("monodromy_qp.json"))
        .arg("--timing")
        .output()
        .unwrap();
    let line: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(line.get("timing_ms").is_some());
}
