use std::process::Command;

fn nclp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nclp"))
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.json"));
        let status = nclp()
            .args(["cuculescu", "--trials", "8", "--seed", "11", "--lambda-exp", "-2..3", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let json: serde_json::Value = serde_json::from_slice(&bodies[0]).unwrap();
    for key in ["experiment", "config", "trials", "aggregate", "assertions"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["trials"].as_array().unwrap().len(), 8);
}

#[test]
fn seeds_change_inputs() {
    let run = |seed: &str| {
        let out = nclp().args(["norms", "--trials", "2", "--seed", seed]).output().unwrap();
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        json["trials"][0]["inputs_digest"].as_str().unwrap().to_string()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["no-such-experiment"],
        vec!["norms", "--algebra", "torus:3"],
        vec!["norms", "--trials", "0"],
        vec!["cz", "--algebra", "tensor:3"],
        vec!["ksk", "--s", "1..9"],
    ] {
        let out = nclp().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn csv_has_header_and_one_row_per_trial() {
    let out = nclp().args(["transform-l2", "--trials", "5", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("id,inputs_digest,pass"));
}

#[test]
fn both_formats_write_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("report");
    let status = nclp()
        .args(["bmo", "--trials", "3", "--format", "both", "--depth", "3", "--out"])
        .arg(&base)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(base.with_extension("json").exists() && base.with_extension("csv").exists());
}
