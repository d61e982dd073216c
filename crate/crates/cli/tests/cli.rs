use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kei_cli::compare::Comparison;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> PathBuf {
    let top = fixtures().join(format!("{name}.json"));
    if top.exists() {
        top
    } else {
        fixtures().join("extra").join(format!("{name}.json"))
    }
}

fn kei(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kei"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QUANDLE_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn report_two_hopf() {
    let dir = tempfile::tempdir().unwrap();
    let o = kei(
        &["report", path(&fixture("HOPF2")), "--format", "machine"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["det"], "4");
    assert_eq!(v["module"]["display"], "Z + Z/2 + Z/2");
    assert_eq!(v["qa"]["size"], 3);
    assert_eq!(v["imq"]["size"], 6);
    assert_eq!(v["imq"]["orbit_sizes"], serde_json::json!([2, 2, 2]));
    assert!(v["checks"]
        .as_object()
        .unwrap()
        .values()
        .all(|c| c != "fail"));
}

#[test]
fn report_determinant_zero_and_unknot() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&kei(
        &["report", path(&fixture("LPRIME")), "--format", "machine"],
        dir.path(),
    ));
    assert_eq!(v["det"], "0");
    assert_eq!(v["module"]["display"], "Z^2 + Z/2 + Z/2");
    assert_eq!(v["qa"]["status"], "infinite");
    assert_eq!(v["imq"]["status"], "infinite");
    let v = json(&kei(
        &["report", path(&fixture("UNKNOT")), "--format", "machine"],
        dir.path(),
    ));
    assert_eq!(v["det"], "1");
    assert_eq!(v["ker_w"]["display"], "0");
    assert_eq!(v["imq"]["size"], 1);
}

#[test]
fn no_imq_and_cap_flags() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixture("T22T24");
    let v = json(&kei(
        &["report", path(&t), "--format", "machine", "--no-imq"],
        dir.path(),
    ));
    assert_eq!(v["imq"]["status"], "skipped");
    let o = kei(
        &["report", path(&t), "--format", "machine", "--imq-cap", "3"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["imq"]["status"], "capped");
}

#[test]
fn dump_quandle_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.txt");
    let o = kei(
        &[
            "report",
            path(&fixture("SIXTHREE")),
            "--dump-quandle",
            path(&out),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let q = kei_core::quandle::FiniteQuandle::parse_text(&std::fs::read_to_string(&out).unwrap())
        .unwrap();
    assert_eq!(q.n(), 6);
    assert!(q.check_axioms().is_empty());
    let o = kei(
        &[
            "report",
            path(&fixture("LPRIME")),
            "--dump-quandle",
            path(&out),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"components\": [").unwrap();
    assert_eq!(
        kei(&["report", path(&bad)], dir.path()).status.code(),
        Some(1)
    );
    let invalid = dir.path().join("invalid.json");
    std::fs::write(
        &invalid,
        r#"{"arcs": ["a", "a"], "components": [{"arcs": ["a"]}]}"#,
    )
    .unwrap();
    let o = kei(&["report", path(&invalid)], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[D"));
    assert_eq!(kei(&["report"], dir.path()).status.code(), Some(1));
    assert_eq!(
        kei(&["report", "missing.json"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(kei(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn compare_records() {
    let dir = tempfile::tempdir().unwrap();
    let run = |a: &str, b: &str| {
        let o = kei(
            &[
                "compare",
                path(&fixture(a)),
                path(&fixture(b)),
                "--format",
                "machine",
            ],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{a} {b}");
        json(&o)
    };
    let v = run("HOPF2", "SIXTHREE");
    assert_eq!(v["groups_isomorphic"], true);
    assert_eq!(v["phi_equivalent"], "equivalent");
    assert_eq!(v["qa_isomorphic"], true);
    assert_eq!(v["imq_isomorphic"], false);
    let v = run("FIG5L", "FIGT");
    assert_eq!(v["h1_isomorphic"], true);
    assert_eq!(v["phi_equivalent"], "not-equivalent");
    assert_eq!(v["qa_isomorphic"], serde_json::Value::Null);
    let v = run("LPRIME", "LDPRIME");
    assert_eq!(v["groups_isomorphic"], true);
    assert_eq!(v["phi_equivalent"], "not-equivalent");
}

#[test]
fn chain_violations_are_detected() {
    let base = Comparison {
        groups_isomorphic: true,
        h1_isomorphic: true,
        phi_equivalent: "equivalent".into(),
        obstruction: None,
        qa_isomorphic: Some(true),
        imq_isomorphic: Some(false),
    };
    assert!(base.chain_violation().is_none());
    let bad = Comparison {
        qa_isomorphic: Some(false),
        ..base.clone()
    };
    assert!(bad.chain_violation().is_some());
    let bad = Comparison {
        phi_equivalent: "not-equivalent".into(),
        qa_isomorphic: None,
        imq_isomorphic: Some(true),
        ..base.clone()
    };
    assert!(bad.chain_violation().is_some());
    let bad = Comparison {
        h1_isomorphic: false,
        ..base
    };
    assert!(bad.chain_violation().is_some());
}

fn copy_fixtures(to: &Path) {
    for name in [
        "HOPF2", "SIXTHREE", "TREFOIL", "FIGURE8", "FIG5L", "FIGT", "LPRIME", "LDPRIME", "T22T24",
    ] {
        std::fs::copy(fixture(name), to.join(format!("{name}.json"))).unwrap();
    }
}

#[test]
fn corpus_rows_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = kei(
        &[
            "corpus",
            path(&fixtures()),
            "--format",
            "machine",
            "--jobs",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o);
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[9].contains("\"failing_checks\":0"));
    assert!(dir.path().join(".quandle-cache").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 hits, 9 misses"));

    let o = kei(
        &["corpus", path(&fixtures()), "--format", "machine"],
        dir.path(),
    );
    assert_eq!(stdout(&o), first);
    assert!(String::from_utf8_lossy(&o.stderr).contains("9 hits, 0 misses"));
    let text = kei(&["corpus", path(&fixtures())], dir.path());
    assert!(stdout(&text).contains("9 reports, 0 errors, all property checks pass"));
}

#[test]
fn corpus_with_corrupted_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    copy_fixtures(&data);
    std::fs::write(data.join("TREFOIL.json"), "{ not json").unwrap();
    std::fs::create_dir(data.join("nested")).unwrap();
    std::fs::copy(fixture("HOPF"), data.join("nested/HOPF.json")).unwrap();
    let cache = dir.path().join("env-cache");
    let o = Command::new(env!("CARGO_BIN_EXE_kei"))
        .args(["corpus", path(&data), "--format", "machine"])
        .current_dir(dir.path())
        .env("QUANDLE_CACHE", &cache)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().filter(|r| r.get("error").is_some()).count(), 1);
    assert_eq!(rows[9]["summary"]["reports"], 8);
    assert_eq!(rows[9]["summary"]["errors"], 1);
    assert!(cache.exists());
    assert!(!dir.path().join(".quandle-cache").exists());
}

#[test]
fn cache_survives_garbage_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c");
    std::fs::write(&cache, "not a record\n").unwrap();
    let o = kei(
        &["corpus", path(&fixtures()), "--cache", path(&cache)],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let lines = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(lines.lines().count(), 9);
}
