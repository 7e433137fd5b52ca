use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kreglib::RunConfig;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kreglib")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_build(out: &Path, n: &str) {
    let o = run(&[
        "build", "--n", n, "--per-bin-target", "40", "--batch-cap", "20", "--draws", "200", "--max-draws", "400",
        "--null-draws", "500", "--seed", "5", "--out", s(out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_with_status_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--n", "7", "--k", "3"]).status.code(), Some(2));
    assert_eq!(run(&["gen-uniform", "--n", "4", "--k", "4"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n": [12], "bogus": 1}"#).unwrap();
    assert_eq!(run(&["build", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn estimate_prints_both_bases() {
    let natural = String::from_utf8(run(&["estimate", "--n", "20"]).stdout).unwrap();
    assert!(natural.contains("11.218"), "{natural}");
    let ten = run(&["estimate", "--n", "20,30", "--base", "ten"]);
    assert!(ten.status.success());
    assert_eq!(String::from_utf8(ten.stdout).unwrap().lines().count(), 3);
}

#[test]
fn empty_size_list_gives_an_empty_valid_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lib");
    let cfg = dir.path().join("run.json");
    let c = RunConfig { n: Vec::new(), out: out.clone(), ..RunConfig::default() };
    fs::write(&cfg, c.to_json()).unwrap();
    assert!(run(&["build", "--config", s(&cfg)]).status.success());
    assert_eq!(fs::read_to_string(out.join("manifest.csv")).unwrap().lines().count(), 1);
    assert!(run(&["verify", "--lib", s(&out)]).status.success());
}

#[test]
fn verify_flags_a_truncated_bin_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lib");
    small_build(&out, "15");
    assert!(run(&["verify", "--lib", s(&out)]).status.success());
    let file = fs::read_dir(out.join("n15")).unwrap().next().unwrap().unwrap().path();
    let text = fs::read_to_string(&file).unwrap();
    let kept: Vec<&str> = text.lines().skip(1).collect();
    fs::write(&file, kept.join("\n") + "\n").unwrap();
    let o = run(&["verify", "--lib", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stdout) + String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("count mismatch"), "{msg}");
}

#[test]
fn export_and_import_preserve_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lib");
    small_build(&out, "15");
    let (a, b) = (dir.path().join("a.zip"), dir.path().join("b.zip"));
    assert!(run(&["export", "--lib", s(&out), "--out", s(&a)]).status.success());
    assert!(run(&["export", "--lib", s(&out), "--out", s(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let back = dir.path().join("back");
    assert!(run(&["import", "--archive", s(&a), "--out", s(&back)]).status.success());
    assert_eq!(fs::read(out.join("manifest.csv")).unwrap(), fs::read(back.join("manifest.csv")).unwrap());
    assert!(run(&["verify", "--lib", s(&back)]).status.success());
}

#[test]
fn generator_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    let ok = |o: Output| assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    ok(run(&["gen-uniform", "--n", "15", "--draws", "300", "--seed", "1", "--out", s(&p("wm.csv"))]));
    ok(run(&["gen-cc", "--n", "15", "--runs", "2", "--seed", "1", "--out", s(&p("cc.csv"))]));
    ok(run(&["dedup", "--input", s(&p("wm.csv")), "--out", s(&p("wm_d.csv"))]));
    ok(run(&["merge", "--wm", s(&p("wm_d.csv")), "--cc", s(&p("cc.csv")), "--out", s(&p("merged.csv"))]));
    ok(run(&[
        "subsample", "--input", s(&p("merged.csv")), "--out", s(&p("final.csv")), "--draws", "100", "--max-draws", "200",
        "--null-draws", "300",
    ]));
    let merged = fs::read_to_string(p("merged.csv")).unwrap().lines().count();
    let last = fs::read_to_string(p("final.csv")).unwrap().lines().count();
    assert!(last > 1 && last <= merged);
    let edges = run(&["gen-uniform", "--n", "10", "--draws", "3", "--format", "edgelist"]);
    assert!(edges.status.success());
    assert!(String::from_utf8(edges.stdout).unwrap().lines().any(|l| l.split_whitespace().count() == 2));
}
