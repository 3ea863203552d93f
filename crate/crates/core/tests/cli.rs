use std::process::{Command, Output};

use quatgroups::GroupPresentation;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatgroups")).args(args).env_remove("QUATGROUPS_CACHE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tcount_prints_t() {
    let o = cli(&["tcount", "5", "13"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3");
    assert_eq!(stdout(&cli(&["tcount", "7", "19"])).trim(), stdout(&cli(&["tcount", "19", "7"])).trim());
}

#[test]
fn classify_reports_case_and_predictions() {
    let out = stdout(&cli(&["classify", "3", "5"]));
    assert!(out.contains("C4"), "{out}");
    assert!(out.contains("Z_2 x Z_4^2"), "{out}");
    let out = stdout(&cli(&["classify", "5", "13"]));
    assert!(out.contains("r             1"), "{out}");
}

#[test]
fn present_writes_a_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let o = cli(&["present", "5", "13", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let p = GroupPresentation::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((p.generator_count(), p.relator_count()), (10, 21));
    assert!(p.verify_relators());
}

#[test]
fn abelianize_and_subgroup() {
    let o = cli(&["abelianize", "3", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "Z_2 x Z_4^2");
    let o = cli(&["subgroup", "3", "5", "--which", "lambda"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "Z_2 x Z_8^2");
    let o = cli(&["subgroup", "5", "13", "--which", "commutator", "--ceiling", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_formats() {
    let o = cli(&["sweep", "--bound", "13", "--filter", "1-1", "--compute", "t,gamma_ab", "--format", "json"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rec: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!((rec["p"].as_u64(), rec["l"].as_u64(), rec["t"].as_u64()), (Some(5), Some(13), Some(3)));
    assert_eq!(rec["verdicts"]["1"], "match");
    let o = cli(&["sweep", "--pairs", "3,5", "7,11", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.starts_with("p,l,r,case,t,"));
}

#[test]
fn verify_exit_codes() {
    let o = cli(&["verify", "--conjecture", "3", "--bound", "100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 mismatch"));
    let o = cli(&["verify", "--conjecture", "11", "--pairs", "3,5", "5,13"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("2 pairs, 2 match"));
}

#[test]
fn tables_exit_zero_when_matching() {
    for which in ["1", "3", "4"] {
        let o = cli(&["tables", "--which", which]);
        assert!(o.status.success(), "table {which}");
        assert!(stdout(&o).contains("matches"));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["tcount", "4", "13"]).status.code(), Some(2));
    assert_eq!(cli(&["tcount", "13", "13"]).status.code(), Some(2));
    assert_eq!(cli(&["tables", "--which", "7"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "--conjecture", "13", "--bound", "20"]).status.code(), Some(2));
    assert_eq!(cli(&["sweep", "--bound", "3"]).status.code(), Some(2));
    assert_eq!(cli(&["sweep", "--bound", "20", "--filter", "2-2"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
}
