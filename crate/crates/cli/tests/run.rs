mod common;

use std::process::Command;

use common::{corpus, normspec, stderr, stdout, temp_spec};

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn auction_runs_and_reports_the_final_query() {
    let o = normspec(&["run", path(&corpus("auction.eflint"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "?payment-duty(Bob, David, 140). True"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("VIOLATION disabled-action place-bid")).count(), 4);
}

#[test]
fn failing_query_in_test_mode() {
    let (_g, p) = temp_spec("?True.\n?False.\n");
    let o = normspec(&["test", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("FAILED")).map(str::to_string).collect();
    assert_eq!(failed, ["FAILED phrase 2: ?False."]);
}

#[test]
fn self_negation_is_rejected_with_its_cycle() {
    let o = normspec(&["run", path(&corpus("ready.eflint"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ready -[neg]-> ready"), "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2() {
    let (_g, p) = temp_spec("Fact x Identified by.\n");
    assert_eq!(normspec(&["run", path(&p)]).status.code(), Some(2));
    assert_eq!(normspec(&["run", "/nonexistent/file.eflint"]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_4() {
    let (_g, p) = temp_spec("Open Fact user Identified by String.\n?Holds(user(Eve)).\n");
    let o = normspec(&["run", path(&p)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("MISSING INPUT: user(Eve)"), "{}", stderr(&o));
}

#[test]
fn golden_corpus_in_test_mode() {
    let rejected = ["ready.eflint", "auctioneer.eflint", "min_price_leq.eflint"];
    let mut files: Vec<_> = std::fs::read_dir(corpus(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "eflint"))
        .collect();
    files.sort();
    assert!(files.len() >= 11);
    for f in files {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        let o = normspec(&["test", path(&f)]);
        let want = if rejected.contains(&name.as_str()) { 3 } else { 0 };
        assert_eq!(o.status.code(), Some(want), "{name}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn json_output_is_versioned() {
    let o = normspec(&["run", "--json", path(&corpus("numbers_finite.eflint"))]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l["v"] == 1 && l["ok"] == true));
}

#[test]
fn atom_cap_environment_variable_wins() {
    let spec = corpus("min_price_lt.eflint");
    let ok = normspec(&["test", "--atom-cap", "0", path(&spec)]);
    let o = Command::new(env!("CARGO_BIN_EXE_normspec"))
        .args(["test", "--atom-cap", "0", path(&spec)])
        .env("NORMSPEC_ATOM_CAP", "20")
        .output()
        .unwrap();
    assert_ne!(ok.status.code(), Some(0), "cap 0 should be too small");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.txt");
    let o = normspec(&["run", "-o", path(&out), path(&corpus("chain.eflint"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(out).unwrap().contains("True"));
}
