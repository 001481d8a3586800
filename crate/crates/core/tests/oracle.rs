mod common;

use std::collections::BTreeSet;

use common::{corpus, load_base};
use normspec::derivation::{build_dependency_graph, check_stratification, close, CloseOptions, Stratification};
use normspec::eval::EvalOptions;
use normspec::oracle::{ground, stable_models, Verdict, DEFAULT_ATOM_CAP};
use normspec::Name;

fn verdict(src: &str) -> Verdict {
    let (reg, kb) = load_base(src);
    stable_models(&reg, &kb, DEFAULT_ATOM_CAP, EvalOptions::default()).unwrap().verdict
}

#[test]
fn rejected_specs_have_zero_or_many_models() {
    assert_eq!(verdict(&corpus("ready.eflint")), Verdict::Zero);
    assert_eq!(verdict(&corpus("auctioneer.eflint")), Verdict::Multiple(2));
    assert_eq!(verdict(&corpus("min_price_leq.eflint")), Verdict::Zero);
    assert_eq!(verdict(&corpus("min_price_lt.eflint")), Verdict::Unique);
}

#[test]
fn ready_grounds_to_one_self_negating_rule() {
    let (reg, kb) = load_base(&corpus("ready.eflint"));
    let prog = ground(&reg, &kb, &[Name::new("ready")], DEFAULT_ATOM_CAP, EvalOptions::default()).unwrap();
    assert_eq!(prog.rules.len(), 1);
    assert_eq!(prog.rules[0].to_string(), "ready(Amy) :- not ready(Amy).");
}

#[test]
fn auctioneer_rules_mention_each_other() {
    let (reg, kb) = load_base(&corpus("auctioneer.eflint"));
    let prog = ground(&reg, &kb, &[Name::new("auctioneer")], DEFAULT_ATOM_CAP, EvalOptions::default()).unwrap();
    let text: Vec<String> = prog.rules.iter().map(|r| r.to_string()).collect();
    assert_eq!(text, ["auctioneer(Amy) :- not auctioneer(Bob).", "auctioneer(Bob) :- not auctioneer(Amy)."]);
}

#[test]
fn no_rules_ground_to_nothing() {
    let (reg, kb) = load_base("Fact a Identified by Int. +a(1).");
    let prog = ground(&reg, &kb, &[], DEFAULT_ATOM_CAP, EvalOptions::default()).unwrap();
    assert!(prog.rules.is_empty());
}

/// Stratified specifications with small ground universes.
fn stratified() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/stratified");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.into_iter().map(|p| (p.display().to_string(), std::fs::read_to_string(&p).unwrap())).collect()
}

fn fixed(kb: &normspec::knowledge::KnowledgeBase, i: &normspec::knowledge::Instance) -> bool {
    kb.asserted.contains_key(i) || kb.additional.contains_key(i)
}

#[test]
fn closure_matches_unique_stable_model() {
    let specs = stratified();
    assert!(specs.len() >= 20);
    for (n, src) in &specs {
        let (reg, kb) = load_base(src);
        assert!(
            matches!(check_stratification(&build_dependency_graph(&reg)), Stratification::Stratified(_)),
            "spec {n} is not stratified"
        );
        let (closed, _) = close(&kb, &reg, &CloseOptions::default()).unwrap_or_else(|e| panic!("spec {n}: {e}"));
        let expected: BTreeSet<_> = closed.derived.iter().filter(|i| !fixed(&kb, i)).cloned().collect();
        let report = stable_models(&reg, &kb, 16, EvalOptions::default()).unwrap_or_else(|e| panic!("spec {n}: {e}"));
        assert_eq!(report.verdict, Verdict::Unique, "spec {n}");
        assert_eq!(report.models[0], expected, "spec {n}");
    }
}
