mod common;

use common::{corpus_phrases, run, run_phrases};
use normspec::derivation::DeriveError;
use normspec::knowledge::Interrupt;
use normspec::syntax::parse_str;
use normspec::transition::{Config, QueryResult, Session, TransitionError};
use normspec::Name;

fn session_for(file: &str) -> (Session, Vec<bool>) {
    let mut s = Session::new(Config::default());
    let t = run_phrases(&mut s, &corpus_phrases(file)).unwrap();
    (s, t.bools)
}

#[test]
fn count_over_finite_and_infinite_domains() {
    assert_eq!(session_for("numbers_finite.eflint").1, [true, true]);
    assert_eq!(session_for("numbers_infinite.eflint").1, [true, true]);
}

#[test]
fn rich_is_imperative() {
    let phrases = corpus_phrases("rich.eflint");
    let mut s = Session::new(Config::default());
    let chloe = parse_str("?Holds(rich(Chloe)).").unwrap().remove(0);
    for p in &phrases {
        s.exec(p).unwrap();
        if s.head().registry.contains("rich") {
            assert_eq!(s.exec(&chloe).unwrap(), normspec::transition::PhraseResult::Query(QueryResult::Bool(false)));
        }
    }
    assert_eq!(session_for("rich.eflint").1, [true, true]);
}

fn rejected(file: &str) -> String {
    let mut s = Session::new(Config::default());
    for p in corpus_phrases(file) {
        match s.exec(&p) {
            Ok(_) => {}
            Err(TransitionError::Derive(DeriveError::NonStratified(c))) => return c.to_string(),
            Err(e) => panic!("{file}: {e}"),
        }
    }
    panic!("{file} accepted")
}

#[test]
fn non_stratified_specs_are_rejected() {
    assert_eq!(rejected("ready.eflint"), "ready -[neg]-> ready");
    assert_eq!(rejected("auctioneer.eflint"), "auctioneer -[neg]-> auctioneer");
    assert_eq!(rejected("min_price_leq.eflint"), "min-price-of -[neg]-> min-price-of");
}

#[test]
fn strict_min_price_is_accepted() {
    let (s, bools) = session_for("min_price_lt.eflint");
    assert_eq!(bools, [true, true]);
    let held = s.head().kb.true_instances(&Name::new("min-price-of"));
    assert_eq!(held.len(), 1);
    assert_eq!(held[0].to_string(), "min-price-of(Vase, 200)");
}

#[test]
fn chain_and_primes() {
    assert_eq!(session_for("chain.eflint").1, [true]);
    let (s, bools) = session_for("primes.eflint");
    assert_eq!(bools, [true]);
    let primes: Vec<String> = s.head().kb.true_instances(&Name::new("prime")).iter().map(|p| p.to_string()).collect();
    assert_eq!(primes.first().map(String::as_str), Some("prime(2)"));
    assert_eq!(primes.last().map(String::as_str), Some("prime(97)"));
}

#[test]
fn open_type_interrupts() {
    let (mut s, _) = session_for("open_types.eflint");
    let q = parse_str("?Holds(user(Eve)).").unwrap().remove(0);
    let err = s.exec(&q).unwrap_err();
    assert!(matches!(err.interrupt(), Some(Interrupt::UnknownInstance(i)) if i.to_string() == "user(Eve)"), "{err}");
    let eve = normspec::knowledge::Instance::atomic("user", normspec::knowledge::Literal::str("Eve"));
    let r = s.exec_with_input(&q, &[(eve, true)]).unwrap();
    assert_eq!(r, normspec::transition::PhraseResult::Query(QueryResult::Bool(true)));
    assert!(s.exec(&q).unwrap_err().interrupt().is_some());
    let all = parse_str("?-bidder.").unwrap().remove(0);
    assert!(matches!(s.exec(&all).unwrap_err().interrupt(), Some(Interrupt::OpenEnumeration(t)) if t.as_str() == "user"));
}

#[test]
fn parallel_versus_sequential() {
    let (_, seq) = run("Fact a Identified by Int. +a(1). ?Holds(a(1)).");
    let (_, par) = run("Fact a Identified by Int. { +a(1). ?Holds(a(1)) }.");
    assert_eq!(seq.bools, [true]);
    assert_eq!(par.bools, [false]);
}

#[test]
fn parallel_mutual_recursion() {
    let (s, t) = run(
        "{ Fact even Identified by Int Derived from (Foreach odd: even(odd + 1) Where odd < 6). \
           Fact odd Identified by Int Derived from (Foreach even: odd(even + 1) Where even < 6). \
           +even(0) }. ?odd(5) && even(6).",
    );
    assert_eq!(t.bools, [true]);
    assert_eq!(s.head().kb.true_instances(&Name::new("odd")).len(), 3);
}
