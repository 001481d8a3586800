mod common;

use normspec::types::DomainShape;
use normspec::Name;
use normspec_cli::repl::{Repl, Step};
use normspec_cli::EngineOptions;

fn out(r: &mut Repl, line: &str) -> Vec<String> {
    match r.step(line) {
        Step::Output(lines) => lines,
        other => panic!("{line}: {other:?}"),
    }
}

#[test]
fn revert_and_replay_gives_the_same_lineage() {
    let mut r = Repl::new(EngineOptions::default());
    let script = ["Fact p Identified by Int.", "+p(1).", "+p(2).", "-p(1)."];
    for l in script {
        out(&mut r, l);
    }
    let first: Vec<_> = r.session.history().into_iter().map(|h| h.2).collect();
    let kb = r.session.head().kb.clone();
    assert_eq!(out(&mut r, ":revert 0"), ["state 0"]);
    for l in script {
        out(&mut r, l);
    }
    let second: Vec<_> = r.session.history().into_iter().map(|h| h.2).collect();
    assert_eq!(first, second);
    assert_eq!(r.session.head().kb, kb);
    let ids: Vec<usize> = r.session.history().iter().map(|h| h.0).collect();
    assert_eq!(ids, [0, 5, 6, 7, 8]);
}

#[test]
fn options_mid_auction_with_finite_actors() {
    let mut r = Repl::new(EngineOptions::default());
    let auction = common::corpus_text("auction.eflint");
    let scenario_start = auction.find("+bidder(Alice)").unwrap();
    let spec = &auction[..scenario_start];
    out(&mut r, spec);
    out(&mut r, "Fact actor Identified by \"Alice\", \"Bob\", \"Chloe\", \"David\".");
    out(&mut r, "+bidder(Alice). +bidder(Bob). +auctioneer(David).");
    out(&mut r, "start-bidding(David, Watch).");
    let listed = out(&mut r, ":options");

    let st = r.session.head();
    let ev = st.evaluator(&r.session.config);
    let DomainShape::Finite(all) = st.registry.domain_of(&Name::new("raise-hand")).unwrap() else {
        panic!("raise-hand should be finite")
    };
    let want: Vec<String> = all.into_iter().filter(|i| ev.enabled(i).unwrap()).map(|i| i.to_string()).collect();
    let raise: Vec<String> = listed.iter().filter(|l| l.starts_with("raise-hand(")).cloned().collect();
    assert_eq!(raise, want);
    assert!(raise.contains(&"raise-hand(Alice)".to_string()));
}

#[test]
fn missing_input_leaves_the_state_alone() {
    let mut r = Repl::new(EngineOptions::default());
    out(&mut r, "Open Fact user Identified by String.");
    let head = r.head();
    assert_eq!(out(&mut r, "?Holds(user(Eve))."), ["MISSING INPUT: user(Eve)"]);
    assert_eq!(r.head(), head);
}

#[test]
fn multi_line_phrases_wait_for_completion() {
    let mut r = Repl::new(EngineOptions::default());
    assert_eq!(r.step("Fact p Identified by"), Step::Incomplete);
    assert_eq!(r.step("Fact p Identified by\n Int."), Step::Output(vec![]));
    assert_eq!(r.step(":quit"), Step::Quit);
}

#[test]
fn violations_of_the_last_step() {
    let mut r = Repl::new(EngineOptions::default());
    out(&mut r, "Fact ok. Act go Holds when ok(\"yes\").");
    let printed = out(&mut r, "go(Ann).");
    assert_eq!(printed, ["VIOLATION disabled-action go(Ann)"]);
    assert_eq!(out(&mut r, ":violations"), printed);
    let hist = out(&mut r, ":history");
    assert_eq!(hist.last().unwrap(), "3 <- 2: go(Ann).");
}

#[test]
fn loop_over_a_reader() {
    let input = b"Fact p Identified by Int.\n+p(3).\n?p(3).\n:quit\n?p(4).\n";
    let mut sink = Vec::new();
    normspec_cli::repl::run(EngineOptions::default(), &[], &mut &input[..], &mut sink, false).unwrap();
    assert_eq!(String::from_utf8(sink).unwrap(), "?p(3). True\n");
}
