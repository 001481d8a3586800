mod common;

use common::{normspec, stderr, stdout, temp_spec};

const CONTROLS: &str = r#"
Fact user Identified by String.
Fact dataset Identified by String.
Fact controls Identified by user * dataset
  Derived from (Foreach dataset:
    controls(user("Admin"),dataset)
      Where Not(Exists user: user != user("Admin")
        && controls(user,dataset))).
"#;

#[test]
fn emits_specification() {
    let (_g, p) = temp_spec(CONTROLS);
    let o = normspec(&["emit-asp", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("in((holds,I),S) :- in((derived,I),S)"));
}

#[test]
fn emits_search_rooted_at_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.eflint");
    let crit = dir.path().join("c.lp");
    std::fs::write(
        &spec,
        "Fact bidder Identified by String. Fact object Identified by String. Fact price Identified by Int.
         Function min-price-of Identified by object * price.
         Act raise-hand Actor bidder Holds when bidder(actor).
         +bidder(Amy). +min-price-of(Vase, 200).",
    )
    .unwrap();
    std::fs::write(&crit, "counterexample :- in((holds, bid(X,Obj,Price)), _) ; X != Y ; in((holds, bid(Y,Obj,Price)), _).\n").unwrap();
    let o = normspec(&[
        "emit-asp", "--search", "--breadth", "raise-hand", "--depth", "1000",
        "--criterion", crit.to_str().unwrap(), spec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("1 = { choose(I,S) : in((enabled,I), S), I = raise_hand(Actor) } :- state(S); state(S + 1)."), "{out}");
    assert!(out.contains(r#"in((create,bidder("Amy")),1)."#));
    assert!(out.contains(r#"in((create,min_price_of(object("Vase"),price(200))),1)."#));
    assert!(out.contains(":- counterexample."));
}

#[test]
fn search_without_criterion_fails() {
    let (_g, p) = temp_spec(CONTROLS);
    let o = normspec(&["emit-asp", "--search", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("criterion"));
}
