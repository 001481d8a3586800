mod common;

use common::{corpus_phrases, run_phrases};
use normspec::transition::{Config, Session, Violation};

#[test]
fn payment_duty_after_auction() {
    let mut s = Session::new(Config::default());
    let t = run_phrases(&mut s, &corpus_phrases("auction.eflint")).unwrap();
    for v in &t.violations {
        eprintln!("{v}");
    }
    assert_eq!(t.bools, [true]);
    assert!(t.violations.iter().all(|v| matches!(v, Violation::DisabledAction(_))));
}
