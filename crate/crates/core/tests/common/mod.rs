#![allow(dead_code)]

use normspec::syntax::{parse_program, parse_str, FsResolver, Phrase};
use normspec::transition::{Config, PhraseResult, QueryResult, Session, TransitionError, Violation};

pub fn corpus(name: &str) -> String {
    let path = format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn corpus_phrases(name: &str) -> Vec<Phrase> {
    let path = format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_program(&corpus(name), &path, &FsResolver).unwrap()
}

#[derive(Debug, Default)]
pub struct Trace {
    pub bools: Vec<bool>,
    pub violations: Vec<Violation>,
}

pub fn run_phrases(session: &mut Session, phrases: &[Phrase]) -> Result<Trace, TransitionError> {
    let mut t = Trace::default();
    for p in phrases {
        record(&mut t, session.exec(p)?);
    }
    Ok(t)
}

fn record(t: &mut Trace, r: PhraseResult) {
    match r {
        PhraseResult::Query(QueryResult::Bool(b)) => t.bools.push(b),
        PhraseResult::Transition(o) => t.violations.extend(o.violations),
        PhraseResult::Parallel(rs) => rs.into_iter().for_each(|r| record(t, r)),
        _ => {}
    }
}

pub fn run(src: &str) -> (Session, Trace) {
    let mut s = Session::new(Config::default());
    let t = run_phrases(&mut s, &parse_str(src).unwrap()).unwrap();
    (s, t)
}

/// Declarations and `+` statements only, with no closure: the raw base layers.
pub fn load_base(src: &str) -> (normspec::types::Registry, normspec::knowledge::KnowledgeBase) {
    use normspec::eval::{Env, EvalOptions, Evaluator};
    use normspec::knowledge::{assert_instance, Assertion, KnowledgeBase};
    use normspec::syntax::StatementKind;
    let mut reg = normspec::types::Registry::new();
    let mut kb = KnowledgeBase::new();
    for p in parse_str(src).unwrap() {
        match p {
            Phrase::Declarations(ds) => reg = reg.apply_declarations(&ds).unwrap(),
            Phrase::Statement(StatementKind::Create, e) => {
                let insts = Evaluator::new(&reg, &kb, EvalOptions::default()).instances(&e, &mut Env::new()).unwrap();
                for i in insts {
                    assert_instance(&mut kb, &reg, &i, Assertion::True, true).unwrap();
                }
            }
            _ => {}
        }
    }
    (reg, kb)
}
