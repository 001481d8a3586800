//! Text and JSON renderings of phrase results.

use normspec::eval::Value;
use normspec::knowledge::{Instance, Interrupt};
use normspec::syntax::{print_phrase, Phrase};
use normspec::transition::{PhraseResult, QueryResult, TransitionError, Violation};
use serde_json::{json, Value as Json};

pub const PROTOCOL_VERSION: u64 = 1;

fn strings<'a>(it: impl IntoIterator<Item = &'a Instance>) -> Vec<String> {
    it.into_iter().map(|i| i.to_string()).collect()
}

pub fn value_json(v: &Value) -> Json {
    match v {
        Value::Bool(b) => json!(b),
        Value::Num(n) => json!(n),
        Value::Set(vs) => Json::Array(vs.iter().map(value_json).collect()),
        other => json!(other.to_string()),
    }
}

pub fn violation_json(v: &Violation) -> Json {
    match v {
        Violation::DisabledAction(i) => json!({"kind": "disabled-action", "instance": i.to_string()}),
        Violation::Duty(i, clause) => json!({"kind": "duty", "instance": i.to_string(), "clause": clause}),
    }
}

pub fn result_json(r: &PhraseResult) -> Json {
    match r {
        PhraseResult::Declared => json!({"type": "declared"}),
        PhraseResult::Query(QueryResult::Bool(b)) => json!({"type": "query", "value": b}),
        PhraseResult::Query(QueryResult::Values(vs)) => {
            json!({"type": "values", "values": vs.iter().map(value_json).collect::<Vec<_>>()})
        }
        PhraseResult::Transition(o) => json!({
            "type": "transition",
            "triggered": strings(&o.triggered),
            "created": strings(&o.created),
            "terminated": strings(&o.terminated),
            "obfuscated": strings(&o.obfuscated),
            "violations": o.violations.iter().map(violation_json).collect::<Vec<_>>(),
        }),
        PhraseResult::Parallel(rs) => json!({"type": "parallel", "results": rs.iter().map(result_json).collect::<Vec<_>>()}),
    }
}

pub fn missing_json(i: &Interrupt) -> Json {
    match i {
        Interrupt::UnknownInstance(inst) => json!({"instance": inst.to_string(), "type": inst.ty.to_string()}),
        Interrupt::OpenEnumeration(ty) => json!({"type": ty.to_string()}),
    }
}

/// The `ok: false` body for an execution error.
pub fn error_json(e: &TransitionError) -> Json {
    match e.interrupt() {
        Some(i) => json!({"v": PROTOCOL_VERSION, "ok": false, "missing": missing_json(i), "error": e.to_string()}),
        None => json!({"v": PROTOCOL_VERSION, "ok": false, "error": e.to_string()}),
    }
}

pub fn missing_text(i: &Interrupt) -> String {
    match i {
        Interrupt::UnknownInstance(inst) => format!("MISSING INPUT: {inst}"),
        Interrupt::OpenEnumeration(ty) => format!("MISSING INPUT: {ty}"),
    }
}

pub fn error_text(e: &TransitionError) -> String {
    match e.interrupt() {
        Some(i) => missing_text(i),
        None => format!("ERROR: {e}"),
    }
}

fn queries(p: &Phrase, out: &mut Vec<Phrase>) {
    match p {
        Phrase::Parallel(ps) => ps.iter().for_each(|q| queries(q, out)),
        Phrase::BoolQuery(_) | Phrase::InstanceQuery(_) => out.push(p.clone()),
        _ => {}
    }
}

/// Pair each query result of `r` with its query phrase; other results get `None`.
fn pairs<'a>(phrase: &Phrase, r: &'a PhraseResult) -> Vec<(Option<Phrase>, &'a PhraseResult)> {
    let PhraseResult::Parallel(rs) = r else {
        return vec![(Some(phrase.clone()), r)];
    };
    let mut qs = Vec::new();
    queries(phrase, &mut qs);
    let mut qs = qs.into_iter();
    rs.iter()
        .map(|r| match r {
            PhraseResult::Query(_) => (qs.next(), r),
            _ => (None, r),
        })
        .collect()
}

/// Lines printed in run mode for one executed phrase.
pub fn result_lines(phrase: &Phrase, r: &PhraseResult, out: &mut Vec<String>) {
    for (p, r) in pairs(phrase, r) {
        let text = p.as_ref().map(print_phrase).unwrap_or_default();
        match r {
            PhraseResult::Query(QueryResult::Bool(b)) => out.push(format!("{text} {}", if *b { "True" } else { "False" })),
            PhraseResult::Query(QueryResult::Values(vs)) => {
                out.push(text);
                out.extend(vs.iter().map(|v| format!("  {v}")));
            }
            PhraseResult::Transition(o) => out.extend(o.violations.iter().map(|v| v.to_string())),
            PhraseResult::Declared | PhraseResult::Parallel(_) => {}
        }
    }
}

/// Failing Boolean queries inside one result, for test mode.
pub fn failed_queries(phrase: &Phrase, r: &PhraseResult, out: &mut Vec<String>) {
    for (p, r) in pairs(phrase, r) {
        if let (Some(p), PhraseResult::Query(QueryResult::Bool(false))) = (p, r) {
            out.push(print_phrase(&p));
        }
    }
}

/// Violations inside one result.
pub fn violations(r: &PhraseResult) -> Vec<Violation> {
    match r {
        PhraseResult::Transition(o) => o.violations.clone(),
        PhraseResult::Parallel(rs) => rs.iter().flat_map(violations).collect(),
        _ => Vec::new(),
    }
}
