//! JSON-lines service: one request object per line, one response per line.

use std::io::{BufRead, Write};

use normspec::eval::{Env, Evaluator};
use normspec::knowledge::{truth_of, Instance, Truth};
use normspec::syntax::{parse_expr, parse_str, Phrase};
use normspec::transition::{PhraseResult, Session};
use normspec::types::{DomainSpec, TypeRecord};
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::report::{error_json, result_json, PROTOCOL_VERSION};
use crate::EngineOptions;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Request {
    pub v: u64,
    #[serde(default)]
    pub id: Option<Json>,
    pub kind: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub additional_input: Vec<InputEntry>,
    #[serde(default)]
    pub state: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEntry {
    pub instance: String,
    pub value: bool,
}

pub struct Service {
    pub session: Session,
}

fn failure(msg: impl std::fmt::Display) -> Json {
    json!({"v": PROTOCOL_VERSION, "ok": false, "error": msg.to_string()})
}

fn domain_text(rec: &TypeRecord, svc: &Service) -> String {
    match &rec.domain {
        DomainSpec::String => "String".into(),
        DomainSpec::Int => "Int".into(),
        DomainSpec::Finite(lits) => lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "),
        DomainSpec::Product(roles) => {
            let reg = &svc.session.head().registry;
            roles
                .iter()
                .map(|r| match reg.field_type(rec, r) {
                    Ok(t) if &t != r => format!("{r}:{t}"),
                    _ => r.to_string(),
                })
                .collect::<Vec<_>>()
                .join(" * ")
        }
    }
}

impl Service {
    pub fn new(opts: EngineOptions) -> Service {
        Service { session: Session::new(opts.config()) }
    }

    /// Handle one raw request line.
    pub fn handle_line(&mut self, line: &str) -> Json {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return failure(format!("malformed request: {e}")),
        };
        let id = req.id.clone();
        let mut resp = self.handle(&req);
        if let (Some(id), Some(obj)) = (id, resp.as_object_mut()) {
            obj.insert("id".into(), id);
        }
        resp
    }

    pub fn handle(&mut self, req: &Request) -> Json {
        if req.v != PROTOCOL_VERSION {
            return failure(format!("unsupported protocol version {}", req.v));
        }
        match req.kind.as_str() {
            "phrase" => self.phrases(&req.text, &[], false),
            "query" => self.phrases(&req.text, &[], true),
            "additional-input+phrase" => match self.input(&req.additional_input) {
                Ok(input) => self.phrases(&req.text, &input, false),
                Err(e) => e,
            },
            "inspect-open-types" => self.open_types(),
            "revert" => match req.state {
                Some(n) => match self.session.revert(n) {
                    Ok(()) => json!({"v": PROTOCOL_VERSION, "ok": true, "state": n}),
                    Err(e) => failure(e),
                },
                None => failure("revert needs a state"),
            },
            other => failure(format!("unknown request kind {other}")),
        }
    }

    fn input(&self, entries: &[InputEntry]) -> Result<Vec<(Instance, bool)>, Json> {
        let st = self.session.head();
        let ev = Evaluator::new(&st.registry, &st.kb, self.session.config.close.eval);
        let mut out = Vec::new();
        for e in entries {
            let expr = parse_expr(&e.instance).map_err(|err| failure(format!("bad instance {}: {err}", e.instance)))?;
            let insts = ev.instances(&expr, &mut Env::new()).map_err(|err| failure(format!("bad instance {}: {err}", e.instance)))?;
            match &insts[..] {
                [one] => out.push((one.clone(), e.value)),
                _ => return Err(failure(format!("{} does not denote exactly one instance", e.instance))),
            }
        }
        Ok(out)
    }

    /// Run phrases on a copy of the session, keeping it only if every phrase succeeds.
    fn phrases(&mut self, text: &str, input: &[(Instance, bool)], queries_only: bool) -> Json {
        let phrases = match parse_str(text) {
            Ok(ps) => ps,
            Err(e) => return failure(format!("parse error: {e}")),
        };
        if queries_only && !phrases.iter().all(|p| matches!(p, Phrase::BoolQuery(_) | Phrase::InstanceQuery(_))) {
            return failure("query requests may only contain queries");
        }
        let mut work = self.session.clone();
        let mut results: Vec<PhraseResult> = Vec::new();
        for p in &phrases {
            match work.exec_with_input(p, input) {
                Ok(r) => results.push(r),
                Err(e) => return error_json(&e),
            }
        }
        self.session = work;
        json!({
            "v": PROTOCOL_VERSION,
            "ok": true,
            "state": self.session.head().id,
            "results": results.iter().map(result_json).collect::<Vec<_>>(),
        })
    }

    fn open_types(&self) -> Json {
        let st = self.session.head();
        let mut types = Vec::new();
        for rec in st.registry.user_types().filter(|r| r.open) {
            let mut assigned = Vec::new();
            for inst in st.kb.mentioned(&rec.name) {
                let truth = match truth_of(&st.kb, &st.registry, &inst) {
                    Ok(Truth::True) => json!(true),
                    Ok(Truth::False) => json!(false),
                    _ => Json::Null,
                };
                assigned.push(json!({"instance": inst.to_string(), "value": truth}));
            }
            types.push(json!({
                "name": rec.name.to_string(),
                "kind": rec.kind.as_str(),
                "var": rec.var,
                "function": rec.function,
                "domain": domain_text(rec, self),
                "finite": st.registry.is_finite(&rec.name).unwrap_or(false),
                "instances": assigned,
            }));
        }
        json!({"v": PROTOCOL_VERSION, "ok": true, "types": types})
    }
}

/// Serve requests from `input` until end of input.
pub fn run(opts: EngineOptions, input: &mut dyn BufRead, out: &mut dyn Write) -> std::io::Result<()> {
    let mut svc = Service::new(opts);
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(out, "{}", svc.handle_line(&line))?;
        out.flush()?;
    }
    Ok(())
}
