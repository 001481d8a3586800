//! `emit-asp`: translate a specification, optionally with a search program.

use std::io::Write;
use std::path::PathBuf;

use normspec::asp::{emit_search, emit_specification, RootItem, SearchSpec};
use normspec::eval::Env;
use normspec::syntax::{Phrase, StatementKind};
use normspec::transition::Session;
use normspec::Name;

use crate::report::error_text;
use crate::{exit_code, parse_files, EngineOptions, EXIT_FAILED, EXIT_OK, EXIT_PARSE};

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub breadth: Vec<String>,
    pub depth: usize,
    /// File holding the clingo rules that define `counterexample`.
    pub criterion: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct EmitConfig {
    pub inputs: Vec<PathBuf>,
    pub engine: EngineOptions,
    pub search: Option<SearchOptions>,
}

/// Execute the scenario, recording the instances of each `+` and trigger statement as root items.
fn roots(phrases: &[Phrase], engine: EngineOptions) -> Result<(Session, Vec<RootItem>), normspec::transition::TransitionError> {
    let mut session = Session::new(engine.config());
    let mut items = Vec::new();
    for p in phrases {
        if let Phrase::Statement(kind, e) = p {
            let st = session.head();
            let insts = st.evaluator(&session.config).instances(e, &mut Env::new())?;
            for i in insts {
                match kind {
                    StatementKind::Create => items.push(RootItem::Create(i)),
                    StatementKind::Trigger => items.push(RootItem::Trigger(i)),
                    StatementKind::Terminate => {}
                }
            }
        }
        session.exec(p)?;
    }
    Ok((session, items))
}

pub fn emit(cfg: &EmitConfig, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let phrases = match parse_files(&cfg.inputs) {
        Ok(ps) => ps,
        Err(e) => {
            writeln!(err, "parse error: {e}")?;
            return Ok(EXIT_PARSE);
        }
    };
    let (session, items) = match roots(&phrases, cfg.engine) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "{}", error_text(&e))?;
            return Ok(exit_code(&e));
        }
    };
    let reg = &session.head().registry;
    let mut text = match emit_specification(reg) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "ERROR: {e}")?;
            return Ok(EXIT_FAILED);
        }
    };
    if let Some(s) = &cfg.search {
        let criterion = match &s.criterion {
            Some(path) => match std::fs::read_to_string(path) {
                Ok(t) => t.lines().map(str::to_string).collect(),
                Err(e) => {
                    writeln!(err, "ERROR: {}: {e}", path.display())?;
                    return Ok(EXIT_FAILED);
                }
            },
            None => Vec::new(),
        };
        let spec = SearchSpec { breadth: s.breadth.iter().map(|b| Name::new(b)).collect(), depth: s.depth, root: items, criterion };
        match emit_search(reg, &spec) {
            Ok(t) => text.push_str(&t),
            Err(e) => {
                writeln!(err, "ERROR: {e}")?;
                return Ok(EXIT_FAILED);
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}
