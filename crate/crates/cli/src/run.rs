//! Run and test modes over source files.

use std::io::Write;
use std::path::PathBuf;

use normspec::syntax::Phrase;
use normspec::transition::Session;

use crate::report::{error_json, error_text, failed_queries, result_json, result_lines, PROTOCOL_VERSION};
use crate::{exit_code, parse_files, EngineOptions, EXIT_FAILED, EXIT_OK, EXIT_PARSE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Print every query result and violation.
    Run,
    /// Print only failing Boolean queries; fail if there are any.
    Test,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub inputs: Vec<PathBuf>,
    pub engine: EngineOptions,
    pub json: bool,
}

/// Execute already-parsed phrases in a fresh session and return the exit code.
pub fn run_phrases(phrases: &[Phrase], cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let mut session = Session::new(cfg.engine.config());
    let mut failures = 0usize;
    for (n, p) in phrases.iter().enumerate() {
        let r = match session.exec(p) {
            Ok(r) => r,
            Err(e) => {
                if cfg.json {
                    writeln!(out, "{}", error_json(&e))?;
                } else {
                    writeln!(err, "{}", error_text(&e))?;
                    writeln!(err, "  in phrase {}: {}", n + 1, normspec::syntax::print_phrase(p))?;
                }
                return Ok(exit_code(&e));
            }
        };
        let mut failed = Vec::new();
        failed_queries(p, &r, &mut failed);
        failures += failed.len();
        match (cfg.mode, cfg.json) {
            (Mode::Run, true) => {
                let line = serde_json::json!({"v": PROTOCOL_VERSION, "ok": true, "phrase": n + 1, "result": result_json(&r)});
                writeln!(out, "{line}")?;
            }
            (Mode::Run, false) => {
                let mut lines = Vec::new();
                result_lines(p, &r, &mut lines);
                for l in lines {
                    writeln!(out, "{l}")?;
                }
            }
            (Mode::Test, _) => {
                for q in failed {
                    writeln!(out, "FAILED phrase {}: {q}", n + 1)?;
                }
            }
        }
    }
    if cfg.mode == Mode::Test {
        if failures > 0 {
            writeln!(out, "{failures} failing quer{}", if failures == 1 { "y" } else { "ies" })?;
            return Ok(EXIT_FAILED);
        }
        writeln!(out, "all queries passed")?;
    }
    Ok(EXIT_OK)
}

/// Parse and execute the input files.
pub fn run_file(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    match parse_files(&cfg.inputs) {
        Ok(phrases) => run_phrases(&phrases, cfg, out, err),
        Err(e) => {
            writeln!(err, "parse error: {e}")?;
            Ok(EXIT_PARSE)
        }
    }
}
