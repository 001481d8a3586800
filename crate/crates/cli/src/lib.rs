//! Front ends for the `normspec` binary: file runner, test mode, REPL,
//! JSON-lines service, ASP emission and the benchmark harness.

pub mod bench;
pub mod emit;
pub mod report;
pub mod repl;
pub mod run;
pub mod serve;

use normspec::derivation::{CloseOptions, DeriveError};
use normspec::eval::EvalOptions;
use normspec::syntax::{parse_program, FsResolver, ParseError, Phrase};
use normspec::transition::{Config, TransitionError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NON_STRATIFIED: i32 = 3;
pub const EXIT_MISSING_INPUT: i32 = 4;

/// Engine knobs shared by every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    pub max_fixpoint_iters: Option<usize>,
    pub atom_cap: Option<usize>,
    pub oracle_fallback: bool,
    pub empty_aggregate_error: bool,
}

impl EngineOptions {
    pub fn config(&self) -> Config {
        let defaults = CloseOptions::default();
        Config {
            close: CloseOptions {
                eval: EvalOptions { empty_aggregate_error: self.empty_aggregate_error },
                max_iterations: self.max_fixpoint_iters.unwrap_or(defaults.max_iterations),
                oracle_fallback: self.oracle_fallback,
                atom_cap: self.atom_cap.unwrap_or(defaults.atom_cap),
            },
            ..Config::default()
        }
    }
}

/// Exit code for an execution error.
pub fn exit_code(e: &TransitionError) -> i32 {
    match e {
        TransitionError::Derive(DeriveError::NonStratified(_)) => EXIT_NON_STRATIFIED,
        e if e.interrupt().is_some() => EXIT_MISSING_INPUT,
        _ => EXIT_FAILED,
    }
}

/// Parse every file in order, resolving includes relative to each file.
pub fn parse_files<P: AsRef<std::path::Path>>(paths: &[P]) -> Result<Vec<Phrase>, ParseError> {
    let mut out = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let name = p.to_string_lossy();
        let src = std::fs::read_to_string(p).map_err(|_| ParseError::MissingFile(name.to_string()))?;
        out.extend(parse_program(&src, &name, &FsResolver)?);
    }
    Ok(out)
}
