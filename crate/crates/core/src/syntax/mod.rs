//! Concrete syntax: tokens, phrases, expressions and the canonical printer.

pub mod ast;
pub mod lexer;
mod parser;
pub mod printer;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

pub use ast::*;
pub use lexer::Location;
pub use parser::parse_expr;
pub use printer::{print_decl, print_expr, print_phrase, print_program};

use parser::{parse_items, Item};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{file}:{loc}: expected {}, found {found}", expected_list(.expected))]
    Syntax {
        file: String,
        loc: Location,
        expected: Vec<String>,
        found: String,
    },
    #[error("include cycle: {}", .0.join(" -> "))]
    IncludeCycle(Vec<String>),
    #[error("cannot read included file {0}")]
    MissingFile(String),
}

fn expected_list(e: &[String]) -> String {
    match e {
        [] => "valid input".to_string(),
        [one] => one.clone(),
        many => format!("one of {}", many.join(", ")),
    }
}

/// Maps `#include`/`#require` paths to source text.
pub trait IncludeResolver {
    /// A canonical key for `path` as written inside the file `from`.
    fn canonicalize(&self, path: &str, from: &str) -> String;
    fn read(&self, canonical: &str) -> Option<String>;
}

/// Rejects every directive.
pub struct NoIncludes;

impl IncludeResolver for NoIncludes {
    fn canonicalize(&self, path: &str, _from: &str) -> String {
        path.to_string()
    }
    fn read(&self, _canonical: &str) -> Option<String> {
        None
    }
}

/// Resolves paths relative to the including file's directory.
pub struct FsResolver;

impl IncludeResolver for FsResolver {
    fn canonicalize(&self, path: &str, from: &str) -> String {
        let base = Path::new(from).parent().unwrap_or(Path::new(""));
        let joined: PathBuf = base.join(path);
        std::fs::canonicalize(&joined)
            .unwrap_or(joined)
            .to_string_lossy()
            .into_owned()
    }
    fn read(&self, canonical: &str) -> Option<String> {
        std::fs::read_to_string(canonical).ok()
    }
}

/// In-memory file table, keyed by exact path.
#[derive(Default)]
pub struct MapResolver(pub HashMap<String, String>);

impl IncludeResolver for MapResolver {
    fn canonicalize(&self, path: &str, _from: &str) -> String {
        path.to_string()
    }
    fn read(&self, canonical: &str) -> Option<String> {
        self.0.get(canonical).cloned()
    }
}

/// Parse source text that may contain directives.
pub fn parse_program(
    src: &str,
    file: &str,
    resolver: &dyn IncludeResolver,
) -> Result<Vec<Phrase>, ParseError> {
    let mut out = Vec::new();
    let mut required = HashSet::new();
    let mut stack = vec![file.to_string()];
    expand(src, file, resolver, &mut stack, &mut required, &mut out)?;
    Ok(out)
}

/// Parse source text without directive support.
pub fn parse_str(src: &str) -> Result<Vec<Phrase>, ParseError> {
    parse_program(src, "<input>", &NoIncludes)
}

fn expand(
    src: &str,
    file: &str,
    resolver: &dyn IncludeResolver,
    stack: &mut Vec<String>,
    required: &mut HashSet<String>,
    out: &mut Vec<Phrase>,
) -> Result<(), ParseError> {
    for item in parse_items(src, file)? {
        match item {
            Item::Phrase(p) => out.push(p),
            Item::Directive { require, path, .. } => {
                let key = resolver.canonicalize(&path, file);
                if stack.contains(&key) {
                    let mut cycle = stack.clone();
                    cycle.push(key);
                    return Err(ParseError::IncludeCycle(cycle));
                }
                if require && !required.insert(key.clone()) {
                    continue;
                }
                let text = resolver.read(&key).ok_or_else(|| ParseError::MissingFile(key.clone()))?;
                stack.push(key.clone());
                expand(&text, &key, resolver, stack, required, out)?;
                stack.pop();
            }
        }
    }
    Ok(())
}
