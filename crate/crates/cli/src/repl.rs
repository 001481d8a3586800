//! Interactive exploration of scenarios.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use normspec::syntax::{parse_str, ParseError, Phrase};
use normspec::transition::{Session, Violation};

use crate::report::{error_text, result_lines, violations};
use crate::EngineOptions;

const HELP: &str = "\
phrases are executed against the current state; meta-commands:
  :state        instances that currently hold
  :options      enabled acts and events over finite domains
  :revert N     move to state N
  :history      states from the root to the current one
  :violations   violations raised by the step into the current state
  :help         this text
  :quit         leave";

pub struct Repl {
    pub session: Session,
    violations: BTreeMap<usize, Vec<Violation>>,
}

/// Outcome of one input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Output(Vec<String>),
    /// The input is an unfinished phrase.
    Incomplete,
    Quit,
}

impl Repl {
    pub fn new(opts: EngineOptions) -> Repl {
        Repl { session: Session::new(opts.config()), violations: BTreeMap::new() }
    }

    pub fn head(&self) -> usize {
        self.session.head().id
    }

    /// Execute one input; errors are printed and leave the session as it was.
    pub fn step(&mut self, input: &str) -> Step {
        let line = input.trim();
        if line.is_empty() {
            return Step::Output(Vec::new());
        }
        if let Some(cmd) = line.strip_prefix(':') {
            return self.meta(cmd);
        }
        let phrases = match parse_str(line) {
            Ok(ps) => ps,
            Err(ParseError::Syntax { ref found, .. }) if found == "end of input" => return Step::Incomplete,
            Err(e) => return Step::Output(vec![format!("parse error: {e}")]),
        };
        Step::Output(self.exec_all(&phrases))
    }

    /// Execute phrases in order, stopping at the first error.
    pub fn exec_all(&mut self, phrases: &[Phrase]) -> Vec<String> {
        let mut out = Vec::new();
        for p in phrases {
            match self.session.exec(p) {
                Ok(r) => {
                    result_lines(p, &r, &mut out);
                    let vs = violations(&r);
                    if self.session.head().parent.is_some() {
                        self.violations.entry(self.head()).or_insert(vs);
                    }
                }
                Err(e) => {
                    out.push(error_text(&e));
                    break;
                }
            }
        }
        out
    }

    fn meta(&mut self, cmd: &str) -> Step {
        let mut words = cmd.split_whitespace();
        let out = match (words.next().unwrap_or(""), words.next()) {
            ("quit" | "q", _) => return Step::Quit,
            ("help" | "h", _) => HELP.lines().map(str::to_string).collect(),
            ("state", _) => {
                let st = self.session.head();
                let mut out = Vec::new();
                for rec in st.registry.user_types() {
                    out.extend(st.kb.true_instances(&rec.name).iter().map(|i| i.to_string()));
                }
                out
            }
            ("options", _) => match self.session.options() {
                Ok(is) => is.iter().map(|i| i.to_string()).collect(),
                Err(e) => vec![error_text(&e.into())],
            },
            ("revert", Some(n)) => match n.parse::<usize>() {
                Ok(id) => match self.session.revert(id) {
                    Ok(()) => vec![format!("state {id}")],
                    Err(e) => vec![error_text(&e)],
                },
                Err(_) => vec![format!("not a state id: {n}")],
            },
            ("history", _) => self
                .session
                .history()
                .into_iter()
                .map(|(id, parent, text)| match parent {
                    Some(p) => format!("{id} <- {p}: {}", one_line(&text)),
                    None => format!("{id}"),
                })
                .collect(),
            ("violations", _) => {
                let mut out: Vec<String> =
                    self.violations.get(&self.head()).into_iter().flatten().map(|v| v.to_string()).collect();
                let st = self.session.head();
                match st.duty_violations(&self.session.config) {
                    Ok(vs) => {
                        for l in vs.iter().map(|v| v.to_string()) {
                            if !out.contains(&l) {
                                out.push(l);
                            }
                        }
                    }
                    Err(e) => out.push(error_text(&e.into())),
                }
                out
            }
            (other, _) => vec![format!("unknown command :{other} (try :help)")],
        };
        Step::Output(out)
    }
}

fn one_line(text: &str) -> String {
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    match flat.char_indices().nth(72) {
        Some((i, _)) => format!("{} ...", &flat[..i]),
        None => flat,
    }
}

/// Read-eval-print loop over `input` until end of input or `:quit`.
pub fn run(
    opts: EngineOptions,
    preload: &[Phrase],
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    prompt: bool,
) -> std::io::Result<()> {
    let mut repl = Repl::new(opts);
    for line in repl.exec_all(preload) {
        writeln!(out, "{line}")?;
    }
    let mut buf = String::new();
    loop {
        if prompt {
            write!(out, "{}", if buf.is_empty() { format!("{}> ", repl.head()) } else { "... ".into() })?;
            out.flush()?;
        }
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            if !buf.trim().is_empty() {
                writeln!(out, "parse error: unexpected end of input")?;
            }
            return Ok(());
        }
        buf.push_str(&line);
        match repl.step(&buf) {
            Step::Incomplete => continue,
            Step::Quit => return Ok(()),
            Step::Output(lines) => {
                for l in lines {
                    writeln!(out, "{l}")?;
                }
            }
        }
        buf.clear();
    }
}
