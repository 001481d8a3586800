use std::fmt::Write;

use super::ast::*;
use super::lexer::Keyword;
use crate::Name;

fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars().peekable();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    let body: Vec<char> = s.chars().collect();
    let mut i = 1;
    while i < body.len() && (body[i].is_alphanumeric() || body[i] == '_' || body[i] == '-') {
        if body[i] == '-' && !body.get(i + 1).is_some_and(|n| n.is_alphabetic() || *n == '_') {
            return false;
        }
        i += 1;
    }
    while i < body.len() && body[i] == '\'' {
        i += 1;
    }
    i == body.len() && Keyword::from_word(s).is_none()
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

/// Render a name so that it re-lexes to the same identifier.
pub fn name_text(n: &Name) -> String {
    let s = n.as_str();
    if is_plain_ident(s) && !is_upper(s) {
        s.to_string()
    } else {
        format!("[{s}]")
    }
}

/// Names in declaration heads and field lists may be uppercase without brackets.
fn decl_name_text(n: &Name) -> String {
    if is_plain_ident(n.as_str()) {
        n.to_string()
    } else {
        format!("[{n}]")
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// String atoms print bare when they would re-lex as an uppercase identifier.
pub fn string_text(s: &str) -> String {
    if is_plain_ident(s) && is_upper(s) {
        s.to_string()
    } else {
        quoted(s)
    }
}

const POSTFIX: u8 = 6;

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

fn expr(out: &mut String, e: &Expr, ctx: u8) {
    match e {
        Expr::Int(i) => {
            if *i < 0 && ctx >= POSTFIX {
                let _ = write!(out, "({i})");
            } else {
                let _ = write!(out, "{i}");
            }
        }
        Expr::Str(s) => out.push_str(&string_text(s)),
        Expr::Bool(true) => out.push_str("True"),
        Expr::Bool(false) => out.push_str("False"),
        Expr::Ref(n) => out.push_str(&name_text(n)),
        Expr::App(n, args) => {
            out.push_str(&name_text(n));
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match a {
                    Arg::Pos(e) => expr(out, e, 0),
                    Arg::Named(r, e) => {
                        out.push_str(&name_text(r));
                        out.push_str(" = ");
                        expr(out, e, 0);
                    }
                }
            }
            out.push(')');
        }
        Expr::Proj(inner, field) => {
            expr(out, inner, POSTFIX);
            out.push('.');
            out.push_str(&name_text(field));
        }
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let paren = p < ctx;
            if paren {
                out.push('(');
            }
            expr(out, l, p);
            let _ = write!(out, " {} ", op.symbol());
            expr(out, r, p + 1);
            if paren {
                out.push(')');
            }
        }
        Expr::Neg(inner) => {
            let paren = ctx >= POSTFIX;
            out.push_str(if paren { "(-(" } else { "-(" });
            expr(out, inner, 0);
            out.push_str(if paren { "))" } else { ")" });
        }
        Expr::Not(inner) => {
            out.push_str("Not(");
            expr(out, inner, 0);
            out.push(')');
        }
        Expr::Builtin(b, inner) => {
            out.push_str(match b {
                Builtin::Holds => "Holds(",
                Builtin::Enabled => "Enabled(",
                Builtin::Violated => "Violated(",
            });
            expr(out, inner, 0);
            out.push(')');
        }
        Expr::Quant(q, vars, body) => {
            out.push('(');
            out.push_str(match q {
                Quantifier::Foreach => "Foreach ",
                Quantifier::Forall => "Forall ",
                Quantifier::Exists => "Exists ",
            });
            let vs: Vec<String> = vars.iter().map(name_text).collect();
            out.push_str(&vs.join(", "));
            out.push_str(": ");
            expr(out, body, 0);
            out.push(')');
        }
        Expr::Agg(a, inner) => {
            out.push_str(match a {
                Aggregate::Count => "Count(",
                Aggregate::Sum => "Sum(",
                Aggregate::Max => "Max(",
                Aggregate::Min => "Min(",
            });
            expr(out, inner, 0);
            out.push(')');
        }
        Expr::When(l, r) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            expr(out, l, 0);
            out.push_str(" When ");
            expr(out, r, 1);
            if paren {
                out.push(')');
            }
        }
    }
}

fn domain_item(item: &DomainItem) -> String {
    match item {
        DomainItem::Int(i) => i.to_string(),
        DomainItem::Str(s) => quoted(s),
        DomainItem::Range(a, b) => format!("{a}..{b}"),
    }
}

fn items(list: &[DomainItem]) -> String {
    list.iter().map(domain_item).collect::<Vec<_>>().join(", ")
}

pub fn print_decl(d: &TypeDecl) -> String {
    let mut out = String::new();
    let m = &d.modifiers;
    if m.extend {
        out.push_str("Extend ");
    }
    match m.openness {
        Some(Openness::Open) => out.push_str("Open "),
        Some(Openness::Closed) => out.push_str("Closed "),
        None => {}
    }
    for (flag, kw) in [(m.var, "Var "), (m.function, "Function "), (m.bool_, "Bool "), (m.physical, "Physical ")] {
        if flag {
            out.push_str(kw);
        }
    }
    if let Some(k) = d.kind {
        out.push_str(k.as_str());
        out.push(' ');
    }
    out.push_str(&decl_name_text(&d.name));
    for c in &d.domain {
        out.push_str("\n  ");
        match c {
            DomainClause::IdentifiedBy(IdSpec::String) => out.push_str("Identified by String"),
            DomainClause::IdentifiedBy(IdSpec::Int) => out.push_str("Identified by Int"),
            DomainClause::IdentifiedBy(IdSpec::Items(list)) => {
                let _ = write!(out, "Identified by {}", items(list));
            }
            DomainClause::IdentifiedBy(IdSpec::Fields(fs)) => {
                let fs: Vec<String> = fs.iter().map(decl_name_text).collect();
                let _ = write!(out, "Identified by {}", fs.join(" * "));
            }
            DomainClause::Domain(list) => {
                let _ = write!(out, "Domain {}", items(list));
            }
            DomainClause::RelatedTo(fs) => {
                let fs: Vec<String> = fs.iter().map(decl_name_text).collect();
                let _ = write!(out, "Related to {}", fs.join(", "));
            }
            DomainClause::Actor(n) => {
                let _ = write!(out, "Actor {}", decl_name_text(n));
            }
            DomainClause::Recipient(n) => {
                let _ = write!(out, "Recipient {}", decl_name_text(n));
            }
            DomainClause::Holder(n) => {
                let _ = write!(out, "Holder {}", decl_name_text(n));
            }
            DomainClause::Claimant(n) => {
                let _ = write!(out, "Claimant {}", decl_name_text(n));
            }
        }
    }
    for c in &d.clauses {
        let _ = write!(out, "\n  {} ", c.kind.keywords());
        let es: Vec<String> = c.exprs.iter().map(print_expr).collect();
        out.push_str(&es.join(", "));
    }
    out
}

/// Expressions that open a statement must not be mistaken for a prefix.
fn statement_body(e: &Expr) -> String {
    let s = print_expr(e);
    if s.starts_with('-') || s.starts_with('+') || s.starts_with('?') {
        format!("({s})")
    } else {
        s
    }
}

fn phrase_body(p: &Phrase) -> String {
    match p {
        Phrase::Declarations(ds) => ds.iter().map(print_decl).collect::<Vec<_>>().join("\n"),
        Phrase::Statement(StatementKind::Create, e) => format!("+{}", statement_body(e)),
        Phrase::Statement(StatementKind::Terminate, e) => format!("-{}", statement_body(e)),
        Phrase::Statement(StatementKind::Trigger, e) => statement_body(e),
        Phrase::BoolQuery(e) => format!("?{}", statement_body(e)),
        Phrase::InstanceQuery(e) => format!("?-{}", statement_body(e)),
        Phrase::Parallel(ps) => {
            let inner: Vec<String> = ps.iter().map(phrase_body).collect();
            format!("{{ {} }}", inner.join(". "))
        }
    }
}

/// Canonical source text of one phrase, including its terminating full stop.
pub fn print_phrase(p: &Phrase) -> String {
    format!("{}.", phrase_body(p))
}

pub fn print_program(ps: &[Phrase]) -> String {
    let mut out = String::new();
    for p in ps {
        out.push_str(&print_phrase(p));
        out.push('\n');
    }
    out
}
