use super::ast::*;
use super::lexer::{tokenize, Keyword, Location, Tok, Token};
use super::ParseError;
use crate::Name;

/// A top-level fragment before directives are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Item {
    Phrase(Phrase),
    Directive { require: bool, path: String, loc: Location },
}

pub(crate) fn parse_items(src: &str, file: &str) -> Result<Vec<Item>, ParseError> {
    let tokens = tokenize(src, file)?;
    let mut p = Parser { tokens, pos: 0, file };
    p.program()
}

/// Parse a single expression, e.g. for the service protocol's additional input.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src, "<expr>")?;
    let mut p = Parser { tokens, pos: 0, file: "<expr>" };
    let e = p.expr()?;
    if p.peek() == &Tok::Stop {
        p.bump();
    }
    p.expect_tok(&Tok::Eof)?;
    Ok(e)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
}

fn is_decl_start(t: &Tok) -> bool {
    use Keyword::*;
    matches!(
        t,
        Tok::Kw(Fact | Act | Event | Duty | Var | Function | Bool | Physical | Open | Closed | Extend)
    )
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn loc(&self) -> Location {
        self.tokens[self.pos].loc
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            file: self.file.to_string(),
            loc: self.loc(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        self.eat(&Tok::Kw(k))
    }

    fn expect_tok(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(&[&t.to_string()])
        }
    }

    fn expect_kw(&mut self, k: Keyword) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(&[&format!("`{}`", k.as_str())])
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Bracketed(s) => {
                self.bump();
                Ok(Name::from(s))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn program(&mut self) -> Result<Vec<Item>, ParseError> {
        let mut items = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(items),
                Tok::Stop => {
                    self.bump();
                }
                Tok::Directive(kind) => {
                    let loc = self.loc();
                    self.bump();
                    let path = match self.bump() {
                        Tok::Str(s) => s,
                        _ => {
                            self.pos -= 1;
                            return self.error(&["quoted path"]);
                        }
                    };
                    self.end_of_fragment()?;
                    items.push(Item::Directive { require: kind == "require", path, loc });
                }
                Tok::LBrace => {
                    let set = self.parallel()?;
                    self.end_of_fragment()?;
                    items.push(Item::Phrase(set));
                }
                _ => {
                    let p = self.phrase()?;
                    self.end_of_fragment()?;
                    items.push(Item::Phrase(p));
                }
            }
        }
    }

    fn end_of_fragment(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Stop => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.error(&["full stop"]),
        }
    }

    fn parallel(&mut self) -> Result<Phrase, ParseError> {
        self.expect_tok(&Tok::LBrace)?;
        let mut phrases = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(Phrase::Parallel(phrases));
                }
                Tok::Stop => {
                    self.bump();
                }
                Tok::LBrace => phrases.push(self.parallel()?),
                _ => {
                    phrases.push(self.phrase()?);
                    if !matches!(self.peek(), Tok::Stop | Tok::RBrace) {
                        return self.error(&["full stop", "`}`"]);
                    }
                }
            }
        }
    }

    fn phrase(&mut self) -> Result<Phrase, ParseError> {
        if is_decl_start(self.peek()) {
            let mut decls = Vec::new();
            while is_decl_start(self.peek()) {
                decls.push(self.decl()?);
            }
            return Ok(Phrase::Declarations(decls));
        }
        match self.peek() {
            Tok::QuestionMinus => {
                self.bump();
                Ok(Phrase::InstanceQuery(self.expr()?))
            }
            Tok::Question => {
                self.bump();
                Ok(Phrase::BoolQuery(self.expr()?))
            }
            Tok::Plus => {
                self.bump();
                Ok(Phrase::Statement(StatementKind::Create, self.expr()?))
            }
            Tok::Minus => {
                self.bump();
                Ok(Phrase::Statement(StatementKind::Terminate, self.expr()?))
            }
            Tok::Eof | Tok::Stop | Tok::RBrace => {
                self.error(&["declaration", "statement", "query"])
            }
            _ => Ok(Phrase::Statement(StatementKind::Trigger, self.expr()?)),
        }
    }

    fn decl(&mut self) -> Result<TypeDecl, ParseError> {
        let mut m = Modifiers::default();
        let mut kind = None;
        let start = self.loc();
        if self.eat_kw(Keyword::Extend) {
            m.extend = true;
        }
        loop {
            match self.peek() {
                Tok::Kw(Keyword::Open) => m.openness = Some(Openness::Open),
                Tok::Kw(Keyword::Closed) => m.openness = Some(Openness::Closed),
                Tok::Kw(Keyword::Var) => m.var = true,
                Tok::Kw(Keyword::Function) => m.function = true,
                Tok::Kw(Keyword::Bool) => m.bool_ = true,
                Tok::Kw(Keyword::Physical) => m.physical = true,
                _ => break,
            }
            self.bump();
        }
        match self.peek() {
            Tok::Kw(Keyword::Fact) => kind = Some(Kind::Fact),
            Tok::Kw(Keyword::Act) => kind = Some(Kind::Act),
            Tok::Kw(Keyword::Event) => kind = Some(Kind::Event),
            Tok::Kw(Keyword::Duty) => kind = Some(Kind::Duty),
            _ => {}
        }
        if kind.is_some() {
            self.bump();
        }
        let plain_extend = m.extend && m == Modifiers { extend: true, ..Modifiers::default() };
        if kind.is_none() && plain_extend {
            return self.error(&["type kind"]);
        }
        let name = self.name()?;
        let mut domain = Vec::new();
        loop {
            let before = self.loc();
            let clause = match self.peek() {
                Tok::Kw(Keyword::Identified) => {
                    self.bump();
                    self.expect_kw(Keyword::By)?;
                    DomainClause::IdentifiedBy(self.id_spec()?)
                }
                Tok::Kw(Keyword::Domain) => {
                    self.bump();
                    DomainClause::Domain(self.domain_items()?)
                }
                Tok::Kw(Keyword::Related) => {
                    self.bump();
                    self.expect_kw(Keyword::To)?;
                    let mut names = vec![self.name()?];
                    while self.eat(&Tok::Comma) {
                        names.push(self.name()?);
                    }
                    DomainClause::RelatedTo(names)
                }
                Tok::Kw(Keyword::Actor) => {
                    self.bump();
                    DomainClause::Actor(self.name()?)
                }
                Tok::Kw(Keyword::Recipient) => {
                    self.bump();
                    DomainClause::Recipient(self.name()?)
                }
                Tok::Kw(Keyword::Holder) => {
                    self.bump();
                    DomainClause::Holder(self.name()?)
                }
                Tok::Kw(Keyword::Claimant) => {
                    self.bump();
                    DomainClause::Claimant(self.name()?)
                }
                _ => break,
            };
            if m.extend {
                return Err(ParseError::Syntax {
                    file: self.file.to_string(),
                    loc: before,
                    expected: vec!["accumulating clause".into()],
                    found: "domain clause in an Extend declaration".into(),
                });
            }
            domain.push(clause);
        }
        let mut clauses = Vec::new();
        loop {
            let kind = match (self.peek(), self.peek_at(1)) {
                (Tok::Kw(Keyword::Holds), Tok::Kw(Keyword::LowerWhen)) => ClauseKind::HoldsWhen,
                (Tok::Kw(Keyword::Derived), _) => ClauseKind::DerivedFrom,
                (Tok::Kw(Keyword::Conditioned), _) => ClauseKind::ConditionedBy,
                (Tok::Kw(Keyword::Violated), Tok::Kw(Keyword::LowerWhen)) => {
                    ClauseKind::ViolatedWhen
                }
                (Tok::Kw(Keyword::Syncs), _) => ClauseKind::SyncsWith,
                (Tok::Kw(Keyword::Creates), _) => ClauseKind::Creates,
                (Tok::Kw(Keyword::Terminates), _) => ClauseKind::Terminates,
                (Tok::Kw(Keyword::Obfuscates), _) => ClauseKind::Obfuscates,
                _ => break,
            };
            self.bump();
            match kind {
                ClauseKind::HoldsWhen | ClauseKind::ViolatedWhen => {
                    self.expect_kw(Keyword::LowerWhen)?
                }
                ClauseKind::DerivedFrom => self.expect_kw(Keyword::From)?,
                ClauseKind::ConditionedBy => self.expect_kw(Keyword::By)?,
                ClauseKind::SyncsWith => self.expect_kw(Keyword::With)?,
                _ => {}
            }
            let mut exprs = vec![self.expr()?];
            loop {
                if self.eat(&Tok::Comma) {
                    exprs.push(self.expr()?);
                } else if self.peek() == &Tok::LParen {
                    // tolerate a missing comma between parenthesised items
                    exprs.push(self.expr()?);
                } else {
                    break;
                }
            }
            clauses.push(Clause { kind, exprs });
        }
        if m.extend && clauses.is_empty() {
            return Err(ParseError::Syntax {
                file: self.file.to_string(),
                loc: start,
                expected: vec!["accumulating clause".into()],
                found: self.peek().to_string(),
            });
        }
        Ok(TypeDecl { name, kind, modifiers: m, domain, clauses })
    }

    fn id_spec(&mut self) -> Result<IdSpec, ParseError> {
        match self.peek() {
            Tok::Kw(Keyword::String) => {
                self.bump();
                Ok(IdSpec::String)
            }
            Tok::Kw(Keyword::Int) => {
                self.bump();
                Ok(IdSpec::Int)
            }
            Tok::Int(_) | Tok::Str(_) | Tok::Minus => Ok(IdSpec::Items(self.domain_items()?)),
            Tok::Ident(_) | Tok::Bracketed(_) => {
                let mut fields = vec![self.name()?];
                while self.eat(&Tok::Star) {
                    fields.push(self.name()?);
                }
                Ok(IdSpec::Fields(fields))
            }
            _ => self.error(&["`String`", "`Int`", "literal", "field list"]),
        }
    }

    fn int_lit(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => self.error(&["integer"]),
        }
    }

    fn domain_items(&mut self) -> Result<Vec<DomainItem>, ParseError> {
        let mut items = Vec::new();
        loop {
            let item = match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    DomainItem::Str(s)
                }
                Tok::Int(_) | Tok::Minus => {
                    let lo = self.int_lit()?;
                    if self.eat(&Tok::DotDot) {
                        DomainItem::Range(lo, self.int_lit()?)
                    } else {
                        DomainItem::Int(lo)
                    }
                }
                _ => return self.error(&["integer", "string literal"]),
            };
            items.push(item);
            if !self.eat(&Tok::Comma) {
                return Ok(items);
            }
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.binary(1)?;
        while matches!(self.peek(), Tok::Kw(Keyword::When | Keyword::Where)) {
            self.bump();
            let guard = self.binary(1)?;
            e = Expr::When(Box::new(e), Box::new(guard));
        }
        Ok(e)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Minus {
            self.bump();
            if let Tok::Int(i) = *self.peek() {
                self.bump();
                return self.postfix(Expr::Int(-i));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let e = self.primary()?;
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr, ParseError> {
        while self.eat(&Tok::Dot) {
            e = Expr::Proj(Box::new(e), self.name()?);
        }
        Ok(e)
    }

    fn parenthesised(&mut self) -> Result<Expr, ParseError> {
        self.expect_tok(&Tok::LParen)?;
        let e = self.expr()?;
        self.expect_tok(&Tok::RParen)?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::Kw(Keyword::True) => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw(Keyword::False) => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::LParen => self.parenthesised(),
            Tok::Kw(k @ (Keyword::Foreach | Keyword::Forall | Keyword::Exists)) => {
                self.bump();
                let q = match k {
                    Keyword::Foreach => Quantifier::Foreach,
                    Keyword::Forall => Quantifier::Forall,
                    _ => Quantifier::Exists,
                };
                let mut vars = vec![self.name()?];
                while self.eat(&Tok::Comma) {
                    vars.push(self.name()?);
                }
                self.expect_tok(&Tok::Colon)?;
                let body = self.expr()?;
                Ok(Expr::Quant(q, vars, Box::new(body)))
            }
            Tok::Kw(k @ (Keyword::Count | Keyword::Sum | Keyword::Max | Keyword::Min)) => {
                self.bump();
                let a = match k {
                    Keyword::Count => Aggregate::Count,
                    Keyword::Sum => Aggregate::Sum,
                    Keyword::Max => Aggregate::Max,
                    _ => Aggregate::Min,
                };
                Ok(Expr::Agg(a, Box::new(self.parenthesised()?)))
            }
            Tok::Kw(Keyword::Not) => {
                self.bump();
                Ok(Expr::Not(Box::new(self.parenthesised()?)))
            }
            Tok::Kw(k @ (Keyword::Holds | Keyword::Enabled | Keyword::Violated)) => {
                self.bump();
                let b = match k {
                    Keyword::Holds => Builtin::Holds,
                    Keyword::Enabled => Builtin::Enabled,
                    _ => Builtin::Violated,
                };
                Ok(Expr::Builtin(b, Box::new(self.parenthesised()?)))
            }
            Tok::Ident(_) | Tok::Bracketed(_) => {
                let bracketed = matches!(tok, Tok::Bracketed(_));
                let name = self.name()?;
                if self.peek() == &Tok::LParen {
                    self.bump();
                    let args = self.args()?;
                    return Ok(Expr::App(name, args));
                }
                if !bracketed && is_upper(name.as_str()) {
                    Ok(Expr::Str(name.as_str().to_string()))
                } else {
                    Ok(Expr::Ref(name))
                }
            }
            _ => self.error(&["expression"]),
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            let named = matches!(self.peek(), Tok::Ident(_) | Tok::Bracketed(_))
                && self.peek_at(1) == &Tok::Assign;
            if named {
                let n = self.name()?;
                self.bump();
                args.push(Arg::Named(n, self.expr()?));
            } else {
                args.push(Arg::Pos(self.expr()?));
            }
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            if !self.eat(&Tok::Comma) {
                return self.error(&["`,`", "`)`"]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrases(src: &str) -> Vec<Phrase> {
        parse_items(src, "<t>")
            .unwrap()
            .into_iter()
            .map(|i| match i {
                Item::Phrase(p) => p,
                Item::Directive { .. } => panic!("directive"),
            })
            .collect()
    }

    #[test]
    fn assertion_of_bare_atom() {
        assert_eq!(
            phrases("+bidder(Alice)."),
            vec![Phrase::Statement(
                StatementKind::Create,
                Expr::app("bidder", vec![Arg::Pos(Expr::Str("Alice".into()))])
            )]
        );
    }

    #[test]
    fn empty_program() {
        assert!(phrases("").is_empty());
        assert!(phrases("  // nothing\n").is_empty());
    }

    #[test]
    fn parallel_set() {
        let p = phrases("{ +a(). +b() }.");
        assert_eq!(
            p,
            vec![Phrase::Parallel(vec![
                Phrase::Statement(StatementKind::Create, Expr::app("a", vec![])),
                Phrase::Statement(StatementKind::Create, Expr::app("b", vec![])),
            ])]
        );
    }

    #[test]
    fn when_is_looser_than_conjunction() {
        let e = parse_expr("f(x) When a && b").unwrap();
        assert!(matches!(e, Expr::When(_, ref g) if matches!(**g, Expr::Bin(BinOp::And, _, _))));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse_expr("10 - 3 - 2").unwrap();
        assert_eq!(
            e,
            Expr::bin(
                BinOp::Sub,
                Expr::bin(BinOp::Sub, Expr::Int(10), Expr::Int(3)),
                Expr::Int(2)
            )
        );
    }

    #[test]
    fn declarations_without_full_stops_form_one_sequence() {
        let p = phrases(
            "Fact bidder Identified by String\nVar display Identified by object\n\
             Function min-price-of Identified by object * price\n",
        );
        match &p[..] {
            [Phrase::Declarations(ds)] => {
                assert_eq!(ds.len(), 3);
                assert!(ds[1].modifiers.var);
                assert_eq!(
                    ds[2].domain,
                    vec![DomainClause::IdentifiedBy(IdSpec::Fields(vec![
                        Name::new("object"),
                        Name::new("price")
                    ]))]
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn clause_lists_split_on_commas() {
        let p = phrases("Extend Fact price Derived from min-price-of.price\n ,bid.price");
        let Phrase::Declarations(ds) = &p[0] else { panic!() };
        assert_eq!(ds[0].clauses[0].exprs.len(), 2);
        assert!(ds[0].modifiers.extend);
    }

    #[test]
    fn extend_with_domain_clause_is_rejected() {
        assert!(parse_items("Extend Fact a Identified by Int.", "<t>").is_err());
    }

    #[test]
    fn ranges_and_literals() {
        let p = phrases("Fact number Identified by 1..5. Fact w Domain \"Hello\", \"World\".");
        let Phrase::Declarations(ds) = &p[0] else { panic!() };
        assert_eq!(
            ds[0].domain,
            vec![DomainClause::IdentifiedBy(IdSpec::Items(vec![DomainItem::Range(1, 5)]))]
        );
        let Phrase::Declarations(ds) = &p[1] else { panic!() };
        assert_eq!(
            ds[0].domain,
            vec![DomainClause::Domain(vec![
                DomainItem::Str("Hello".into()),
                DomainItem::Str("World".into())
            ])]
        );
    }

    #[test]
    fn error_reports_location_and_expectation() {
        let err = parse_items("+bidder(Alice", "f.eflint").unwrap_err();
        match err {
            ParseError::Syntax { file, loc, expected, .. } => {
                assert_eq!(file, "f.eflint");
                assert_eq!(loc.line, 1);
                assert!(!expected.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn queries() {
        let p = phrases("?-bid When display(bid.object). ?Not(False).");
        assert!(matches!(p[0], Phrase::InstanceQuery(Expr::When(_, _))));
        assert!(matches!(p[1], Phrase::BoolQuery(Expr::Not(_))));
    }
}
