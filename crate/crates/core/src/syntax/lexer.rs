//! Tokenizer for `.eflint` source text.
//!
//! A `.` is a projection when it sits directly between a non-space character
//! and the start of a lowercase identifier (`bid.price`); otherwise it
//! terminates a fragment. `..` is the integer-range operator.

use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Fact,
    Act,
    Event,
    Duty,
    Var,
    Function,
    Bool,
    Physical,
    Open,
    Closed,
    Extend,
    Domain,
    Identified,
    By,
    Related,
    To,
    Actor,
    Recipient,
    Holder,
    Claimant,
    Holds,
    LowerWhen,
    Derived,
    From,
    Conditioned,
    Creates,
    Terminates,
    Obfuscates,
    Violated,
    Syncs,
    With,
    When,
    Where,
    Foreach,
    Forall,
    Exists,
    Count,
    Sum,
    Max,
    Min,
    Not,
    Enabled,
    True,
    False,
    Int,
    String,
}

impl Keyword {
    pub fn from_word(word: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match word {
            "Fact" => Fact,
            "Act" => Act,
            "Event" => Event,
            "Duty" => Duty,
            "Var" => Var,
            "Function" => Function,
            "Bool" => Bool,
            "Physical" => Physical,
            "Open" => Open,
            "Closed" => Closed,
            "Extend" => Extend,
            "Domain" => Domain,
            "Identified" => Identified,
            "by" => By,
            "Related" => Related,
            "to" => To,
            "Actor" => Actor,
            "Recipient" => Recipient,
            "Holder" => Holder,
            "Claimant" => Claimant,
            "Holds" => Holds,
            "when" => LowerWhen,
            "Derived" => Derived,
            "from" => From,
            "Conditioned" => Conditioned,
            "Creates" => Creates,
            "Terminates" => Terminates,
            "Obfuscates" => Obfuscates,
            "Violated" => Violated,
            "Syncs" => Syncs,
            "with" => With,
            "When" => When,
            "Where" => Where,
            "Foreach" => Foreach,
            "Forall" => Forall,
            "Exists" => Exists,
            "Count" => Count,
            "Sum" => Sum,
            "Max" => Max,
            "Min" => Min,
            "Not" => Not,
            "Enabled" => Enabled,
            "True" => True,
            "False" => False,
            "Int" => Int,
            "String" => String,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            Fact => "Fact",
            Act => "Act",
            Event => "Event",
            Duty => "Duty",
            Var => "Var",
            Function => "Function",
            Bool => "Bool",
            Physical => "Physical",
            Open => "Open",
            Closed => "Closed",
            Extend => "Extend",
            Domain => "Domain",
            Identified => "Identified",
            By => "by",
            Related => "Related",
            To => "to",
            Actor => "Actor",
            Recipient => "Recipient",
            Holder => "Holder",
            Claimant => "Claimant",
            Holds => "Holds",
            LowerWhen => "when",
            Derived => "Derived",
            From => "from",
            Conditioned => "Conditioned",
            Creates => "Creates",
            Terminates => "Terminates",
            Obfuscates => "Obfuscates",
            Violated => "Violated",
            Syncs => "Syncs",
            With => "with",
            When => "When",
            Where => "Where",
            Foreach => "Foreach",
            Forall => "Forall",
            Exists => "Exists",
            Count => "Count",
            Sum => "Sum",
            Max => "Max",
            Min => "Min",
            Not => "Not",
            Enabled => "Enabled",
            True => "True",
            False => "False",
            Int => "Int",
            String => "String",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Kw(Keyword),
    Ident(String),
    Bracketed(String),
    Str(String),
    Int(i64),
    Directive(String),
    /// Projection dot.
    Dot,
    /// Fragment terminator.
    Stop,
    DotDot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Assign,
    Question,
    QuestionMinus,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Kw(k) => write!(f, "`{}`", k.as_str()),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Bracketed(s) => write!(f, "identifier `[{s}]`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Directive(d) => write!(f, "`#{d}`"),
            Tok::Dot => f.write_str("`.` (projection)"),
            Tok::Stop => f.write_str("full stop"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Question => f.write_str("`?`"),
            Tok::QuestionMinus => f.write_str("`?-`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Location,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let loc = Location { line, column: col };
        let err = |msg: String| ParseError::Syntax {
            file: file.to_string(),
            loc,
            expected: Vec::new(),
            found: msg,
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = if is_ident_start(c) {
            let start = i;
            bump!();
            loop {
                if i >= chars.len() {
                    break;
                }
                let ch = chars[i];
                if is_ident_char(ch) || (ch == '-' && chars.get(i + 1).is_some_and(|n| is_ident_start(*n))) {
                    bump!();
                } else {
                    break;
                }
            }
            while i < chars.len() && chars[i] == '\'' {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: match Keyword::from_word(&word) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(word),
                },
                loc,
            });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits
                .parse::<i64>()
                .map_err(|_| err(format!("integer literal {digits} out of range")))?;
            out.push(Token { tok: Tok::Int(value), loc });
            continue;
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err("unterminated string literal".into())),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        match chars.get(i) {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => s.push(*other),
                            None => return Err(err("unterminated string literal".into())),
                        }
                        bump!();
                    }
                    Some(ch) => {
                        s.push(*ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), loc });
            continue;
        } else if c == '[' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != ']' && chars[i] != '\n' {
                bump!();
            }
            if chars.get(i) != Some(&']') {
                return Err(err("unterminated bracketed identifier".into()));
            }
            let name: String = chars[start..i].iter().collect();
            bump!();
            out.push(Token {
                tok: Tok::Bracketed(name.trim().to_string()),
                loc,
            });
            continue;
        } else if c == '#' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            if word != "include" && word != "require" {
                return Err(err(format!("unknown directive #{word}")));
            }
            out.push(Token { tok: Tok::Directive(word), loc });
            continue;
        } else {
            match (c, next) {
                ('.', Some('.')) => {
                    bump!();
                    Tok::DotDot
                }
                ('.', n) => {
                    let prev_tight = i > 0 && !chars[i - 1].is_whitespace();
                    let next_ident = n.is_some_and(|n| (is_ident_start(n) && !n.is_uppercase()) || n == '[');
                    if prev_tight && next_ident {
                        Tok::Dot
                    } else {
                        Tok::Stop
                    }
                }
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                ('{', _) => Tok::LBrace,
                ('}', _) => Tok::RBrace,
                (',', _) => Tok::Comma,
                (':', _) => Tok::Colon,
                ('?', Some('-')) => {
                    bump!();
                    Tok::QuestionMinus
                }
                ('?', _) => Tok::Question,
                ('+', _) => Tok::Plus,
                ('-', _) => Tok::Minus,
                ('*', _) => Tok::Star,
                ('/', _) => Tok::Slash,
                ('=', Some('=')) => {
                    bump!();
                    Tok::EqEq
                }
                ('=', _) => Tok::Assign,
                ('!', Some('=')) => {
                    bump!();
                    Tok::NotEq
                }
                ('<', Some('=')) => {
                    bump!();
                    Tok::Le
                }
                ('<', _) => Tok::Lt,
                ('>', Some('=')) => {
                    bump!();
                    Tok::Ge
                }
                ('>', _) => Tok::Gt,
                ('&', Some('&')) => {
                    bump!();
                    Tok::AndAnd
                }
                ('|', Some('|')) => {
                    bump!();
                    Tok::OrOr
                }
                _ => return Err(err(format!("unexpected character {c:?}"))),
            }
        };
        bump!();
        out.push(Token { tok, loc });
    }
    out.push(Token {
        tok: Tok::Eof,
        loc: Location { line, column: col },
    });
    Ok(out)
}
