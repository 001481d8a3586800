use crate::Name;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phrase {
    Declarations(Vec<TypeDecl>),
    Statement(StatementKind, Expr),
    BoolQuery(Expr),
    InstanceQuery(Expr),
    Parallel(Vec<Phrase>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatementKind {
    Create,
    Terminate,
    Trigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Fact,
    Act,
    Event,
    Duty,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Fact => "Fact",
            Kind::Act => "Act",
            Kind::Event => "Event",
            Kind::Duty => "Duty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Openness {
    Open,
    Closed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Modifiers {
    pub extend: bool,
    pub openness: Option<Openness>,
    pub var: bool,
    pub function: bool,
    pub bool_: bool,
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: Name,
    /// `None` when the keyword was omitted and the kind is implied by the modifiers.
    pub kind: Option<Kind>,
    pub modifiers: Modifiers,
    pub domain: Vec<DomainClause>,
    pub clauses: Vec<Clause>,
}

impl TypeDecl {
    pub fn kind(&self) -> Kind {
        match self.kind {
            Some(k) => k,
            None if self.modifiers.physical => Kind::Act,
            None => Kind::Fact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainClause {
    IdentifiedBy(IdSpec),
    Domain(Vec<DomainItem>),
    RelatedTo(Vec<Name>),
    Actor(Name),
    Recipient(Name),
    Holder(Name),
    Claimant(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdSpec {
    String,
    Int,
    Items(Vec<DomainItem>),
    Fields(Vec<Name>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainItem {
    Int(i64),
    Str(String),
    Range(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseKind {
    HoldsWhen,
    DerivedFrom,
    ConditionedBy,
    Creates,
    Terminates,
    Obfuscates,
    ViolatedWhen,
    SyncsWith,
}

impl ClauseKind {
    pub fn keywords(self) -> &'static str {
        match self {
            ClauseKind::HoldsWhen => "Holds when",
            ClauseKind::DerivedFrom => "Derived from",
            ClauseKind::ConditionedBy => "Conditioned by",
            ClauseKind::Creates => "Creates",
            ClauseKind::Terminates => "Terminates",
            ClauseKind::Obfuscates => "Obfuscates",
            ClauseKind::ViolatedWhen => "Violated when",
            ClauseKind::SyncsWith => "Syncs with",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub exprs: Vec<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Foreach,
    Forall,
    Exists,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregate {
    Count,
    Sum,
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Holds,
    Enabled,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Pos(Expr),
    Named(Name, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Str(String),
    Bool(bool),
    /// A lowercase identifier: a bound variable, an implicitly quantified
    /// type reference, or failing both, a string atom.
    Ref(Name),
    App(Name, Vec<Arg>),
    Proj(Box<Expr>, Name),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Builtin(Builtin, Box<Expr>),
    Quant(Quantifier, Vec<Name>, Box<Expr>),
    Agg(Aggregate, Box<Expr>),
    When(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn app(ty: &str, args: Vec<Arg>) -> Expr {
        Expr::App(Name::new(ty), args)
    }

    /// Visit this expression and all sub-expressions, outermost first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) | Expr::Ref(_) => {}
            Expr::App(_, args) => {
                for a in args {
                    match a {
                        Arg::Pos(e) | Arg::Named(_, e) => e.walk(f),
                    }
                }
            }
            Expr::Proj(e, _)
            | Expr::Neg(e)
            | Expr::Not(e)
            | Expr::Builtin(_, e)
            | Expr::Quant(_, _, e)
            | Expr::Agg(_, e) => e.walk(f),
            Expr::Bin(_, l, r) | Expr::When(l, r) => {
                l.walk(f);
                r.walk(f);
            }
        }
    }
}
