//! The type registry built from declaration phrases.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::knowledge::{Instance, Literal};
use crate::syntax::{ClauseKind, DomainClause, DomainItem, Expr, IdSpec, Kind, Openness, TypeDecl};
use crate::Name;

pub const INT: &str = "int";
pub const STRING: &str = "string";
pub const ACTOR: &str = "actor";

/// Finite products larger than this are treated as an error rather than enumerated.
const MAX_FINITE_DOMAIN: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("Extend of undeclared type {0}")]
    ExtendUnknownType(Name),
    #[error("type {ty} declares field {field} twice")]
    DuplicateFieldName { ty: Name, field: Name },
    #[error("duty {0} needs both a Holder and a Claimant")]
    DutyMissingHolderClaimant(Name),
    #[error("unknown type {0}")]
    UnknownType(Name),
    #[error("field {field} of {ty} does not name a type")]
    UnresolvableField { ty: Name, field: Name },
    #[error("Domain clause on {0}, which is not identified by String or Int")]
    DomainOnProduct(Name),
    #[error("{ty} expects {expected} arguments, got {found}")]
    ArityMismatch { ty: Name, expected: usize, found: usize },
    #[error("domain of {0} is too large to enumerate")]
    DomainTooLarge(Name),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainSpec {
    String,
    Int,
    Finite(Vec<Literal>),
    /// Field role labels; each role's type is resolved lazily.
    Product(Vec<Name>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRecord {
    pub name: Name,
    pub kind: Kind,
    pub open: bool,
    pub var: bool,
    pub function: bool,
    pub bool_: bool,
    pub physical: bool,
    pub builtin: bool,
    pub domain: DomainSpec,
    pub clauses: Vec<(ClauseKind, Expr)>,
}

impl TypeRecord {
    fn builtin(name: &str, domain: DomainSpec) -> TypeRecord {
        TypeRecord {
            name: Name::new(name),
            kind: Kind::Fact,
            open: false,
            var: false,
            function: false,
            bool_: false,
            physical: false,
            builtin: true,
            domain,
            clauses: Vec::new(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self.domain, DomainSpec::Product(_))
    }

    pub fn arity(&self) -> usize {
        match &self.domain {
            DomainSpec::Product(roles) => roles.len(),
            _ => 1,
        }
    }

    pub fn roles(&self) -> &[Name] {
        match &self.domain {
            DomainSpec::Product(roles) => roles,
            _ => &[],
        }
    }

    pub fn role_index(&self, role: &str) -> Option<usize> {
        self.roles().iter().position(|r| r.as_str() == role)
    }

    pub fn clauses_of(&self, kind: ClauseKind) -> impl Iterator<Item = &Expr> {
        self.clauses.iter().filter(move |(k, _)| *k == kind).map(|(_, e)| e)
    }

    pub fn is_action(&self) -> bool {
        matches!(self.kind, Kind::Act | Kind::Event)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainShape {
    Finite(Vec<Instance>),
    InfinitePrimitive,
    /// An infinite product, with each field's (role, type).
    InfiniteProduct(Vec<(Name, Name)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    types: BTreeMap<Name, Arc<TypeRecord>>,
    order: Vec<Name>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

fn expand_items(items: &[DomainItem]) -> Vec<Literal> {
    let mut set = BTreeSet::new();
    for it in items {
        match it {
            DomainItem::Int(i) => {
                set.insert(Literal::Num(*i));
            }
            DomainItem::Str(s) => {
                set.insert(Literal::str(s));
            }
            DomainItem::Range(a, b) => {
                for i in *a..=*b {
                    set.insert(Literal::Num(i));
                }
            }
        }
    }
    set.into_iter().collect()
}

fn record_from_decl(d: &TypeDecl) -> Result<TypeRecord, TypeError> {
    let kind = d.kind();
    let m = &d.modifiers;
    let mut actor = None;
    let mut recipient = None;
    let mut holder = None;
    let mut claimant = None;
    let mut related: Vec<Name> = Vec::new();
    let mut domain: Option<DomainSpec> = None;
    for c in &d.domain {
        match c {
            DomainClause::IdentifiedBy(IdSpec::String) => domain = Some(DomainSpec::String),
            DomainClause::IdentifiedBy(IdSpec::Int) => domain = Some(DomainSpec::Int),
            DomainClause::IdentifiedBy(IdSpec::Items(items)) => {
                domain = Some(DomainSpec::Finite(expand_items(items)))
            }
            DomainClause::IdentifiedBy(IdSpec::Fields(fs)) => domain = Some(DomainSpec::Product(fs.clone())),
            DomainClause::Domain(items) => match domain {
                Some(DomainSpec::Product(_)) => return Err(TypeError::DomainOnProduct(d.name.clone())),
                _ => domain = Some(DomainSpec::Finite(expand_items(items))),
            },
            DomainClause::RelatedTo(fs) => related.extend(fs.iter().cloned()),
            DomainClause::Actor(n) => actor = Some(n.clone()),
            DomainClause::Recipient(n) => recipient = Some(n.clone()),
            DomainClause::Holder(n) => holder = Some(n.clone()),
            DomainClause::Claimant(n) => claimant = Some(n.clone()),
        }
    }
    let domain = match kind {
        Kind::Act => {
            let mut fs = vec![actor.unwrap_or_else(|| Name::new(ACTOR))];
            fs.extend(recipient);
            fs.extend(related);
            DomainSpec::Product(fs)
        }
        Kind::Event => DomainSpec::Product(related),
        Kind::Duty => {
            let (Some(h), Some(c)) = (holder, claimant) else {
                return Err(TypeError::DutyMissingHolderClaimant(d.name.clone()));
            };
            let mut fs = vec![h, c];
            fs.extend(related);
            DomainSpec::Product(fs)
        }
        Kind::Fact if m.bool_ => DomainSpec::Product(Vec::new()),
        Kind::Fact => match domain {
            Some(dom) if related.is_empty() => dom,
            Some(DomainSpec::Product(mut fs)) => {
                fs.extend(related);
                DomainSpec::Product(fs)
            }
            None if !related.is_empty() => DomainSpec::Product(related),
            Some(dom) => dom,
            None => DomainSpec::String,
        },
    };
    if let DomainSpec::Product(fs) = &domain {
        let mut seen = BTreeSet::new();
        for f in fs {
            if !seen.insert(f) {
                return Err(TypeError::DuplicateFieldName { ty: d.name.clone(), field: f.clone() });
            }
        }
    }
    Ok(TypeRecord {
        name: d.name.clone(),
        kind,
        open: m.openness == Some(Openness::Open),
        var: m.var,
        function: m.function,
        bool_: m.bool_,
        physical: m.physical,
        builtin: false,
        domain,
        clauses: flatten_clauses(d),
    })
}

fn flatten_clauses(d: &TypeDecl) -> Vec<(ClauseKind, Expr)> {
    d.clauses
        .iter()
        .flat_map(|c| c.exprs.iter().map(move |e| (c.kind, e.clone())))
        .collect()
}

impl Registry {
    pub fn new() -> Registry {
        let mut r = Registry { types: BTreeMap::new(), order: Vec::new() };
        for (n, d) in [(INT, DomainSpec::Int), (STRING, DomainSpec::String), (ACTOR, DomainSpec::String)] {
            r.insert(TypeRecord::builtin(n, d));
        }
        r
    }

    fn insert(&mut self, rec: TypeRecord) {
        if !self.types.contains_key(&rec.name) {
            self.order.push(rec.name.clone());
        }
        self.types.insert(rec.name.clone(), Arc::new(rec));
    }

    pub fn get(&self, name: &Name) -> Result<&TypeRecord, TypeError> {
        self.types.get(name).map(|r| &**r).ok_or_else(|| TypeError::UnknownType(name.clone()))
    }

    pub fn lookup(&self, name: &str) -> Option<&TypeRecord> {
        self.types.get(name).map(|r| &**r)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.types.contains_key(name)
    }

    /// Records in declaration order, builtins first.
    pub fn iter(&self) -> impl Iterator<Item = &TypeRecord> {
        self.order.iter().map(|n| &*self.types[n])
    }

    pub fn user_types(&self) -> impl Iterator<Item = &TypeRecord> {
        self.iter().filter(|r| !r.builtin)
    }

    /// The type a variable or role name stands for: itself if declared,
    /// else its name with trailing primes and digits removed.
    pub fn resolve_var(&self, name: &Name) -> Option<Name> {
        if self.types.contains_key(name) {
            return Some(name.clone());
        }
        let base = name.base();
        if self.types.contains_key(&base) {
            return Some(base);
        }
        let unprimed = name.unprimed();
        self.types.contains_key(&unprimed).then_some(unprimed)
    }

    pub fn field_type(&self, rec: &TypeRecord, role: &Name) -> Result<Name, TypeError> {
        self.resolve_var(role)
            .ok_or_else(|| TypeError::UnresolvableField { ty: rec.name.clone(), field: role.clone() })
    }

    pub fn field_types(&self, rec: &TypeRecord) -> Result<Vec<Name>, TypeError> {
        rec.roles().iter().map(|r| self.field_type(rec, r)).collect()
    }

    /// Install a declaration sequence: plain declarations replace prior
    /// records outright, `Extend` appends clauses.
    pub fn apply_declarations(&self, decls: &[TypeDecl]) -> Result<Registry, TypeError> {
        let mut next = self.clone();
        for d in decls {
            if d.modifiers.extend {
                let Some(existing) = next.types.get(&d.name) else {
                    return Err(TypeError::ExtendUnknownType(d.name.clone()));
                };
                let mut rec = (**existing).clone();
                rec.clauses.extend(flatten_clauses(d));
                next.insert(rec);
            } else {
                next.insert(record_from_decl(d)?);
            }
        }
        Ok(next)
    }

    pub fn domain_of(&self, name: &Name) -> Result<DomainShape, TypeError> {
        self.domain_rec(name, &mut Vec::new())
    }

    fn domain_rec(&self, name: &Name, visiting: &mut Vec<Name>) -> Result<DomainShape, TypeError> {
        let rec = self.get(name)?;
        match &rec.domain {
            DomainSpec::String | DomainSpec::Int => Ok(DomainShape::InfinitePrimitive),
            DomainSpec::Finite(lits) => {
                Ok(DomainShape::Finite(lits.iter().map(|l| Instance::atomic(name.clone(), l.clone())).collect()))
            }
            DomainSpec::Product(roles) => {
                if visiting.contains(name) {
                    return Err(TypeError::UnresolvableField { ty: name.clone(), field: name.clone() });
                }
                visiting.push(name.clone());
                let mut fields = Vec::new();
                let mut parts = Vec::new();
                let mut infinite = false;
                for role in roles {
                    let ft = self.field_type(rec, role)?;
                    match self.domain_rec(&ft, visiting)? {
                        DomainShape::Finite(items) => parts.push(items),
                        _ => infinite = true,
                    }
                    fields.push((role.clone(), ft));
                }
                visiting.pop();
                if infinite {
                    return Ok(DomainShape::InfiniteProduct(fields));
                }
                let size = parts.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
                if size.is_none_or(|s| s > MAX_FINITE_DOMAIN) {
                    return Err(TypeError::DomainTooLarge(name.clone()));
                }
                let mut out: Vec<Vec<Instance>> = vec![Vec::new()];
                for part in &parts {
                    let mut grown = Vec::with_capacity(out.len() * part.len());
                    for prefix in &out {
                        for item in part {
                            let mut v = prefix.clone();
                            v.push(item.clone());
                            grown.push(v);
                        }
                    }
                    out = grown;
                }
                Ok(DomainShape::Finite(out.into_iter().map(|fs| Instance::product(name.clone(), fs)).collect()))
            }
        }
    }

    pub fn is_finite(&self, name: &Name) -> Result<bool, TypeError> {
        Ok(matches!(self.domain_of(name)?, DomainShape::Finite(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_str, Phrase};

    fn apply(r: &Registry, src: &str) -> Result<Registry, TypeError> {
        let mut r = r.clone();
        for p in parse_str(src).unwrap() {
            if let Phrase::Declarations(ds) = p {
                r = r.apply_declarations(&ds)?;
            }
        }
        Ok(r)
    }

    #[test]
    fn redeclaration_replaces() {
        let r = apply(&Registry::new(), "Fact number Identified by 1..5.").unwrap();
        assert!(r.is_finite(&Name::new("number")).unwrap());
        let r = apply(&r, "Extend Fact number Derived from 3. Fact number Identified by Int.").unwrap();
        let rec = r.lookup("number").unwrap();
        assert_eq!(rec.domain, DomainSpec::Int);
        assert!(rec.clauses.is_empty());
    }

    #[test]
    fn extend_accumulates() {
        let r = apply(
            &Registry::new(),
            "Fact object Identified by String. Fact price Identified by Int.\
             Function min-price-of Identified by object * price.\
             Extend Fact object Derived from min-price-of.object.",
        )
        .unwrap();
        let rec = r.lookup("object").unwrap();
        assert_eq!(rec.domain, DomainSpec::String);
        assert_eq!(rec.clauses_of(ClauseKind::DerivedFrom).count(), 1);
    }

    #[test]
    fn extend_unknown_type() {
        assert_eq!(
            apply(&Registry::new(), "Extend Fact ghost Derived from 1."),
            Err(TypeError::ExtendUnknownType(Name::new("ghost")))
        );
    }

    #[test]
    fn domains() {
        let r = apply(
            &Registry::new(),
            "Fact number Identified by 1..5. Fact bidder Identified by String.\
             Fact a Identified by 1..2. Fact b Identified by 7, 8, 9.\
             Fact ab Identified by a * b. Bool flag. Fact greeting Identified by String Domain \"Hello\", \"World\".",
        )
        .unwrap();
        match r.domain_of(&Name::new("number")).unwrap() {
            DomainShape::Finite(v) => {
                let lits: Vec<_> = v.iter().map(|i| i.literal().unwrap().clone()).collect();
                assert_eq!(lits, (1..=5).map(Literal::Num).collect::<Vec<_>>());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.domain_of(&Name::new("bidder")).unwrap(), DomainShape::InfinitePrimitive);
        match r.domain_of(&Name::new("ab")).unwrap() {
            DomainShape::Finite(v) => assert_eq!(v.len(), 6),
            other => panic!("{other:?}"),
        }
        match r.domain_of(&Name::new("flag")).unwrap() {
            DomainShape::Finite(v) => assert_eq!(v, vec![Instance::product("flag", vec![])]),
            other => panic!("{other:?}"),
        }
        match r.domain_of(&Name::new("greeting")).unwrap() {
            DomainShape::Finite(v) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn act_and_duty_fields() {
        let r = apply(
            &Registry::new(),
            "Fact bidder. Fact object. Fact price Identified by Int. Fact auctioneer.\
             Act start-bidding Related to object.\
             Act place-bid Actor bidder Related to object, price.\
             Duty payment-duty Holder bidder Claimant auctioneer Related to price.",
        )
        .unwrap();
        let roles = |n: &str| r.lookup(n).unwrap().roles().iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(roles("start-bidding"), ["actor", "object"]);
        assert_eq!(roles("place-bid"), ["bidder", "object", "price"]);
        assert_eq!(roles("payment-duty"), ["bidder", "auctioneer", "price"]);
        assert!(apply(&r, "Duty d Holder bidder.").is_err());
    }

    #[test]
    fn aliases_resolve_to_base_type() {
        let r = apply(&Registry::new(), "Fact x Identified by Int. Fact y Identified by x1 * x2 * x3.").unwrap();
        let y = r.lookup("y").unwrap();
        assert_eq!(r.field_types(y).unwrap(), vec![Name::new("x"); 3]);
        assert!(apply(&r, "Fact z Identified by x * x.").is_err());
    }

    #[test]
    fn idempotent_without_extend() {
        let src = "Fact a Identified by Int. Fact b Identified by a.";
        let once = apply(&Registry::new(), src).unwrap();
        let twice = apply(&once, src).unwrap();
        assert_eq!(once, twice);
    }
}
