//! ASP text emission in the clingo dialect.
//!
//! Instances are uninterpreted function terms (`bid(bidder("Amy"),object("Vase"),price(200),int(0))`),
//! and every state-dependent fact is an `in((tag,instance),S)` atom.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::derivation::{derivation_rules, RuleKind as DerivationKind};
use crate::eval::{Env, EvalOptions, Evaluator, Value};
use crate::knowledge::{Elem, Instance, KnowledgeBase, Literal};
use crate::syntax::{Aggregate, Arg, BinOp, Builtin, ClauseKind, Expr, Kind, Quantifier};
use crate::types::{DomainShape, DomainSpec, Registry, TypeError, TypeRecord};
use crate::Name;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AspError {
    #[error("rule enumerates open type {0} with an infinite domain")]
    OpenInfiniteEnumeration(Name),
    #[error("cannot translate {0}")]
    UnsupportedExpression(String),
    #[error("search criterion is empty")]
    EmptyCriterion,
    #[error("search depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Type(#[from] TypeError),
}

type Res<T> = Result<T, AspError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AspRuleKind {
    Fact,
    Rule,
    Choice,
    Integrity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspRule {
    pub head: String,
    pub body: Vec<String>,
    pub kind: AspRuleKind,
}

impl AspRule {
    pub fn rule(head: impl Into<String>, body: Vec<String>) -> AspRule {
        let kind = if body.is_empty() { AspRuleKind::Fact } else { AspRuleKind::Rule };
        AspRule { head: head.into(), body, kind }
    }

    pub fn integrity(body: Vec<String>) -> AspRule {
        AspRule { head: String::new(), body, kind: AspRuleKind::Integrity }
    }
}

impl fmt::Display for AspRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AspRuleKind::Fact => write!(f, "{}.", self.head),
            AspRuleKind::Integrity => write!(f, ":- {}.", self.body.join(" ; ")),
            AspRuleKind::Rule | AspRuleKind::Choice => write!(f, "{} :- {}.", self.head, self.body.join(" ; ")),
        }
    }
}

/// Injective renaming of type names to clingo constants.
#[derive(Debug, Clone, Default)]
pub struct Mangler {
    map: BTreeMap<Name, String>,
}

impl Mangler {
    pub fn new(reg: &Registry) -> Mangler {
        let mut map = BTreeMap::new();
        let mut used = BTreeSet::new();
        let mut names: Vec<&Name> = reg.iter().map(|r| &r.name).collect();
        names.sort();
        for n in names {
            let mut base: String = n
                .chars()
                .map(|c| match c {
                    '-' | ' ' => '_'.to_string(),
                    '\'' => "_p".to_string(),
                    c if c.is_ascii_alphanumeric() || c == '_' => c.to_ascii_lowercase().to_string(),
                    c => format!("_u{:x}", c as u32),
                })
                .collect();
            if !base.starts_with(|c: char| c.is_ascii_lowercase()) {
                base.insert_str(0, "t_");
            }
            let mut cand = base.clone();
            let mut k = 2;
            while !used.insert(cand.clone()) {
                cand = format!("{base}_{k}");
                k += 1;
            }
            map.insert(n.clone(), cand);
        }
        Mangler { map }
    }

    pub fn get(&self, n: &str) -> String {
        self.map.get(n).cloned().unwrap_or_else(|| n.replace('-', "_"))
    }

    /// `(mangled, original)` for every name that changed.
    pub fn table(&self) -> Vec<(String, Name)> {
        let mut out: Vec<(String, Name)> =
            self.map.iter().filter(|(k, v)| k.as_str() != v.as_str()).map(|(k, v)| (v.clone(), k.clone())).collect();
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Var(String),
    Num(i64),
    Str(String),
    App(String, Vec<Term>),
    /// Arithmetic or aggregate text.
    Raw(String, bool),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Num(n) => write!(f, "{n}"),
            Term::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Term::App(n, args) if args.is_empty() => write!(f, "{n}"),
            Term::App(n, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{n}({})", parts.join(","))
            }
            Term::Raw(s, _) => write!(f, "{s}"),
        }
    }
}

impl Term {
    fn operand(&self) -> String {
        match self {
            Term::Raw(s, true) => format!("({s})"),
            Term::Num(n) if *n < 0 => format!("({n})"),
            other => other.to_string(),
        }
    }

    fn vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars(out)),
            _ => {}
        }
    }
}

/// Render a ground instance as a term.
pub fn instance_term(m: &Mangler, inst: &Instance) -> String {
    fn go(m: &Mangler, inst: &Instance) -> Term {
        let args = inst
            .args
            .iter()
            .map(|a| match a {
                Elem::Lit(Literal::Num(n)) => Term::Num(*n),
                Elem::Lit(Literal::Str(s)) => Term::Str(s.to_string()),
                Elem::Inst(i) => go(m, i),
            })
            .collect();
        Term::App(m.get(&inst.ty), args)
    }
    go(m, inst).to_string()
}

enum Tv {
    Inst(Term, Name),
    Val(Term),
}

fn holds(t: &Term) -> String {
    format!("in((holds,{t}),S)")
}

fn enum_lit(t: &Term) -> String {
    format!("in((enum,{t}),S)")
}

struct Tx<'a> {
    reg: &'a Registry,
    m: &'a Mangler,
    next_var: usize,
    scope: Vec<(Name, Term, Name)>,
    aux: Vec<AspRule>,
    aux_count: &'a mut usize,
}

impl<'a> Tx<'a> {
    fn fresh(&mut self) -> String {
        let i = self.next_var;
        self.next_var += 1;
        if i < 26 {
            ((b'A' + i as u8) as char).to_string()
        } else {
            format!("V{i}")
        }
    }

    fn rec(&self, ty: &Name) -> Res<&'a TypeRecord> {
        Ok(self.reg.get(ty)?)
    }

    fn pattern(&mut self, ty: &Name) -> Res<Term> {
        let rec = self.rec(ty)?;
        let name = self.m.get(ty);
        if rec.is_atomic() {
            let v = self.fresh();
            return Ok(Term::App(name, vec![Term::Var(v)]));
        }
        let mut args = Vec::new();
        for ft in self.reg.field_types(rec)? {
            args.push(self.pattern(&ft)?);
        }
        Ok(Term::App(name, args))
    }

    fn lookup(&self, n: &str) -> Option<(Term, Name)> {
        self.scope.iter().rev().find(|(k, _, _)| k.as_str() == n).map(|(_, t, ty)| (t.clone(), ty.clone()))
    }

    /// Bind `var` to a fresh pattern of its type; returns the enumeration literal.
    fn bind(&mut self, var: &Name) -> Res<String> {
        let ty = self.reg.resolve_var(var).ok_or_else(|| AspError::UnsupportedExpression(format!("variable {var}")))?;
        let rec = self.rec(&ty)?;
        if rec.open && !self.reg.is_finite(&ty)? {
            return Err(AspError::OpenInfiniteEnumeration(ty));
        }
        let p = self.pattern(&ty)?;
        let lit = enum_lit(&p);
        self.scope.push((var.clone(), p, ty));
        Ok(lit)
    }

    fn bind_term(&mut self, var: Name, t: Term, ty: Name) {
        self.scope.push((var, t, ty));
    }

    fn free_vars(&self, e: &Expr) -> Vec<Name> {
        let kb = KnowledgeBase::new();
        let ev = Evaluator::new(self.reg, &kb, EvalOptions::default());
        let mut env = Env::new();
        for (n, _, _) in &self.scope {
            env.push(n.clone(), Value::Bool(true));
        }
        ev.free_vars(e, &env)
    }

    fn scope_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (_, t, _) in &self.scope {
            t.vars(&mut out);
        }
        out
    }

    fn scope_enums(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (_, t, _) in &self.scope {
            let l = enum_lit(t);
            if seen.insert(l.clone()) {
                out.push(l);
            }
        }
        out
    }

    /// Introduce an auxiliary predicate holding exactly when `lits` do.
    fn aux(&mut self, lits: Vec<String>) -> String {
        *self.aux_count += 1;
        let mut args = self.scope_vars();
        args.push("S".into());
        let head = format!("aux_{}({})", self.aux_count, args.join(","));
        let mut body = vec!["state(S)".to_string()];
        body.extend(lits);
        body.extend(self.scope_enums());
        self.aux.push(AspRule::rule(head.clone(), body));
        head
    }

    fn value(&self, tv: Tv) -> Res<Term> {
        match tv {
            Tv::Val(t) => Ok(t),
            Tv::Inst(t, ty) => {
                let rec = self.rec(&ty)?;
                match (&t, rec.is_atomic()) {
                    (Term::App(_, args), true) if args.len() == 1 => Ok(args[0].clone()),
                    _ => Ok(t),
                }
            }
        }
    }

    fn coerce(&self, tv: Tv, target: &Name) -> Res<Term> {
        let trec = self.rec(target)?;
        match tv {
            Tv::Inst(t, ty) if &ty == target => Ok(t),
            Tv::Inst(t, ty) => {
                let srec = self.rec(&ty)?;
                if trec.is_atomic() && srec.is_atomic() {
                    let v = self.value(Tv::Inst(t, ty))?;
                    return Ok(Term::App(self.m.get(target), vec![v]));
                }
                if !trec.is_atomic() && !srec.is_atomic() {
                    if let Term::App(_, sargs) = &t {
                        let mut args = Vec::new();
                        for role in trec.roles() {
                            let i = srec.role_index(role).ok_or_else(|| {
                                AspError::UnsupportedExpression(format!("{ty} has no field {role} for {target}"))
                            })?;
                            args.push(sargs[i].clone());
                        }
                        return Ok(Term::App(self.m.get(target), args));
                    }
                }
                if !trec.is_atomic() && trec.arity() == 1 {
                    let ft = self.reg.field_type(trec, &trec.roles()[0])?;
                    let inner = self.coerce(Tv::Inst(t, ty), &ft)?;
                    return Ok(Term::App(self.m.get(target), vec![inner]));
                }
                Err(AspError::UnsupportedExpression(format!("{ty} used as {target}")))
            }
            Tv::Val(v) => {
                if trec.is_atomic() {
                    Ok(Term::App(self.m.get(target), vec![v]))
                } else if trec.arity() == 1 {
                    let ft = self.reg.field_type(trec, &trec.roles()[0])?;
                    let inner = self.coerce(Tv::Val(v), &ft)?;
                    Ok(Term::App(self.m.get(target), vec![inner]))
                } else {
                    Err(AspError::UnsupportedExpression(format!("value used as {target}")))
                }
            }
        }
    }

    /// Translate an expression producing a value or instance.
    /// `trailing` collects enumeration literals of variables bound by `Foreach`.
    fn term(&mut self, e: &Expr, lits: &mut Vec<String>, trailing: &mut Vec<String>) -> Res<Tv> {
        match e {
            Expr::Int(n) => Ok(Tv::Val(Term::Num(*n))),
            Expr::Str(s) => Ok(Tv::Val(Term::Str(s.clone()))),
            Expr::Bool(_) => Err(AspError::UnsupportedExpression("Boolean literal as a value".into())),
            Expr::Ref(n) => match self.lookup(n) {
                Some((t, ty)) => Ok(Tv::Inst(t, ty)),
                None if self.reg.resolve_var(n).is_some() => {
                    trailing.push(self.bind(n)?);
                    let (t, ty) = self.lookup(n).expect("bound");
                    Ok(Tv::Inst(t, ty))
                }
                None => Ok(Tv::Val(Term::Str(n.to_string()))),
            },
            Expr::App(ty, args) => {
                let rec = self.rec(ty)?;
                let roles: Vec<Name> = if rec.is_atomic() { vec![ty.clone()] } else { rec.roles().to_vec() };
                let mut out = Vec::new();
                let mut pos = args.iter().filter_map(|a| match a {
                    Arg::Pos(x) => Some(x),
                    _ => None,
                });
                for role in &roles {
                    let fty = if rec.is_atomic() { ty.clone() } else { self.reg.field_type(rec, role)? };
                    let named = args.iter().find_map(|a| match a {
                        Arg::Named(n, x) if n == role => Some(x),
                        _ => None,
                    });
                    let arg = match named.or_else(|| pos.next()) {
                        Some(x) => self.term(x, lits, trailing)?,
                        None => self.term(&Expr::Ref(role.clone()), lits, trailing)?,
                    };
                    if rec.is_atomic() {
                        let v = self.value(arg)?;
                        return Ok(Tv::Inst(Term::App(self.m.get(ty), vec![v]), ty.clone()));
                    }
                    out.push(self.coerce(arg, &fty)?);
                }
                Ok(Tv::Inst(Term::App(self.m.get(ty), out), ty.clone()))
            }
            Expr::Proj(inner, field) => {
                let tv = self.term(inner, lits, trailing)?;
                let Tv::Inst(Term::App(_, args), ty) = tv else {
                    return Err(AspError::UnsupportedExpression(format!("projection .{field}")));
                };
                let rec = self.rec(&ty)?;
                let i = match rec.role_index(field) {
                    Some(i) => i,
                    None => {
                        let fts = self.reg.field_types(rec)?;
                        let hits: Vec<usize> = (0..fts.len()).filter(|j| fts[*j].as_str() == field.as_str()).collect();
                        match hits[..] {
                            [j] => j,
                            _ => return Err(AspError::UnsupportedExpression(format!("{ty}.{field}"))),
                        }
                    }
                };
                let fty = self.reg.field_type(rec, &rec.roles()[i])?;
                Ok(Tv::Inst(args[i].clone(), fty))
            }
            Expr::Bin(op, l, r) if is_arith(*op) => {
                let l = self.term(l, lits, trailing)?;
                let l = self.value(l)?;
                let r = self.term(r, lits, trailing)?;
                let r = self.value(r)?;
                Ok(Tv::Val(Term::Raw(format!("{}{}{}", l.operand(), op.symbol(), r.operand()), true)))
            }
            Expr::Neg(x) => {
                let v = self.term(x, lits, trailing)?;
                let v = self.value(v)?;
                Ok(Tv::Val(Term::Raw(format!("-{}", v.operand()), true)))
            }
            Expr::When(a, c) => {
                let mut cl = self.cond(c)?;
                let tv = self.term(a, lits, trailing)?;
                lits.append(&mut cl);
                Ok(tv)
            }
            Expr::Quant(Quantifier::Foreach, vars, body) => {
                for v in vars {
                    trailing.push(self.bind(v)?);
                }
                self.term(body, lits, trailing)
            }
            Expr::Agg(a, inner) => {
                let (elem, body) = self.aggregate_element(*a, inner)?;
                let v = self.fresh();
                let f = match a {
                    Aggregate::Count => "#count",
                    Aggregate::Sum => "#sum",
                    Aggregate::Max | Aggregate::Min => unreachable!("rejected in aggregate_element"),
                };
                lits.push(format!("{v} = {f}{{ {elem} : {body} }}"));
                Ok(Tv::Val(Term::Var(v)))
            }
            other => Err(AspError::UnsupportedExpression(crate::syntax::print_expr(other))),
        }
    }

    /// `(element, condition)` of an aggregate, with its own variables scoped inside.
    fn aggregate_element(&mut self, a: Aggregate, inner: &Expr) -> Res<(String, String)> {
        if matches!(a, Aggregate::Max | Aggregate::Min) {
            return Err(AspError::UnsupportedExpression(format!("{a:?} (empty enumerations yield an infinite sentinel)")));
        }
        let mark = self.scope.len();
        let mut enums = Vec::new();
        for v in self.free_vars(inner) {
            enums.push(self.bind(&v)?);
        }
        let mut lits = Vec::new();
        let mut trailing = Vec::new();
        let tv = self.term(inner, &mut lits, &mut trailing)?;
        let value = self.value(tv)?;
        let mut tuple = vec![value.to_string()];
        for (_, t, _) in &self.scope[mark..] {
            let s = t.to_string();
            if !tuple.contains(&s) {
                tuple.push(s);
            }
        }
        if a == Aggregate::Count {
            tuple.remove(0);
            if tuple.is_empty() {
                tuple.push(value.to_string());
            }
        }
        self.scope.truncate(mark);
        let mut body = vec!["#true".to_string()];
        body.extend(lits);
        body.extend(enums);
        body.extend(trailing);
        Ok((tuple.join(","), body.join(" ,")))
    }

    /// A `0 < #count{...}` test for `Exists vars: body`, inside-out.
    fn exists_count(&mut self, vars: &[Name], body: &Expr, negate_body: bool) -> Res<String> {
        let mark = self.scope.len();
        let mut enums = Vec::new();
        for v in vars {
            enums.push(self.bind(v)?);
        }
        let mut lits = if negate_body { self.negated(body)? } else { self.cond(body)? };
        let tuple: Vec<String> = self.scope[mark..].iter().map(|(_, t, _)| t.to_string()).collect();
        self.scope.truncate(mark);
        let mut parts = vec!["#true".to_string()];
        parts.append(&mut lits);
        parts.extend(enums);
        Ok(format!("0 < #count{{ {} : {} }}", tuple.join(","), parts.join(" ,")))
    }

    fn negated(&mut self, e: &Expr) -> Res<Vec<String>> {
        match e {
            Expr::When(a, c) => {
                let mut out = self.cond(c)?;
                out.extend(self.negated(a)?);
                Ok(out)
            }
            Expr::Not(x) => self.cond(x),
            Expr::Quant(Quantifier::Exists, vars, body) => Ok(vec![format!("not {}", self.exists_count(vars, body, false)?)]),
            _ => {
                let lits = self.cond(e)?;
                match &lits[..] {
                    [one] if one.starts_with("not ") => Ok(vec![one[4..].to_string()]),
                    [one] if !one.contains('#') && !one.contains(" = ") => Ok(vec![format!("not {one}")]),
                    _ => {
                        let a = self.aux(lits);
                        Ok(vec![format!("not {a}")])
                    }
                }
            }
        }
    }

    fn cmp(&mut self, op: BinOp, l: &Expr, r: &Expr) -> Res<Vec<String>> {
        let mut lits = Vec::new();
        let mut trailing = Vec::new();
        let lt = self.term(l, &mut lits, &mut trailing)?;
        let rt = self.term(r, &mut lits, &mut trailing)?;
        let same_type = matches!((&lt, &rt), (Tv::Inst(_, a), Tv::Inst(_, b)) if a == b);
        let (ls, rs) = if same_type && matches!(op, BinOp::Eq | BinOp::Ne) {
            let (Tv::Inst(a, _), Tv::Inst(b, _)) = (lt, rt) else { unreachable!() };
            (a.to_string(), b.to_string())
        } else {
            (self.value(lt)?.to_string(), self.value(rt)?.to_string())
        };
        lits.push(match op {
            BinOp::Eq => format!("{ls} = {rs}"),
            BinOp::Ne => format!("not {ls} = {rs}"),
            other => format!("{ls} {} {rs}", other.symbol()),
        });
        lits.extend(trailing);
        Ok(lits)
    }

    /// Translate a Boolean expression to body literals.
    fn cond(&mut self, e: &Expr) -> Res<Vec<String>> {
        match e {
            Expr::Bool(true) | Expr::Int(_) | Expr::Str(_) => Ok(vec!["#true".into()]),
            Expr::Bool(false) => Ok(vec!["#false".into()]),
            Expr::Bin(BinOp::And, l, r) => {
                let mut out = self.cond(l)?;
                out.extend(self.cond(r)?);
                Ok(out)
            }
            Expr::Bin(BinOp::Or, l, r) => {
                let ll = self.cond(l)?;
                let rl = self.cond(r)?;
                let a = self.aux(ll);
                *self.aux_count -= 1;
                let mut body = vec!["state(S)".to_string()];
                body.extend(rl);
                body.extend(self.scope_enums());
                self.aux.push(AspRule::rule(a.clone(), body));
                *self.aux_count += 1;
                Ok(vec![a])
            }
            Expr::Bin(op, l, r) if !is_arith(*op) => self.cmp(*op, l, r),
            Expr::Not(x) => self.negated(x),
            Expr::Quant(Quantifier::Forall, vars, body) => Ok(vec![format!("not {}", self.exists_count(vars, body, true)?)]),
            Expr::Quant(_, vars, body) => {
                let mut enums = Vec::new();
                for v in vars {
                    enums.push(self.bind(v)?);
                }
                let mut out = self.cond(body)?;
                out.extend(enums);
                Ok(out)
            }
            Expr::When(a, c) => {
                let mut out = self.cond(c)?;
                out.extend(self.cond(a)?);
                Ok(out)
            }
            Expr::Builtin(b, x) => {
                let mut lits = Vec::new();
                let mut trailing = Vec::new();
                let tv = self.term(x, &mut lits, &mut trailing)?;
                let Tv::Inst(t, _) = tv else {
                    return Err(AspError::UnsupportedExpression(format!("{b:?} of a value")));
                };
                lits.push(match b {
                    Builtin::Holds => holds(&t),
                    Builtin::Enabled => format!("in((enabled,{t}),S)"),
                    Builtin::Violated => format!("violated({t},S)"),
                });
                lits.extend(trailing);
                Ok(lits)
            }
            Expr::Ref(_) | Expr::App(..) | Expr::Proj(..) => {
                let mut lits = Vec::new();
                let mut trailing = Vec::new();
                match self.term(e, &mut lits, &mut trailing)? {
                    Tv::Inst(t, _) => lits.push(holds(&t)),
                    Tv::Val(_) => return Err(AspError::UnsupportedExpression(crate::syntax::print_expr(e))),
                }
                lits.extend(trailing);
                Ok(lits)
            }
            other => Err(AspError::UnsupportedExpression(crate::syntax::print_expr(other))),
        }
    }
}

fn is_arith(op: BinOp) -> bool {
    matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
}

struct Emitter<'a> {
    reg: &'a Registry,
    m: &'a Mangler,
    aux_count: usize,
    out: Vec<String>,
}

impl<'a> Emitter<'a> {
    fn tx(&mut self) -> Tx<'_> {
        Tx { reg: self.reg, m: self.m, next_var: 0, scope: Vec::new(), aux: Vec::new(), aux_count: &mut self.aux_count }
    }

    fn push(&mut self, r: AspRule, aux: Vec<AspRule>) {
        for a in aux {
            self.out.push(a.to_string());
        }
        self.out.push(r.to_string());
    }

    /// Bind the fields of `ty` to a fresh pattern; returns it with the field enumerations.
    fn bind_fields(tx: &mut Tx<'_>, rec: &TypeRecord) -> Res<(Term, Vec<String>)> {
        let p = tx.pattern(&rec.name)?;
        let mut enums = Vec::new();
        if rec.is_atomic() {
            tx.bind_term(rec.name.clone(), p.clone(), rec.name.clone());
            return Ok((p, enums));
        }
        let Term::App(_, args) = &p else { unreachable!() };
        for (role, arg) in rec.roles().iter().zip(args) {
            let fty = tx.reg.field_type(rec, role)?;
            enums.push(enum_lit(arg));
            tx.bind_term(role.clone(), arg.clone(), fty);
        }
        Ok((p, enums))
    }

    fn derivation(&mut self, head: &Name, kind: DerivationKind, e: &Expr) -> Res<()> {
        let rec = self.reg.get(head)?;
        let mut tx = self.tx();
        let (head_term, body) = match kind {
            DerivationKind::DerivedFrom => {
                let mut trailing = Vec::new();
                for v in tx.free_vars(e) {
                    trailing.push(tx.bind(&v)?);
                }
                let mut lits = Vec::new();
                let tv = tx.term(e, &mut lits, &mut trailing)?;
                let t = tx.coerce(tv, head)?;
                lits.extend(trailing);
                (t, lits)
            }
            DerivationKind::HoldsWhen => {
                let (p, enums) = Self::bind_fields(&mut tx, rec)?;
                let mut inline = Vec::new();
                for v in tx.free_vars(e) {
                    inline.push(tx.bind(&v)?);
                }
                let mut lits = tx.cond(e)?;
                lits.extend(inline);
                lits.extend(enums);
                if rec.is_atomic() {
                    lits.push(enum_lit(&p));
                }
                (p, lits)
            }
        };
        let aux = std::mem::take(&mut tx.aux);
        let mut b = vec!["state(S)".to_string()];
        b.extend(body);
        self.push(AspRule::rule(format!("in((derived,{head_term}),S)"), b), aux);
        Ok(())
    }

    fn enumeration(&mut self, rec: &TypeRecord) -> Res<()> {
        let shape = self.reg.domain_of(&rec.name)?;
        let mut tx = self.tx();
        let p = tx.pattern(&rec.name)?;
        let head = enum_lit(&p);
        let rule = match (&shape, &rec.domain) {
            (DomainShape::Finite(_), DomainSpec::Finite(lits)) => {
                let nums: Vec<i64> = lits.iter().filter_map(|l| if let Literal::Num(n) = l { Some(*n) } else { None }).collect();
                let contiguous = nums.len() == lits.len()
                    && !nums.is_empty()
                    && nums.windows(2).all(|w| w[1] == w[0] + 1);
                let Term::App(_, args) = &p else { unreachable!() };
                if contiguous {
                    vec![AspRule::rule(head, vec!["state(S)".into(), format!("{} = {}..{}", args[0], nums[0], nums[nums.len() - 1])])]
                } else {
                    lits.iter()
                        .map(|l| {
                            let inst = Instance::atomic(rec.name.clone(), l.clone());
                            AspRule::rule(format!("in((enum,{}),S)", instance_term(self.m, &inst)), vec!["state(S)".into()])
                        })
                        .collect()
                }
            }
            (DomainShape::Finite(_), _) => {
                let Term::App(_, args) = &p else { unreachable!() };
                let mut body = vec!["state(S)".to_string()];
                body.extend(args.iter().map(enum_lit));
                vec![AspRule::rule(head, body)]
            }
            _ => vec![AspRule::rule(head, vec!["state(S)".into(), holds(&p)])],
        };
        for r in rule {
            self.out.push(r.to_string());
        }
        Ok(())
    }

    fn conditions(&mut self, rec: &TypeRecord) -> Res<()> {
        let unconditional = rec.physical || rec.kind == Kind::Event;
        for c in rec.clauses_of(ClauseKind::ConditionedBy) {
            let mut tx = self.tx();
            let (p, enums) = Self::bind_fields(&mut tx, rec)?;
            let lits = tx.cond(c)?;
            let a = tx.aux(lits);
            let aux = std::mem::take(&mut tx.aux);
            let mut body = if unconditional { enums } else { vec![format!("in((derived,{p}),S)")] };
            if body.is_empty() {
                body.push("state(S)".into());
            }
            body.push(format!("not {a}"));
            self.push(AspRule::rule(format!("in((suppressed,{p}),S)"), body), aux);
        }
        if rec.is_action() {
            let mut tx = self.tx();
            let (p, enums) = Self::bind_fields(&mut tx, rec)?;
            let body = if unconditional {
                let mut b = vec!["state(S)".to_string()];
                b.extend(enums);
                b.push(format!("not in((suppressed,{p}),S)"));
                b
            } else {
                vec![holds(&p)]
            };
            self.out.push(AspRule::rule(format!("in((enabled,{p}),S)"), body).to_string());
        }
        Ok(())
    }

    fn effects(&mut self, rec: &TypeRecord) -> Res<()> {
        for (kind, e) in &rec.clauses {
            let (pred, gate) = match kind {
                ClauseKind::SyncsWith => ("trigger", "trigger"),
                ClauseKind::Creates => ("create_effect", "trigger"),
                ClauseKind::Terminates => ("terminate_effect", "trigger"),
                ClauseKind::Obfuscates => ("obfuscate_effect", "trigger"),
                ClauseKind::ViolatedWhen => ("violated", "holds"),
                _ => continue,
            };
            let mut tx = self.tx();
            let (p, _) = Self::bind_fields(&mut tx, rec)?;
            let mut body = vec![format!("in(({gate},{p}),S)")];
            let head = if *kind == ClauseKind::ViolatedWhen {
                let mut inline = Vec::new();
                for v in tx.free_vars(e) {
                    inline.push(tx.bind(&v)?);
                }
                body.extend(tx.cond(e)?);
                body.extend(inline);
                format!("violated({p},S)")
            } else {
                let mut trailing = Vec::new();
                for v in tx.free_vars(e) {
                    trailing.push(tx.bind(&v)?);
                }
                let mut lits = Vec::new();
                let tv = tx.term(e, &mut lits, &mut trailing)?;
                let t = match tv {
                    Tv::Inst(t, _) => t,
                    Tv::Val(_) => return Err(AspError::UnsupportedExpression(crate::syntax::print_expr(e))),
                };
                body.extend(lits);
                body.extend(trailing);
                if pred == "trigger" {
                    format!("in((trigger,{t}),S)")
                } else {
                    format!("{pred}({t},S)")
                }
            };
            let aux = std::mem::take(&mut tx.aux);
            self.push(AspRule::rule(head, body), aux);
        }
        Ok(())
    }
}

const FRAME: &[&str] = &[
    "in((holds,I),S) :- in((derived,I),S) ; not in((suppressed,I),S) ; not in((terminated,I),S).",
    "in((holds,I),S) :- in((create,I),S).",
];

const EXTRAPOLATED: &[&str] = &[
    "in((create,I),S+1) :- create_effect(I,S) ; state(S+1).",
    "in((terminated,I),S+1) :- terminate_effect(I,S) ; state(S+1) ; not create_effect(I,S).",
    "in((terminated,I),S+1) :- obfuscate_effect(I,S) ; state(S+1) ; not create_effect(I,S) ; not terminate_effect(I,S).",
    "in((create,I),S+1) :- in((create,I),S) ; state(S+1) ; not terminate_effect(I,S) ; not obfuscate_effect(I,S).",
    "in((terminated,I),S+1) :- in((terminated,I),S) ; state(S+1) ; not in((create,I),S+1).",
    "disabled(I,S) :- in((trigger,I),S) ; not in((enabled,I),S).",
    "violation(I,S) :- disabled(I,S).",
    "violation(I,S) :- violated(I,S).",
];

fn header(m: &Mangler) -> Vec<String> {
    let mut out = vec!["% clingo encoding".to_string()];
    for (mangled, orig) in m.table() {
        out.push(format!("% name {mangled} = {orig}"));
    }
    out
}

/// Translate every type of `reg` plus the generic frame rules.
pub fn emit_specification(reg: &Registry) -> Res<String> {
    let m = Mangler::new(reg);
    let mut em = Emitter { reg, m: &m, aux_count: 0, out: header(&m) };
    let rules = derivation_rules(reg);
    let any_user = reg.user_types().next().is_some();
    for rec in reg.iter() {
        if rec.builtin && !any_user {
            continue;
        }
        let mine: Vec<_> = rules.iter().filter(|r| r.head == rec.name).collect();
        let interesting = !mine.is_empty() || !rec.builtin;
        if !interesting && !any_user {
            continue;
        }
        em.out.push(format!("% {}", rec.name));
        for r in mine {
            em.derivation(&r.head, r.kind, &r.expr)?;
        }
        em.enumeration(rec)?;
        em.conditions(rec)?;
        em.effects(rec)?;
    }
    em.out.push("% frame".into());
    em.out.extend(FRAME.iter().map(|s| s.to_string()));
    em.out.push("% extrapolated: effects, inertia and violations".into());
    em.out.extend(EXTRAPOLATED.iter().map(|s| s.to_string()));
    let mut text = em.out.join("\n");
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootItem {
    Create(Instance),
    Trigger(Instance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpec {
    /// Act or event types whose enabled instances may be chosen.
    pub breadth: Vec<Name>,
    pub depth: usize,
    pub root: Vec<RootItem>,
    /// Rules defining `counterexample`, in clingo syntax.
    pub criterion: Vec<String>,
}

fn var_name(role: &str) -> String {
    let mut s: String = role.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    if let Some(first) = s.get(0..1) {
        let up = first.to_ascii_uppercase();
        s.replace_range(0..1, &up);
    }
    if !s.starts_with(|c: char| c.is_ascii_uppercase()) {
        s.insert(0, 'V');
    }
    s
}

/// Breadth, depth, root and criterion sections for scenario search.
pub fn emit_search(reg: &Registry, spec: &SearchSpec) -> Res<String> {
    if spec.depth == 0 {
        return Err(AspError::ZeroDepth);
    }
    if spec.criterion.iter().all(|c| c.trim().is_empty()) {
        return Err(AspError::EmptyCriterion);
    }
    let m = Mangler::new(reg);
    let mut out = vec!["% breadth".to_string()];
    if !spec.breadth.is_empty() {
        let mut elems = Vec::new();
        for ty in &spec.breadth {
            let rec = reg.get(ty)?;
            let mut seen = BTreeSet::new();
            let args: Vec<String> = rec
                .roles()
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut v = if i == 0 && rec.kind == Kind::Act { "Actor".to_string() } else { var_name(r) };
                    while !seen.insert(v.clone()) {
                        v.push('_');
                    }
                    v
                })
                .collect();
            let pat = if args.is_empty() { m.get(ty) } else { format!("{}({})", m.get(ty), args.join(",")) };
            elems.push(format!("choose(I,S) : in((enabled,I), S), I = {pat}"));
        }
        out.push(format!("1 = {{ {} }} :- state(S); state(S + 1).", elems.join(" ; ")));
        out.push("in((trigger,I), S) :- choose(I,S).".into());
    }
    out.push("% depth".into());
    out.push(format!("{{ state(S) }} :- S = 1..{}.", spec.depth));
    out.push("state(S) :- 1 <= S ; state(S + 1).".into());
    out.push("% root".into());
    for item in &spec.root {
        out.push(match item {
            RootItem::Create(i) => format!("in((create,{}),1).", instance_term(&m, i)),
            RootItem::Trigger(i) => format!("in((trigger,{}),1).", instance_term(&m, i)),
        });
    }
    out.push("% criterion".into());
    out.push(":- counterexample.".into());
    for c in &spec.criterion {
        let c = c.trim();
        if !c.is_empty() {
            out.push(c.to_string());
        }
    }
    let mut text = out.join("\n");
    text.push('\n');
    Ok(text)
}
