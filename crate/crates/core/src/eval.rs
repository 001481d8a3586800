//! Expression evaluation over a knowledge-base snapshot.
//!
//! Variables that are neither bound by a quantifier nor by the surrounding
//! context (the fields of the instance a clause belongs to) are bound
//! implicitly at the outermost expression: by `Foreach` where instances are
//! produced, by `Exists` where a truth value is expected.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use crate::knowledge::{Elem, Instance, Interrupt, KnowledgeBase, Literal, Truth};
use crate::syntax::{Aggregate, Arg, BinOp, Builtin, ClauseKind, Expr, Quantifier};
use crate::types::{DomainShape, DomainSpec, Registry, TypeError, TypeRecord};
use crate::Name;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Interrupt(#[from] Interrupt),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("{ty} has no field {field}")]
    UnknownField { ty: Name, field: Name },
    #[error("variable {0} is not bound here")]
    Unbound(Name),
    #[error("Max or Min over an empty enumeration")]
    EmptyAggregate,
}

impl EvalError {
    pub fn interrupt(&self) -> Option<&Interrupt> {
        match self {
            EvalError::Interrupt(i) => Some(i),
            _ => None,
        }
    }
}

pub type EvalResult<T> = Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    /// Make Max/Min over nothing an error instead of an infinite sentinel.
    pub empty_aggregate_error: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Num(i64),
    Str(Arc<str>),
    Inst(Instance),
    Set(Vec<Value>),
    NegInf,
    PosInf,
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Num(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "{}", Literal::Str(s.clone())),
            Value::Inst(i) => write!(f, "{i}"),
            Value::Set(vs) => {
                f.write_str("{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Value::NegInf => f.write_str("-infinity"),
            Value::PosInf => f.write_str("infinity"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: Vec<(Name, Value)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.iter().rev().find(|(n, _)| n.as_str() == name).map(|(_, v)| v)
    }

    pub fn push(&mut self, name: Name, v: Value) {
        self.vars.push((name, v));
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.vars.truncate(n);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
enum Scalar {
    NegInf,
    Num(i64),
    PosInf,
    Str(Arc<str>),
    Bool(bool),
}

fn scalar(v: &Value) -> Option<Scalar> {
    match v {
        Value::Num(n) => Some(Scalar::Num(*n)),
        Value::Str(s) => Some(Scalar::Str(s.clone())),
        Value::Bool(b) => Some(Scalar::Bool(*b)),
        Value::NegInf => Some(Scalar::NegInf),
        Value::PosInf => Some(Scalar::PosInf),
        Value::Inst(i) => match i.literal()? {
            Literal::Num(n) => Some(Scalar::Num(*n)),
            Literal::Str(s) => Some(Scalar::Str(s.clone())),
        },
        Value::Set(_) => None,
    }
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Inst(x), Value::Inst(y)) if x.ty == y.ty => x == y,
        _ => match (scalar(a), scalar(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
    }
}

fn compare(a: &Value, b: &Value) -> EvalResult<Ordering> {
    let rank = |s: &Scalar| match s {
        Scalar::NegInf => Some((0, 0)),
        Scalar::Num(n) => Some((1, *n)),
        Scalar::PosInf => Some((2, 0)),
        _ => None,
    };
    match (scalar(a), scalar(b)) {
        (Some(Scalar::Str(x)), Some(Scalar::Str(y))) => Ok(x.cmp(&y)),
        (Some(x), Some(y)) => match (rank(&x), rank(&y)) {
            (Some(p), Some(q)) => Ok(p.cmp(&q)),
            _ => Err(EvalError::TypeMismatch(format!("cannot order {a} and {b}"))),
        },
        _ => Err(EvalError::TypeMismatch(format!("cannot order {a} and {b}"))),
    }
}

fn number(v: &Value) -> EvalResult<i64> {
    match scalar(v) {
        Some(Scalar::Num(n)) => Ok(n),
        _ => Err(EvalError::TypeMismatch(format!("{v} is not a number"))),
    }
}

fn literal_of(v: &Value) -> Option<Literal> {
    match v {
        Value::Num(n) => Some(Literal::Num(*n)),
        Value::Str(s) => Some(Literal::Str(s.clone())),
        Value::Inst(i) => i.literal().cloned(),
        _ => None,
    }
}

/// Evaluates expressions against one registry and knowledge-base snapshot.
pub struct Evaluator<'a> {
    pub reg: &'a Registry,
    pub kb: &'a KnowledgeBase,
    pub opts: EvalOptions,
    finite: RefCell<HashMap<Name, Option<Rc<Vec<Instance>>>>>,
    held: RefCell<HashMap<Name, Rc<Vec<Instance>>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(reg: &'a Registry, kb: &'a KnowledgeBase, opts: EvalOptions) -> Self {
        Evaluator { reg, kb, opts, finite: RefCell::default(), held: RefCell::default() }
    }

    fn finite_domain(&self, ty: &Name) -> EvalResult<Option<Rc<Vec<Instance>>>> {
        if let Some(d) = self.finite.borrow().get(ty) {
            return Ok(d.clone());
        }
        let d = match self.reg.domain_of(ty)? {
            DomainShape::Finite(v) => Some(Rc::new(v)),
            _ => None,
        };
        self.finite.borrow_mut().insert(ty.clone(), d.clone());
        Ok(d)
    }

    /// The instances a variable of type `ty` ranges over.
    pub fn held(&self, ty: &Name) -> EvalResult<Rc<Vec<Instance>>> {
        if let Some(d) = self.finite_domain(ty)? {
            return Ok(d);
        }
        if let Some(h) = self.held.borrow().get(ty) {
            return Ok(h.clone());
        }
        if let Some(i) = self.kb.pending.get(ty) {
            return Err(i.clone().into());
        }
        let rec = self.reg.get(ty)?;
        let list = if rec.open {
            let mut any = false;
            let mut out = Vec::new();
            for (i, b) in self.kb.additional_of(ty) {
                any = true;
                if *b {
                    out.push(i.clone());
                }
            }
            if !any {
                return Err(Interrupt::OpenEnumeration(ty.clone()).into());
            }
            out
        } else {
            self.kb.true_instances(ty)
        };
        let list = Rc::new(list);
        self.held.borrow_mut().insert(ty.clone(), list.clone());
        Ok(list)
    }

    pub fn truth(&self, inst: &Instance) -> EvalResult<Truth> {
        if let Some(b) = self.kb.additional.get(inst) {
            return Ok(Truth::from_bool(*b));
        }
        let rec = self.reg.get(&inst.ty)?;
        if let Some(a) = self.kb.asserted.get(inst) {
            return Ok(match a {
                crate::knowledge::Assertion::True => Truth::True,
                crate::knowledge::Assertion::False => Truth::False,
                crate::knowledge::Assertion::Obfuscated if rec.open => Truth::Unknown,
                crate::knowledge::Assertion::Obfuscated => Truth::False,
            });
        }
        if let Some(i) = self.kb.pending.get(&inst.ty) {
            return Err(i.clone().into());
        }
        if self.kb.derived.contains(inst) {
            return Ok(Truth::True);
        }
        Ok(if rec.open { Truth::Unknown } else { Truth::False })
    }

    pub fn holds(&self, inst: &Instance) -> EvalResult<bool> {
        match self.truth(inst)? {
            Truth::True => Ok(true),
            Truth::False => Ok(false),
            Truth::Unknown => Err(Interrupt::UnknownInstance(inst.clone()).into()),
        }
    }

    /// Bind the fields of `inst` by role name (or the instance itself for atomic types).
    pub fn bind_fields(&self, inst: &Instance, env: &mut Env) -> EvalResult<()> {
        let rec = self.reg.get(&inst.ty)?;
        if rec.is_atomic() {
            env.push(inst.ty.clone(), Value::Inst(inst.clone()));
        } else {
            for (role, arg) in rec.roles().iter().zip(inst.args.iter()) {
                if let Elem::Inst(f) = arg {
                    env.push(role.clone(), Value::Inst(f.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn enabled(&self, inst: &Instance) -> EvalResult<bool> {
        let rec = self.reg.get(&inst.ty)?;
        let unconditional = rec.physical || rec.kind == crate::syntax::Kind::Event;
        if !unconditional && !self.holds(inst)? {
            return Ok(false);
        }
        self.conditions_hold(rec, inst)
    }

    pub fn conditions_hold(&self, rec: &TypeRecord, inst: &Instance) -> EvalResult<bool> {
        let mut env = Env::new();
        self.bind_fields(inst, &mut env)?;
        for c in rec.clauses_of(ClauseKind::ConditionedBy) {
            if !self.holds_expr(c, &mut env)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index of the first satisfied violation condition of a held duty.
    pub fn violation(&self, inst: &Instance) -> EvalResult<Option<usize>> {
        let rec = self.reg.get(&inst.ty)?;
        if rec.kind != crate::syntax::Kind::Duty || !self.holds(inst)? {
            return Ok(None);
        }
        let mut env = Env::new();
        self.bind_fields(inst, &mut env)?;
        for (i, c) in rec.clauses_of(ClauseKind::ViolatedWhen).enumerate() {
            if self.holds_expr(c, &mut env)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    // ---- free variables ----

    /// Variables of `e` that name types and are bound neither in `env` nor inside `e`.
    pub fn free_vars(&self, e: &Expr, env: &Env) -> Vec<Name> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.fv(e, env, &mut bound, &mut out);
        out
    }

    fn fv_name(&self, n: &Name, env: &Env, bound: &[Name], out: &mut Vec<Name>) {
        if bound.contains(n) || env.get(n).is_some() || out.contains(n) {
            return;
        }
        if self.reg.resolve_var(n).is_some() {
            out.push(n.clone());
        }
    }

    fn fv(&self, e: &Expr, env: &Env, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
        match e {
            Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) => {}
            Expr::Ref(n) => self.fv_name(n, env, bound, out),
            Expr::App(ty, args) => {
                for a in args {
                    match a {
                        Arg::Pos(x) | Arg::Named(_, x) => self.fv(x, env, bound, out),
                    }
                }
                for role in self.missing_roles(ty, args) {
                    self.fv_name(&role, env, bound, out);
                }
            }
            Expr::Quant(_, vars, body) => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                self.fv(body, env, bound, out);
                bound.truncate(n);
            }
            // aggregates bind their own free variables
            Expr::Agg(..) => {}
            Expr::Proj(x, _) | Expr::Neg(x) | Expr::Not(x) | Expr::Builtin(_, x) => self.fv(x, env, bound, out),
            Expr::Bin(_, l, r) | Expr::When(l, r) => {
                self.fv(l, env, bound, out);
                self.fv(r, env, bound, out);
            }
        }
    }

    fn missing_roles(&self, ty: &Name, args: &[Arg]) -> Vec<Name> {
        let Some(rec) = self.reg.lookup(ty) else { return Vec::new() };
        if rec.is_atomic() {
            return if args.is_empty() { vec![ty.clone()] } else { Vec::new() };
        }
        let positional = args.iter().filter(|a| matches!(a, Arg::Pos(_))).count();
        rec.roles()
            .iter()
            .skip(positional)
            .filter(|r| !args.iter().any(|a| matches!(a, Arg::Named(n, _) if n == *r)))
            .cloned()
            .collect()
    }

    // ---- enumeration ----

    fn var_type(&self, v: &Name) -> EvalResult<Name> {
        self.reg.resolve_var(v).ok_or_else(|| TypeError::UnknownType(v.clone()).into())
    }

    fn for_each_binding(
        &self,
        vars: &[Name],
        env: &mut Env,
        f: &mut dyn FnMut(&Self, &mut Env) -> EvalResult<Flow>,
    ) -> EvalResult<Flow> {
        let mut domains = Vec::with_capacity(vars.len());
        for v in vars {
            let ty = self.var_type(v)?;
            domains.push(self.held(&ty)?);
        }
        self.bind_rec(vars, &domains, env, f)
    }

    fn bind_rec(
        &self,
        vars: &[Name],
        domains: &[Rc<Vec<Instance>>],
        env: &mut Env,
        f: &mut dyn FnMut(&Self, &mut Env) -> EvalResult<Flow>,
    ) -> EvalResult<Flow> {
        let Some((v, rest)) = vars.split_first() else {
            return f(self, env);
        };
        let n = env.len();
        for inst in domains[0].iter() {
            env.push(v.clone(), Value::Inst(inst.clone()));
            let flow = self.bind_rec(rest, &domains[1..], env, f);
            env.truncate(n);
            if flow? == Flow::Stop {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }

    /// Evaluate in a context that produces values: free variables are bound by `Foreach`.
    pub fn collect(&self, e: &Expr, env: &mut Env) -> EvalResult<Vec<Value>> {
        let free = self.free_vars(e, env);
        let mut out = Vec::new();
        self.for_each_binding(&free, env, &mut |ev, env| {
            match ev.eval(e, env)? {
                None => {}
                Some(Value::Set(vs)) => out.extend(vs),
                Some(v) => out.push(v),
            }
            Ok(Flow::Continue)
        })?;
        Ok(out)
    }

    /// Evaluate in a context that expects a truth value: free variables are bound by `Exists`.
    pub fn holds_expr(&self, e: &Expr, env: &mut Env) -> EvalResult<bool> {
        let free = self.free_vars(e, env);
        if free.is_empty() {
            let v = self.eval(e, env)?;
            return self.truthy(v.as_ref());
        }
        let mut found = false;
        self.for_each_binding(&free, env, &mut |ev, env| {
            let v = ev.eval(e, env)?;
            if ev.truthy(v.as_ref())? {
                found = true;
                Ok(Flow::Stop)
            } else {
                Ok(Flow::Continue)
            }
        })?;
        Ok(found)
    }

    /// Instances produced by `e`, coerced to `ty`.
    pub fn instances_of(&self, e: &Expr, env: &mut Env, ty: &Name) -> EvalResult<Vec<Instance>> {
        self.collect(e, env)?.iter().map(|v| self.coerce(v, ty)).collect()
    }

    /// Instances produced by `e`, which must already be instances.
    pub fn instances(&self, e: &Expr, env: &mut Env) -> EvalResult<Vec<Instance>> {
        self.collect(e, env)?
            .into_iter()
            .map(|v| match v {
                Value::Inst(i) => Ok(i),
                other => Err(EvalError::TypeMismatch(format!("{other} is not an instance"))),
            })
            .collect()
    }

    fn truthy(&self, v: Option<&Value>) -> EvalResult<bool> {
        match v {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(Value::Inst(i)) => self.holds(i),
            Some(Value::Set(vs)) => Ok(!vs.is_empty()),
            Some(_) => Ok(true),
        }
    }

    fn bool_of(&self, e: &Expr, env: &mut Env) -> EvalResult<bool> {
        let v = self.eval(e, env)?;
        self.truthy(v.as_ref())
    }

    // ---- coercion ----

    /// Convert a value into an instance of `ty`.
    pub fn coerce(&self, v: &Value, ty: &Name) -> EvalResult<Instance> {
        let rec = self.reg.get(ty)?;
        if let Value::Inst(i) = v {
            if &i.ty == ty {
                return Ok(i.clone());
            }
        }
        let mismatch = || EvalError::TypeMismatch(format!("{v} cannot be used as {ty}"));
        match &rec.domain {
            DomainSpec::String | DomainSpec::Int | DomainSpec::Finite(_) => {
                let lit = literal_of(v).ok_or_else(mismatch)?;
                let ok = match (&rec.domain, &lit) {
                    (DomainSpec::String, Literal::Str(_)) | (DomainSpec::Int, Literal::Num(_)) => true,
                    (DomainSpec::Finite(items), l) => items.binary_search(l).is_ok(),
                    _ => false,
                };
                if !ok {
                    return Err(mismatch());
                }
                Ok(Instance::atomic(ty.clone(), lit))
            }
            DomainSpec::Product(roles) => {
                if let Value::Inst(src) = v {
                    if let Ok(srec) = self.reg.get(&src.ty) {
                        if !srec.is_atomic() && !roles.is_empty() {
                            let mapped: Option<Vec<usize>> = roles.iter().map(|r| srec.role_index(r.as_str())).collect();
                            if let Some(idx) = mapped {
                                let mut fields = Vec::with_capacity(roles.len());
                                for (r, i) in roles.iter().zip(idx) {
                                    let f = src.field(i).ok_or_else(mismatch)?;
                                    let fty = self.reg.field_type(rec, r)?;
                                    fields.push(self.coerce(&Value::Inst(f.clone()), &fty)?);
                                }
                                return Ok(Instance::product(ty.clone(), fields));
                            }
                        }
                    }
                }
                if roles.len() == 1 {
                    let fty = self.reg.field_type(rec, &roles[0])?;
                    let f = self.coerce(v, &fty)?;
                    return Ok(Instance::product(ty.clone(), vec![f]));
                }
                Err(mismatch())
            }
        }
    }

    fn construct(&self, ty: &Name, args: &[Arg], env: &mut Env) -> EvalResult<Option<Instance>> {
        let rec = self.reg.get(ty)?;
        if rec.is_atomic() {
            let v = match args {
                [] => self.lookup_var(ty, env)?,
                [Arg::Pos(e)] => self.eval(e, env)?,
                [Arg::Named(r, e)] if r == ty => self.eval(e, env)?,
                [Arg::Named(r, _)] => {
                    return Err(EvalError::UnknownField { ty: ty.clone(), field: r.clone() });
                }
                _ => {
                    return Err(TypeError::ArityMismatch { ty: ty.clone(), expected: 1, found: args.len() }.into());
                }
            };
            return match v {
                None => Ok(None),
                Some(v) => Ok(Some(self.coerce(&v, ty)?)),
            };
        }
        let roles = rec.roles();
        let positional: Vec<&Expr> = args.iter().filter_map(|a| if let Arg::Pos(e) = a { Some(e) } else { None }).collect();
        if positional.len() > roles.len() {
            return Err(TypeError::ArityMismatch { ty: ty.clone(), expected: roles.len(), found: positional.len() }.into());
        }
        for a in args {
            if let Arg::Named(r, _) = a {
                if rec.role_index(r.as_str()).is_none() {
                    return Err(EvalError::UnknownField { ty: ty.clone(), field: r.clone() });
                }
            }
        }
        let mut fields = Vec::with_capacity(roles.len());
        for (i, role) in roles.iter().enumerate() {
            let v = if let Some(e) = positional.get(i) {
                self.eval(e, env)?
            } else if let Some(Arg::Named(_, e)) = args.iter().find(|a| matches!(a, Arg::Named(n, _) if n == role)) {
                self.eval(e, env)?
            } else {
                self.lookup_var(role, env)?
            };
            let Some(v) = v else { return Ok(None) };
            let fty = self.reg.field_type(rec, role)?;
            fields.push(self.coerce(&v, &fty)?);
        }
        Ok(Some(Instance::product(ty.clone(), fields)))
    }

    fn lookup_var(&self, n: &Name, env: &Env) -> EvalResult<Option<Value>> {
        match env.get(n) {
            Some(v) => Ok(Some(v.clone())),
            None => Err(EvalError::Unbound(n.clone())),
        }
    }

    fn project(&self, inst: &Instance, field: &Name) -> EvalResult<Instance> {
        let rec = self.reg.get(&inst.ty)?;
        let idx = rec.role_index(field.as_str()).or_else(|| {
            let types = self.reg.field_types(rec).ok()?;
            let hits: Vec<usize> = types.iter().enumerate().filter(|(_, t)| *t == field).map(|(i, _)| i).collect();
            (hits.len() == 1).then(|| hits[0])
        });
        match idx.and_then(|i| inst.field(i)) {
            Some(f) => Ok(f.clone()),
            None if rec.is_atomic() && &inst.ty == field => Ok(inst.clone()),
            None => Err(EvalError::UnknownField { ty: inst.ty.clone(), field: field.clone() }),
        }
    }

    // ---- evaluation ----

    /// Evaluate `e`; `None` means the value was filtered out by a `When` guard.
    pub fn eval(&self, e: &Expr, env: &mut Env) -> EvalResult<Option<Value>> {
        Ok(Some(match e {
            Expr::Int(i) => Value::Num(*i),
            Expr::Str(s) => Value::Str(Arc::from(s.as_str())),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Ref(n) => match env.get(n) {
                Some(v) => v.clone(),
                None if self.reg.resolve_var(n).is_some() => return Err(EvalError::Unbound(n.clone())),
                None => Value::Str(Arc::from(n.as_str())),
            },
            Expr::App(ty, args) => match self.construct(ty, args, env)? {
                Some(i) => Value::Inst(i),
                None => return Ok(None),
            },
            Expr::Proj(inner, field) => match self.eval(inner, env)? {
                None => return Ok(None),
                Some(Value::Inst(i)) => Value::Inst(self.project(&i, field)?),
                Some(other) => return Err(EvalError::TypeMismatch(format!("cannot project {field} from {other}"))),
            },
            Expr::Bin(BinOp::And, l, r) => Value::Bool(self.bool_of(l, env)? && self.bool_of(r, env)?),
            Expr::Bin(BinOp::Or, l, r) => Value::Bool(self.bool_of(l, env)? || self.bool_of(r, env)?),
            Expr::Bin(op, l, r) => {
                let (Some(a), Some(b)) = (self.eval(l, env)?, self.eval(r, env)?) else {
                    return Ok(None);
                };
                match op {
                    BinOp::Eq => Value::Bool(values_equal(&a, &b)),
                    BinOp::Ne => Value::Bool(!values_equal(&a, &b)),
                    BinOp::Lt => Value::Bool(compare(&a, &b)? == Ordering::Less),
                    BinOp::Le => Value::Bool(compare(&a, &b)? != Ordering::Greater),
                    BinOp::Gt => Value::Bool(compare(&a, &b)? == Ordering::Greater),
                    BinOp::Ge => Value::Bool(compare(&a, &b)? != Ordering::Less),
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        let (x, y) = (number(&a)?, number(&b)?);
                        let r = match op {
                            BinOp::Add => x.checked_add(y),
                            BinOp::Sub => x.checked_sub(y),
                            BinOp::Mul => x.checked_mul(y),
                            _ if y == 0 => return Err(EvalError::DivisionByZero),
                            _ => x.checked_div(y),
                        };
                        Value::Num(r.ok_or(EvalError::Overflow)?)
                    }
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            Expr::Neg(inner) => match self.eval(inner, env)? {
                None => return Ok(None),
                Some(v) => Value::Num(number(&v)?.checked_neg().ok_or(EvalError::Overflow)?),
            },
            Expr::Not(inner) => Value::Bool(!self.bool_of(inner, env)?),
            Expr::Builtin(b, inner) => {
                let v = self.eval(inner, env)?;
                match (b, v) {
                    (_, None) => Value::Bool(false),
                    (Builtin::Holds, Some(v)) => Value::Bool(self.truthy(Some(&v))?),
                    (Builtin::Enabled, Some(Value::Inst(i))) => Value::Bool(self.enabled(&i)?),
                    (Builtin::Violated, Some(Value::Inst(i))) => Value::Bool(self.violation(&i)?.is_some()),
                    (_, Some(other)) => return Err(EvalError::TypeMismatch(format!("{other} is not an instance"))),
                }
            }
            Expr::Quant(Quantifier::Foreach, vars, body) => {
                let mut out = Vec::new();
                self.for_each_binding(vars, env, &mut |ev, env| {
                    match ev.eval(body, env)? {
                        None => {}
                        Some(Value::Set(vs)) => out.extend(vs),
                        Some(v) => out.push(v),
                    }
                    Ok(Flow::Continue)
                })?;
                Value::Set(out)
            }
            Expr::Quant(Quantifier::Exists, vars, body) => {
                let mut found = false;
                self.for_each_binding(vars, env, &mut |ev, env| {
                    if ev.bool_of(body, env)? {
                        found = true;
                        Ok(Flow::Stop)
                    } else {
                        Ok(Flow::Continue)
                    }
                })?;
                Value::Bool(found)
            }
            Expr::Quant(Quantifier::Forall, vars, body) => {
                let mut all = true;
                self.for_each_binding(vars, env, &mut |ev, env| {
                    let ok = match ev.eval(body, env)? {
                        None => true,
                        Some(v) => ev.truthy(Some(&v))?,
                    };
                    if ok {
                        Ok(Flow::Continue)
                    } else {
                        all = false;
                        Ok(Flow::Stop)
                    }
                })?;
                Value::Bool(all)
            }
            Expr::Agg(a, inner) => {
                let items = self.collect(inner, env)?;
                match a {
                    Aggregate::Count => Value::Num(items.len() as i64),
                    Aggregate::Sum => {
                        let mut s: i64 = 0;
                        for v in &items {
                            s = s.checked_add(number(v)?).ok_or(EvalError::Overflow)?;
                        }
                        Value::Num(s)
                    }
                    Aggregate::Max | Aggregate::Min => {
                        let mut best: Option<i64> = None;
                        for v in &items {
                            let n = number(v)?;
                            best = Some(match (best, a) {
                                (None, _) => n,
                                (Some(b), Aggregate::Max) => b.max(n),
                                (Some(b), _) => b.min(n),
                            });
                        }
                        match (best, a) {
                            (Some(n), _) => Value::Num(n),
                            (None, _) if self.opts.empty_aggregate_error => return Err(EvalError::EmptyAggregate),
                            (None, Aggregate::Max) => Value::NegInf,
                            (None, _) => Value::PosInf,
                        }
                    }
                }
            }
            Expr::When(inner, guard) => {
                if !self.bool_of(guard, env)? {
                    return Ok(None);
                }
                return self.eval(inner, env);
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::Assertion;
    use crate::syntax::{parse_expr, parse_str, Phrase};

    fn setup(src: &str) -> Registry {
        let mut r = Registry::new();
        for p in parse_str(src).unwrap() {
            if let Phrase::Declarations(ds) = p {
                r = r.apply_declarations(&ds).unwrap();
            }
        }
        r
    }

    fn num(ty: &str, n: i64) -> Instance {
        Instance::atomic(ty, Literal::Num(n))
    }

    fn eval_in(reg: &Registry, kb: &KnowledgeBase, src: &str) -> EvalResult<Vec<Value>> {
        let ev = Evaluator::new(reg, kb, EvalOptions::default());
        ev.collect(&parse_expr(src).unwrap(), &mut Env::new())
    }

    fn numbers_kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        for n in [1, 3, 5] {
            kb.asserted.insert(num("number", n), Assertion::True);
        }
        kb
    }

    #[test]
    fn counting_finite_and_infinite_domains() {
        let kb = numbers_kb();
        let finite = setup("Fact number Identified by 1..5.");
        let infinite = setup("Fact number Identified by Int.");
        let all = "Count(Foreach number: number)";
        let held = "Count(Foreach number: number When Holds(number))";
        assert_eq!(eval_in(&finite, &kb, all).unwrap(), vec![Value::Num(5)]);
        assert_eq!(eval_in(&infinite, &kb, all).unwrap(), vec![Value::Num(3)]);
        assert_eq!(eval_in(&finite, &kb, held).unwrap(), vec![Value::Num(3)]);
        assert_eq!(eval_in(&infinite, &kb, held).unwrap(), vec![Value::Num(3)]);
    }

    #[test]
    fn empty_enumerations() {
        let reg = setup("Fact number Identified by Int.");
        let kb = KnowledgeBase::new();
        let one = |s: &str| eval_in(&reg, &kb, s).unwrap().remove(0);
        assert_eq!(one("(Forall number: False)"), Value::Bool(true));
        assert_eq!(one("(Exists number: True)"), Value::Bool(false));
        assert_eq!(one("Count(Foreach number: number)"), Value::Num(0));
        assert_eq!(one("Sum(Foreach number: number)"), Value::Num(0));
        assert_eq!(one("Max(Foreach number: number)"), Value::NegInf);
        assert_eq!(one("Min(Foreach number: number)"), Value::PosInf);
        assert_eq!(one("5 > Max(Foreach number: number)"), Value::Bool(true));
        let strict = Evaluator::new(&reg, &kb, EvalOptions { empty_aggregate_error: true });
        let e = parse_expr("Max(Foreach number: number)").unwrap();
        assert_eq!(strict.eval(&e, &mut Env::new()), Err(EvalError::EmptyAggregate));
    }

    #[test]
    fn arithmetic() {
        let reg = Registry::new();
        let kb = KnowledgeBase::new();
        let one = |s: &str| eval_in(&reg, &kb, s).map(|mut v| v.remove(0));
        assert_eq!(one("7 / 2").unwrap(), Value::Num(3));
        assert_eq!(one("-7 / 2").unwrap(), Value::Num(-3));
        assert_eq!(one("10 - 3 - 2").unwrap(), Value::Num(5));
        assert_eq!(one("1 / 0"), Err(EvalError::DivisionByZero));
        assert_eq!(one("9223372036854775807 + 1"), Err(EvalError::Overflow));
    }

    #[test]
    fn implicit_arguments_and_projection() {
        let reg = setup(
            "Fact bidder. Fact object. Fact price Identified by Int.\
             Fact bid Identified by bidder * object * price * int.",
        );
        let kb = KnowledgeBase::new();
        let ev = Evaluator::new(&reg, &kb, EvalOptions::default());
        let mut env = Env::new();
        env.push(Name::new("bidder"), Value::Inst(Instance::atomic("bidder", Literal::str("Alice"))));
        env.push(Name::new("object"), Value::Inst(Instance::atomic("object", Literal::str("Watch"))));
        env.push(Name::new("price"), Value::Inst(num("price", 100)));
        let e = parse_expr("bid(int = 2)").unwrap();
        let v = ev.eval(&e, &mut env).unwrap().unwrap();
        assert_eq!(v.to_string(), "bid(Alice, Watch, 100, 2)");
        let p = parse_expr("bid(int = 2).price").unwrap();
        assert_eq!(ev.eval(&p, &mut env).unwrap().unwrap(), Value::Inst(num("price", 100)));
    }

    #[test]
    fn free_variables_enumerate_held_instances() {
        let reg = setup("Fact person. Fact rich Identified by person.");
        let mut kb = KnowledgeBase::new();
        for p in ["Alice", "Bob"] {
            kb.asserted.insert(Instance::atomic("person", Literal::str(p)), Assertion::True);
        }
        let vs = eval_in(&reg, &kb, "rich(person)").unwrap();
        let shown: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        assert_eq!(shown, ["rich(Alice)", "rich(Bob)"]);
    }

    #[test]
    fn open_types_interrupt() {
        let reg = setup("Open Fact user Identified by String.");
        let mut kb = KnowledgeBase::new();
        let ev = Evaluator::new(&reg, &kb, EvalOptions::default());
        let eve = Instance::atomic("user", Literal::str("Eve"));
        assert_eq!(ev.holds(&eve), Err(Interrupt::UnknownInstance(eve.clone()).into()));
        let e = parse_expr("Count(Foreach user: user)").unwrap();
        assert_eq!(ev.eval(&e, &mut Env::new()), Err(Interrupt::OpenEnumeration(Name::new("user")).into()));
        kb.additional.insert(eve.clone(), true);
        let ev = Evaluator::new(&reg, &kb, EvalOptions::default());
        assert_eq!(ev.eval(&e, &mut Env::new()).unwrap(), Some(Value::Num(1)));
    }

    #[test]
    fn de_morgan_on_closed_finite_type() {
        let reg = setup("Fact n Identified by 1..4. Fact even Identified by n.");
        for mask in 0..16u32 {
            let mut kb = KnowledgeBase::new();
            for i in 1..=4 {
                if mask & (1 << (i - 1)) != 0 {
                    kb.asserted.insert(num("n", i), Assertion::True);
                }
            }
            let a = eval_in(&reg, &kb, "Not(Exists n: n && n > 2)").unwrap();
            let b = eval_in(&reg, &kb, "(Forall n: Not(n && n > 2))").unwrap();
            assert_eq!(a, b, "mask {mask}");
        }
    }

    #[test]
    fn equality_across_types_compares_values() {
        let reg = setup("Fact user. Fact bidder.");
        let kb = KnowledgeBase::new();
        let one = |s: &str| eval_in(&reg, &kb, s).unwrap().remove(0);
        assert_eq!(one("user(Admin) == bidder(\"Admin\")"), Value::Bool(true));
        assert_eq!(one("user(Admin) != user(Bob)"), Value::Bool(true));
        assert_eq!(one("\"b\" > \"a\""), Value::Bool(true));
    }
}
