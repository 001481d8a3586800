//! Statements, triggers, queries and the state history.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::derivation::{close, CloseOptions, DeriveError};
use crate::eval::{Env, EvalError, Evaluator, Value};
use crate::knowledge::{apply_effects, Instance, KnowledgeBase, Truth};
use crate::syntax::{print_phrase, ClauseKind, Expr, Kind, Phrase, StatementKind, TypeDecl};
use crate::types::{Registry, TypeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub close: CloseOptions,
    /// Asserting a `Function` instance retracts other values for the same key.
    pub function_displacement: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { close: CloseOptions::default(), function_displacement: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DisabledAction(Instance),
    /// A held duty and the index of its first satisfied `Violated when` clause.
    Duty(Instance, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DisabledAction(i) => write!(f, "VIOLATION disabled-action {i}"),
            Violation::Duty(i, _) => write!(f, "VIOLATION duty {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("{0} is not an act or event")]
    NotAnAction(Instance),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unknown state {0}")]
    UnknownState(usize),
}

impl TransitionError {
    pub fn interrupt(&self) -> Option<&crate::knowledge::Interrupt> {
        match self {
            TransitionError::Eval(e) | TransitionError::Derive(DeriveError::Eval(e)) => e.interrupt(),
            TransitionError::Derive(DeriveError::Oracle(crate::oracle::OracleError::Eval(e))) => e.interrupt(),
            _ => None,
        }
    }
}

/// Pending writes of one step, before they are applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Effects {
    pub triggered: BTreeSet<Instance>,
    pub created: BTreeSet<Instance>,
    pub terminated: BTreeSet<Instance>,
    pub obfuscated: BTreeSet<Instance>,
    pub disabled: BTreeSet<Instance>,
}

impl Effects {
    fn merge(&mut self, o: Effects) {
        self.triggered.extend(o.triggered);
        self.created.extend(o.created);
        self.terminated.extend(o.terminated);
        self.obfuscated.extend(o.obfuscated);
        self.disabled.extend(o.disabled);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionOutcome {
    pub triggered: BTreeSet<Instance>,
    pub created: BTreeSet<Instance>,
    pub terminated: BTreeSet<Instance>,
    pub obfuscated: BTreeSet<Instance>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Bool(bool),
    Values(Vec<Value>),
}

impl fmt::Display for QueryResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryResult::Bool(true) => write!(f, "True"),
            QueryResult::Bool(false) => write!(f, "False"),
            QueryResult::Values(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join("\n"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhraseResult {
    Declared,
    Transition(TransitionOutcome),
    Query(QueryResult),
    Parallel(Vec<PhraseResult>),
}

/// A closed knowledge base together with the types it is read against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: usize,
    pub registry: Arc<Registry>,
    pub kb: KnowledgeBase,
    pub parent: Option<(usize, Phrase)>,
}

impl State {
    pub fn initial() -> State {
        State { id: 0, registry: Arc::new(Registry::new()), kb: KnowledgeBase::new(), parent: None }
    }

    pub fn evaluator(&self, cfg: &Config) -> Evaluator<'_> {
        Evaluator::new(&self.registry, &self.kb, cfg.close.eval)
    }

    /// Violated duties in this state.
    pub fn duty_violations(&self, cfg: &Config) -> Result<Vec<Violation>, EvalError> {
        let ev = self.evaluator(cfg);
        let mut out = Vec::new();
        for rec in self.registry.iter().filter(|r| r.kind == Kind::Duty) {
            for inst in ev.held(&rec.name)?.iter() {
                if let Some(i) = ev.violation(inst)? {
                    out.push(Violation::Duty(inst.clone(), i));
                }
            }
        }
        Ok(out)
    }
}

/// Ground instances of a statement expression, in the given state.
fn statement_instances(ev: &Evaluator<'_>, e: &Expr) -> Result<Vec<Instance>, EvalError> {
    let mut out = ev.instances(e, &mut Env::new())?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// The instances reached from `roots` through `Syncs with`, evaluated in the pre-state.
pub fn sync_closure(ev: &Evaluator<'_>, roots: &[Instance]) -> Result<BTreeSet<Instance>, TransitionError> {
    let mut seen = BTreeSet::new();
    let mut todo: Vec<Instance> = roots.to_vec();
    while let Some(inst) = todo.pop() {
        let rec = ev.reg.get(&inst.ty)?;
        if !matches!(rec.kind, Kind::Act | Kind::Event) {
            return Err(TransitionError::NotAnAction(inst));
        }
        if !seen.insert(inst.clone()) {
            continue;
        }
        for e in rec.clauses_of(ClauseKind::SyncsWith) {
            let mut env = Env::new();
            ev.bind_fields(&inst, &mut env)?;
            for t in ev.instances(e, &mut env)? {
                if !seen.contains(&t) {
                    todo.push(t);
                }
            }
        }
    }
    Ok(seen)
}

/// Effects of triggering `roots` together: sync closure, enabledness and all
/// post-condition expressions, all read from the pre-state.
pub fn trigger_effects(ev: &Evaluator<'_>, roots: &[Instance]) -> Result<Effects, TransitionError> {
    let members = sync_closure(ev, roots)?;
    let mut fx = Effects::default();
    for m in &members {
        if !ev.enabled(m)? {
            fx.disabled.insert(m.clone());
        }
        let rec = ev.reg.get(&m.ty)?;
        let mut env = Env::new();
        ev.bind_fields(m, &mut env)?;
        for (kind, e) in &rec.clauses {
            let target = match kind {
                ClauseKind::Creates => &mut fx.created,
                ClauseKind::Terminates => &mut fx.terminated,
                ClauseKind::Obfuscates => &mut fx.obfuscated,
                _ => continue,
            };
            target.extend(ev.instances(e, &mut env)?);
        }
    }
    fx.triggered = members;
    Ok(fx)
}

/// Effects of one statement against `state`, without applying them.
pub fn statement_effects(state: &State, kind: StatementKind, e: &Expr, cfg: &Config) -> Result<Effects, TransitionError> {
    let ev = state.evaluator(cfg);
    let insts = statement_instances(&ev, e)?;
    Ok(match kind {
        StatementKind::Create => Effects { created: insts.into_iter().collect(), ..Effects::default() },
        StatementKind::Terminate => Effects { terminated: insts.into_iter().collect(), ..Effects::default() },
        StatementKind::Trigger => trigger_effects(&ev, &insts)?,
    })
}

/// Apply effects, close, and report violations.
pub fn commit(state: &State, fx: Effects, phrase: Phrase, id: usize, cfg: &Config) -> Result<(State, TransitionOutcome), TransitionError> {
    let mut kb = state.kb.clone();
    apply_effects(&mut kb, &state.registry, &fx.created, &fx.terminated, &fx.obfuscated, cfg.function_displacement)?;
    let (kb, _) = close(&kb, &state.registry, &cfg.close)?;
    let next = State { id, registry: state.registry.clone(), kb, parent: Some((state.id, phrase)) };
    let mut violations: Vec<Violation> = fx.disabled.iter().cloned().map(Violation::DisabledAction).collect();
    violations.extend(next.duty_violations(cfg)?);
    let outcome = TransitionOutcome {
        triggered: fx.triggered,
        created: fx.created,
        terminated: fx.terminated,
        obfuscated: fx.obfuscated,
        violations,
    };
    Ok((next, outcome))
}

pub fn exec_statement(
    state: &State,
    kind: StatementKind,
    e: &Expr,
    id: usize,
    cfg: &Config,
) -> Result<(State, TransitionOutcome), TransitionError> {
    let fx = statement_effects(state, kind, e, cfg)?;
    commit(state, fx, Phrase::Statement(kind, e.clone()), id, cfg)
}

/// Trigger a single act or event instance.
pub fn trigger_transition(state: &State, inst: &Instance, id: usize, cfg: &Config) -> Result<(State, TransitionOutcome), TransitionError> {
    let fx = trigger_effects(&state.evaluator(cfg), std::slice::from_ref(inst))?;
    commit(state, fx, Phrase::Statement(StatementKind::Trigger, instance_expr(inst)), id, cfg)
}

/// An expression that denotes exactly `inst`.
pub fn instance_expr(inst: &Instance) -> Expr {
    use crate::knowledge::{Elem, Literal};
    use crate::syntax::Arg;
    let args = inst
        .args
        .iter()
        .map(|a| {
            Arg::Pos(match a {
                Elem::Lit(Literal::Num(n)) => Expr::Int(*n),
                Elem::Lit(Literal::Str(s)) => Expr::Str(s.to_string()),
                Elem::Inst(i) => instance_expr(i),
            })
        })
        .collect();
    Expr::App(inst.ty.clone(), args)
}

pub fn query_bool(state: &State, e: &Expr, cfg: &Config) -> Result<bool, EvalError> {
    state.evaluator(cfg).holds_expr(e, &mut Env::new())
}

/// Values of an instance query: instances that hold, and plain values, deduplicated and sorted.
pub fn query_instances(state: &State, e: &Expr, cfg: &Config) -> Result<Vec<Value>, EvalError> {
    let ev = state.evaluator(cfg);
    let mut insts = BTreeSet::new();
    let mut others = Vec::new();
    for v in ev.collect(e, &mut Env::new())? {
        match v {
            Value::Inst(i) => {
                if ev.truth(&i)? == Truth::True {
                    insts.insert(i);
                }
            }
            Value::Bool(_) | Value::Num(_) | Value::Str(_) | Value::NegInf | Value::PosInf => {
                if !others.contains(&v) {
                    others.push(v);
                }
            }
            Value::Set(_) => {}
        }
    }
    let mut out: Vec<Value> = insts.into_iter().map(Value::Inst).collect();
    out.extend(others);
    Ok(out)
}

fn install(state: &State, decls: &[TypeDecl], phrase: Phrase, id: usize, cfg: &Config) -> Result<State, TransitionError> {
    let reg = state.registry.apply_declarations(decls)?;
    let (kb, _) = close(&state.kb, &reg, &cfg.close)?;
    Ok(State { id, registry: Arc::new(reg), kb, parent: Some((state.id, phrase)) })
}

fn flatten<'p>(p: &'p Phrase, out: &mut Vec<&'p Phrase>) {
    match p {
        Phrase::Parallel(ps) => ps.iter().for_each(|q| flatten(q, out)),
        other => out.push(other),
    }
}

/// Execute one phrase; returns the new state if the phrase produced one.
pub fn exec_phrase(state: &State, phrase: &Phrase, id: usize, cfg: &Config) -> Result<(Option<State>, PhraseResult), TransitionError> {
    match phrase {
        Phrase::Declarations(ds) => Ok((Some(install(state, ds, phrase.clone(), id, cfg)?), PhraseResult::Declared)),
        Phrase::Statement(k, e) => {
            let (s, o) = exec_statement(state, *k, e, id, cfg)?;
            let mut s = s;
            s.parent = Some((state.id, phrase.clone()));
            Ok((Some(s), PhraseResult::Transition(o)))
        }
        Phrase::BoolQuery(e) => Ok((None, PhraseResult::Query(QueryResult::Bool(query_bool(state, e, cfg)?)))),
        Phrase::InstanceQuery(e) => Ok((None, PhraseResult::Query(QueryResult::Values(query_instances(state, e, cfg)?)))),
        Phrase::Parallel(_) => {
            let mut parts = Vec::new();
            flatten(phrase, &mut parts);
            let decls: Vec<TypeDecl> = parts
                .iter()
                .filter_map(|p| match p {
                    Phrase::Declarations(ds) => Some(ds.clone()),
                    _ => None,
                })
                .flatten()
                .collect();
            let snapshot = if decls.is_empty() {
                state.clone()
            } else {
                install(state, &decls, phrase.clone(), id, cfg)?
            };
            let mut fx = Effects::default();
            let mut results = Vec::new();
            let mut changed = !decls.is_empty();
            for p in &parts {
                match p {
                    Phrase::Declarations(_) => results.push(PhraseResult::Declared),
                    Phrase::Statement(k, e) => {
                        fx.merge(statement_effects(&snapshot, *k, e, cfg)?);
                        changed = true;
                    }
                    Phrase::BoolQuery(e) => results.push(PhraseResult::Query(QueryResult::Bool(query_bool(&snapshot, e, cfg)?))),
                    Phrase::InstanceQuery(e) => {
                        results.push(PhraseResult::Query(QueryResult::Values(query_instances(&snapshot, e, cfg)?)))
                    }
                    Phrase::Parallel(_) => unreachable!("flattened"),
                }
            }
            if !changed {
                return Ok((None, PhraseResult::Parallel(results)));
            }
            let (mut next, outcome) = commit(&snapshot, fx, phrase.clone(), id, cfg)?;
            next.parent = Some((state.id, phrase.clone()));
            results.push(PhraseResult::Transition(outcome));
            Ok((Some(next), PhraseResult::Parallel(results)))
        }
    }
}

/// A tree of states with a movable head.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: Config,
    states: Vec<State>,
    head: usize,
}

impl Session {
    pub fn new(config: Config) -> Session {
        Session { config, states: vec![State::initial()], head: 0 }
    }

    pub fn head(&self) -> &State {
        &self.states[self.head]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn get(&self, id: usize) -> Option<&State> {
        self.states.get(id)
    }

    /// Run a phrase against the head. On error the session is unchanged.
    pub fn exec(&mut self, phrase: &Phrase) -> Result<PhraseResult, TransitionError> {
        let id = self.states.len();
        let (next, result) = exec_phrase(self.head(), phrase, id, &self.config)?;
        if let Some(s) = next {
            self.states.push(s);
            self.head = id;
        }
        Ok(result)
    }

    /// Run a phrase with a request-scoped additional-input layer.
    pub fn exec_with_input(
        &mut self,
        phrase: &Phrase,
        input: &[(Instance, bool)],
    ) -> Result<PhraseResult, TransitionError> {
        if input.is_empty() {
            return self.exec(phrase);
        }
        let base = self.head().clone();
        let mut scoped = base.clone();
        for (i, b) in input {
            scoped.kb.additional.insert(i.clone(), *b);
        }
        let (kb, _) = close(&scoped.kb, &scoped.registry, &self.config.close)?;
        scoped.kb = kb;
        let id = self.states.len();
        let (next, result) = exec_phrase(&scoped, phrase, id, &self.config)?;
        if let Some(mut s) = next {
            s.kb.additional.clear();
            let (kb, _) = close(&s.kb, &s.registry, &self.config.close)?;
            s.kb = kb;
            s.parent = Some((base.id, phrase.clone()));
            self.states.push(s);
            self.head = id;
        }
        Ok(result)
    }

    pub fn revert(&mut self, id: usize) -> Result<(), TransitionError> {
        if id >= self.states.len() {
            return Err(TransitionError::UnknownState(id));
        }
        self.head = id;
        Ok(())
    }

    /// `(id, parent id, phrase text)` from the root to the head.
    pub fn history(&self) -> Vec<(usize, Option<usize>, String)> {
        let mut out = Vec::new();
        let mut cur = Some(self.head);
        while let Some(i) = cur {
            let s = &self.states[i];
            out.push((s.id, s.parent.as_ref().map(|p| p.0), s.parent.as_ref().map(|p| print_phrase(&p.1)).unwrap_or_default()));
            cur = s.parent.as_ref().map(|p| p.0);
        }
        out.reverse();
        out
    }

    /// Act and event instances over finite domains that are currently enabled.
    pub fn options(&self) -> Result<Vec<Instance>, EvalError> {
        let st = self.head();
        let ev = st.evaluator(&self.config);
        let mut out = Vec::new();
        for rec in st.registry.iter().filter(|r| r.is_action()) {
            if let crate::types::DomainShape::Finite(all) = st.registry.domain_of(&rec.name)? {
                for i in all {
                    if ev.enabled(&i)? {
                        out.push(i);
                    }
                }
            }
        }
        Ok(out)
    }
}
