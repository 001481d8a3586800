//! Dependency analysis, stratification and closure of the derived layer.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::eval::{Env, EvalError, EvalOptions, Evaluator};
use crate::knowledge::{Instance, Interrupt, KnowledgeBase};
use crate::oracle::{self, OracleError};
use crate::syntax::{Arg, ClauseKind, Expr, Quantifier};
use crate::types::{Registry, TypeRecord, ACTOR};
use crate::Name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    HoldsWhen,
    DerivedFrom,
}

/// One derivation clause of a type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Name,
    pub kind: RuleKind,
    pub expr: Expr,
}

/// The derivation clauses of every type, plus the implicit rules that make
/// every known name of an atomic string type available as an `actor`.
pub fn derivation_rules(reg: &Registry) -> Vec<Rule> {
    let mut rules = Vec::new();
    for rec in reg.iter() {
        for (k, e) in &rec.clauses {
            let kind = match k {
                ClauseKind::HoldsWhen => RuleKind::HoldsWhen,
                ClauseKind::DerivedFrom => RuleKind::DerivedFrom,
                _ => continue,
            };
            rules.push(Rule { head: rec.name.clone(), kind, expr: e.clone() });
        }
    }
    if actor_is_used(reg) {
        for rec in reg.user_types() {
            if rec.name.as_str() == ACTOR || rec.open || !is_string_like(rec) {
                continue;
            }
            let v = rec.name.clone();
            let body = Expr::When(
                Box::new(Expr::App(Name::new(ACTOR), vec![Arg::Pos(Expr::Ref(v.clone()))])),
                Box::new(Expr::Builtin(crate::syntax::Builtin::Holds, Box::new(Expr::Ref(v.clone())))),
            );
            rules.push(Rule {
                head: Name::new(ACTOR),
                kind: RuleKind::DerivedFrom,
                expr: Expr::Quant(Quantifier::Foreach, vec![v], Box::new(body)),
            });
        }
    }
    rules
}

fn is_string_like(rec: &TypeRecord) -> bool {
    use crate::types::DomainSpec;
    match &rec.domain {
        DomainSpec::String => true,
        DomainSpec::Finite(lits) => lits.iter().all(|l| matches!(l, crate::knowledge::Literal::Str(_))),
        _ => false,
    }
}

fn actor_is_used(reg: &Registry) -> bool {
    let Some(actor) = reg.lookup(ACTOR) else { return false };
    if !actor.builtin {
        return false;
    }
    reg.user_types().any(|rec| {
        rec.roles().iter().any(|r| reg.resolve_var(r).is_some_and(|t| t.as_str() == ACTOR))
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<Name>,
    /// `(from, to, polarity)`: a rule for `from` mentions `to`.
    pub edges: BTreeSet<(Name, Name, Polarity)>,
}

struct EdgeWalker<'a> {
    reg: &'a Registry,
    head: Name,
    edges: &'a mut BTreeSet<(Name, Name, Polarity)>,
}

impl EdgeWalker<'_> {
    fn edge(&mut self, name: &Name, pol: Polarity) {
        if let Some(t) = self.reg.resolve_var(name) {
            self.edges.insert((self.head.clone(), t, pol));
        }
    }

    fn walk(&mut self, e: &Expr, pol: Polarity) {
        let neg = Polarity::Negative;
        match e {
            Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) => {}
            Expr::Ref(n) => self.edge(n, pol),
            Expr::App(ty, args) => {
                self.edge(ty, pol);
                let positional = args.iter().filter(|a| matches!(a, Arg::Pos(_))).count();
                if let Some(rec) = self.reg.lookup(ty) {
                    let missing: Vec<Name> = if rec.is_atomic() {
                        if args.is_empty() { vec![ty.clone()] } else { vec![] }
                    } else {
                        rec.roles()
                            .iter()
                            .skip(positional)
                            .filter(|r| !args.iter().any(|a| matches!(a, Arg::Named(n, _) if n == *r)))
                            .cloned()
                            .collect()
                    };
                    for m in missing {
                        self.edge(&m, pol);
                    }
                }
                for a in args {
                    match a {
                        Arg::Pos(x) | Arg::Named(_, x) => self.walk(x, pol),
                    }
                }
            }
            Expr::Quant(q, vars, body) => {
                let p = if *q == Quantifier::Forall { neg } else { pol };
                for v in vars {
                    self.edge(v, p);
                }
                self.walk(body, p);
            }
            Expr::Agg(_, inner) => self.walk(inner, neg),
            Expr::Not(inner) => self.walk(inner, neg),
            Expr::Proj(x, _) | Expr::Neg(x) | Expr::Builtin(_, x) => self.walk(x, pol),
            Expr::Bin(_, l, r) | Expr::When(l, r) => {
                self.walk(l, pol);
                self.walk(r, pol);
            }
        }
    }
}

pub fn build_dependency_graph(reg: &Registry) -> DependencyGraph {
    let mut edges = BTreeSet::new();
    let rules = derivation_rules(reg);
    for r in &rules {
        let mut w = EdgeWalker { reg, head: r.head.clone(), edges: &mut edges };
        w.walk(&r.expr, Polarity::Positive);
        if r.kind == RuleKind::HoldsWhen {
            if let Some(rec) = reg.lookup(&r.head) {
                for role in rec.roles() {
                    w.edge(role, Polarity::Positive);
                }
            }
        }
    }
    let heads: BTreeSet<&Name> = rules.iter().map(|r| &r.head).collect();
    for rec in reg.iter() {
        if !heads.contains(&rec.name) {
            continue;
        }
        for c in rec.clauses_of(ClauseKind::ConditionedBy) {
            let mut w = EdgeWalker { reg, head: rec.name.clone(), edges: &mut edges };
            w.walk(c, Polarity::Positive);
        }
    }
    DependencyGraph { nodes: reg.iter().map(|r| r.name.clone()).collect(), edges }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stratification {
    /// Strata in evaluation order: dependencies come first.
    Stratified(Vec<Vec<Name>>),
    NonStratified(Cycle),
}

/// A dependency cycle through at least one negative edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle(pub Vec<(Name, Polarity, Name)>);

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some((first, _, _)) = self.0.first() else { return Ok(()) };
        write!(f, "{first}")?;
        for (_, pol, to) in &self.0 {
            match pol {
                Polarity::Negative => write!(f, " -[neg]-> {to}")?,
                Polarity::Positive => write!(f, " -> {to}")?,
            }
        }
        Ok(())
    }
}

struct Analysis {
    /// Components in evaluation order.
    sccs: Vec<Vec<Name>>,
    /// For each component with an internal negative edge, one such cycle.
    cycles: BTreeMap<usize, Cycle>,
}

fn analyse(g: &DependencyGraph) -> Analysis {
    let mut graph: DiGraph<Name, Polarity> = DiGraph::new();
    let mut idx: BTreeMap<&Name, NodeIndex> = BTreeMap::new();
    for n in &g.nodes {
        idx.insert(n, graph.add_node(n.clone()));
    }
    for (from, to, pol) in &g.edges {
        if let (Some(&a), Some(&b)) = (idx.get(from), idx.get(to)) {
            graph.add_edge(a, b, *pol);
        }
    }
    let comps = tarjan_scc(&graph);
    let mut sccs = Vec::new();
    let mut cycles = BTreeMap::new();
    for (ci, comp) in comps.iter().enumerate() {
        let members: BTreeSet<NodeIndex> = comp.iter().copied().collect();
        let mut names: Vec<Name> = comp.iter().map(|i| graph[*i].clone()).collect();
        names.sort_by_key(|n| g.nodes.iter().position(|m| m == n));
        sccs.push(names);
        let neg = g.edges.iter().find(|(a, b, p)| {
            *p == Polarity::Negative
                && idx.get(a).is_some_and(|i| members.contains(i))
                && idx.get(b).is_some_and(|i| members.contains(i))
        });
        if let Some((a, b, _)) = neg {
            cycles.insert(ci, cycle_through(g, a, b, &members, &graph, &idx));
        }
    }
    Analysis { sccs, cycles }
}

fn cycle_through(
    g: &DependencyGraph,
    a: &Name,
    b: &Name,
    members: &BTreeSet<NodeIndex>,
    graph: &DiGraph<Name, Polarity>,
    idx: &BTreeMap<&Name, NodeIndex>,
) -> Cycle {
    let mut steps = vec![(a.clone(), Polarity::Negative, b.clone())];
    if a == b {
        return Cycle(steps);
    }
    // shortest path b ->* a inside the component
    let mut prev: BTreeMap<Name, Name> = BTreeMap::new();
    let mut queue = VecDeque::from([b.clone()]);
    let mut seen = BTreeSet::from([b.clone()]);
    while let Some(n) = queue.pop_front() {
        if &n == a {
            break;
        }
        for (from, to, _) in g.edges.iter().filter(|(f, _, _)| *f == n) {
            let _ = from;
            if idx.get(to).is_some_and(|i| members.contains(i)) && seen.insert(to.clone()) {
                prev.insert(to.clone(), n.clone());
                queue.push_back(to.clone());
            }
        }
    }
    let mut path = vec![a.clone()];
    let mut cur = a.clone();
    while let Some(p) = prev.get(&cur) {
        path.push(p.clone());
        cur = p.clone();
    }
    path.reverse();
    for w in path.windows(2) {
        let pol = if g.edges.contains(&(w[0].clone(), w[1].clone(), Polarity::Positive)) {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        steps.push((w[0].clone(), pol, w[1].clone()));
    }
    let _ = graph;
    Cycle(steps)
}

pub fn check_stratification(g: &DependencyGraph) -> Stratification {
    let a = analyse(g);
    match a.cycles.into_values().next() {
        Some(c) => Stratification::NonStratified(c),
        None => Stratification::Stratified(a.sccs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloseOptions {
    pub eval: EvalOptions,
    /// Iteration cap per stratum.
    pub max_iterations: usize,
    /// Accept non-stratified components that have exactly one stable model.
    pub oracle_fallback: bool,
    pub atom_cap: usize,
}

impl Default for CloseOptions {
    fn default() -> Self {
        CloseOptions {
            eval: EvalOptions::default(),
            max_iterations: 100_000,
            oracle_fallback: false,
            atom_cap: oracle::DEFAULT_ATOM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("specification is not stratified: {0}")]
    NonStratified(Cycle),
    #[error("fixpoint for {0} not reached within {1} iterations")]
    FixpointBudgetExceeded(Name, usize),
    #[error(transparent)]
    Eval(EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosureReport {
    pub strata: Vec<Vec<Name>>,
    pub iterations: Vec<usize>,
    /// Components that failed type-level stratification and were settled by grounding.
    pub grounded: Vec<Vec<Name>>,
}

/// Evaluate one rule, returning the head instances it produces.
pub fn eval_rule(ev: &Evaluator<'_>, rule: &Rule) -> Result<Vec<Instance>, EvalError> {
    let rec = ev.reg.get(&rule.head)?;
    match rule.kind {
        RuleKind::DerivedFrom => ev.instances_of(&rule.expr, &mut Env::new(), &rule.head),
        RuleKind::HoldsWhen => {
            let mut out = Vec::new();
            if rec.is_atomic() {
                for inst in ev.held(&rule.head)?.iter() {
                    let mut env = Env::new();
                    env.push(rule.head.clone(), crate::eval::Value::Inst(inst.clone()));
                    if ev.holds_expr(&rule.expr, &mut env)? {
                        out.push(inst.clone());
                    }
                }
                return Ok(out);
            }
            let mut domains = Vec::new();
            for role in rec.roles() {
                let ft = ev.reg.field_type(rec, role)?;
                domains.push(ev.held(&ft)?);
            }
            let mut choice = vec![0usize; domains.len()];
            if domains.iter().any(|d| d.is_empty()) {
                return Ok(out);
            }
            loop {
                let fields: Vec<Instance> = choice.iter().zip(&domains).map(|(i, d)| d[*i].clone()).collect();
                let inst = Instance::product(rule.head.clone(), fields);
                let mut env = Env::new();
                ev.bind_fields(&inst, &mut env)?;
                if ev.holds_expr(&rule.expr, &mut env)? {
                    out.push(inst);
                }
                // odometer increment, last field fastest
                let mut k = domains.len();
                loop {
                    if k == 0 {
                        return Ok(out);
                    }
                    k -= 1;
                    choice[k] += 1;
                    if choice[k] < domains[k].len() {
                        break;
                    }
                    choice[k] = 0;
                }
            }
        }
    }
}

/// Keep the instances whose `Conditioned by` clauses hold.
pub fn unsuppressed(ev: &Evaluator<'_>, insts: Vec<Instance>) -> Result<Vec<Instance>, EvalError> {
    let mut out = Vec::with_capacity(insts.len());
    for i in insts {
        let rec = ev.reg.get(&i.ty)?;
        if rec.clauses_of(ClauseKind::ConditionedBy).next().is_none() || ev.conditions_hold(rec, &i)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Recompute the derived layer from scratch, stratum by stratum.
pub fn close(kb: &KnowledgeBase, reg: &Registry, opts: &CloseOptions) -> Result<(KnowledgeBase, ClosureReport), DeriveError> {
    let graph = build_dependency_graph(reg);
    let analysis = analyse(&graph);
    let rules = derivation_rules(reg);
    let mut by_head: BTreeMap<&Name, Vec<&Rule>> = BTreeMap::new();
    for r in &rules {
        by_head.entry(&r.head).or_default().push(r);
    }

    let mut out = kb.clone();
    out.derived.clear();
    out.pending.clear();
    let mut report = ClosureReport::default();

    for (ci, scc) in analysis.sccs.iter().enumerate() {
        let scc_rules: Vec<&Rule> = scc.iter().flat_map(|n| by_head.get(n).cloned().unwrap_or_default()).collect();
        if scc_rules.is_empty() {
            continue;
        }
        report.strata.push(scc.clone());
        if let Some(cycle) = analysis.cycles.get(&ci) {
            match oracle::settle_component(reg, &out, scc, opts) {
                Ok(Some(model)) => {
                    out.derived.extend(model);
                    report.iterations.push(1);
                    report.grounded.push(scc.clone());
                    continue;
                }
                Ok(None) => return Err(DeriveError::NonStratified(cycle.clone())),
                Err(OracleError::Eval(EvalError::Interrupt(i))) => {
                    mark_pending(&mut out, scc, i);
                    report.iterations.push(0);
                    continue;
                }
                Err(OracleError::Eval(e)) => return Err(DeriveError::Eval(e)),
                Err(_) => return Err(DeriveError::NonStratified(cycle.clone())),
            }
        }
        let mut iterations = 0;
        loop {
            iterations += 1;
            if iterations > opts.max_iterations {
                return Err(DeriveError::FixpointBudgetExceeded(scc[0].clone(), opts.max_iterations));
            }
            let step = {
                let ev = Evaluator::new(reg, &out, opts.eval);
                let mut produced = Vec::new();
                let mut result = Ok(());
                for r in &scc_rules {
                    match eval_rule(&ev, r) {
                        Ok(v) => produced.extend(v),
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                }
                result.and_then(|_| {
                    let fresh: Vec<Instance> = produced.into_iter().filter(|i| !out.derived.contains(i)).collect();
                    unsuppressed(&ev, fresh)
                })
            };
            match step {
                Ok(fresh) if fresh.is_empty() => break,
                Ok(fresh) => out.derived.extend(fresh),
                Err(EvalError::Interrupt(i)) => {
                    mark_pending(&mut out, scc, i);
                    break;
                }
                Err(e) => return Err(DeriveError::Eval(e)),
            }
        }
        report.iterations.push(iterations);
    }
    Ok((out, report))
}

fn mark_pending(kb: &mut KnowledgeBase, scc: &[Name], i: Interrupt) {
    for n in scc {
        kb.derived.retain(|d| &d.ty != n);
        kb.pending.insert(n.clone(), i.clone());
    }
}

/// Reject specifications whose negative cycles are not settled by grounding `kb`.
pub fn check(kb: &KnowledgeBase, reg: &Registry, opts: &CloseOptions) -> Result<(), DeriveError> {
    close(kb, reg, opts).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{Assertion, Literal};
    use crate::syntax::{parse_str, Phrase};

    fn setup(src: &str) -> (Registry, KnowledgeBase) {
        let mut r = Registry::new();
        let mut kb = KnowledgeBase::new();
        for p in parse_str(src).unwrap() {
            match p {
                Phrase::Declarations(ds) => r = r.apply_declarations(&ds).unwrap(),
                Phrase::Statement(_, e) => {
                    let ev = Evaluator::new(&r, &kb, EvalOptions::default());
                    let insts = ev.instances(&e, &mut Env::new()).unwrap();
                    for i in insts {
                        kb.asserted.insert(i, Assertion::True);
                    }
                }
                _ => {}
            }
        }
        (r, kb)
    }

    fn held(kb: &KnowledgeBase, ty: &str) -> Vec<String> {
        kb.true_instances(&Name::new(ty)).iter().map(|i| i.to_string()).collect()
    }

    #[test]
    fn chain_of_eight() {
        let (r, kb) = setup("Fact x Identified by int Derived from (Foreach x: x(x.int - 1) Where 0 < x.int). +x(8).");
        let (closed, report) = close(&kb, &r, &CloseOptions::default()).unwrap();
        assert_eq!(closed.true_instances(&Name::new("x")).len(), 9);
        assert!(report.iterations.iter().any(|n| *n >= 9));
    }

    #[test]
    fn no_rules_is_identity() {
        let (r, kb) = setup("Fact a Identified by Int. +a(1).");
        let (closed, _) = close(&kb, &r, &CloseOptions::default()).unwrap();
        assert_eq!(held(&closed, "a"), ["a(1)"]);
        assert!(closed.derived.is_empty());
    }

    #[test]
    fn idempotent() {
        let (r, kb) = setup("Fact x Identified by Int Derived from (Foreach x1, x2: x((x1 + x2) / 2)). +x(0). +x(16).");
        let (once, _) = close(&kb, &r, &CloseOptions::default()).unwrap();
        let (twice, _) = close(&once, &r, &CloseOptions::default()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.true_instances(&Name::new("x")).len(), 17);
    }

    #[test]
    fn self_negation_graph() {
        let (r, _) = setup("Fact bidder. Fact ready Identified by bidder Holds when Not(ready(bidder)).");
        let g = build_dependency_graph(&r);
        assert!(g.edges.contains(&(Name::new("ready"), Name::new("ready"), Polarity::Negative)));
        match check_stratification(&g) {
            Stratification::NonStratified(c) => assert_eq!(c.to_string(), "ready -[neg]-> ready"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_edge_for_extend() {
        let (r, _) = setup(
            "Fact object. Fact price Identified by Int. Function min-price-of Identified by object * price.\
             Extend Fact object Derived from min-price-of.object.",
        );
        let g = build_dependency_graph(&r);
        assert!(g.edges.contains(&(Name::new("object"), Name::new("min-price-of"), Polarity::Positive)));
        assert!(matches!(check_stratification(&g), Stratification::Stratified(_)));
    }

    #[test]
    fn empty_registry_graph_has_no_edges() {
        let g = build_dependency_graph(&Registry::new());
        assert!(g.edges.is_empty());
    }

    #[test]
    fn longer_cycle_diagnostic() {
        let (r, _) = setup(
            "Fact a Identified by Int Derived from b. Fact b Identified by Int Derived from (Foreach c: c When Not(a(c))).\
             Fact c Identified by Int Derived from b.",
        );
        match check_stratification(&build_dependency_graph(&r)) {
            Stratification::NonStratified(c) => {
                let s = c.to_string();
                assert!(s.starts_with("b -[neg]-> a"), "{s}");
                assert!(s.ends_with("-> b"), "{s}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn primes_up_to_thirty() {
        let mut src = String::from(
            "Fact prime Identified by Int Derived from (Foreach int: prime(int) \
             Where Not(Exists int1, int2: 1 Where int1 * int2 == int)).",
        );
        for i in 2..=30 {
            src.push_str(&format!("+int({i})."));
        }
        let (r, kb) = setup(&src);
        let (closed, _) = close(&kb, &r, &CloseOptions::default()).unwrap();
        let primes: Vec<i64> = closed
            .true_instances(&Name::new("prime"))
            .iter()
            .map(|i| match i.literal() {
                Some(Literal::Num(n)) => *n,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn asserted_false_beats_derivation() {
        let (r, mut kb) = setup("Fact x Identified by int Derived from (Foreach x: x(x.int - 1) Where 0 < x.int). +x(3).");
        let x1 = Instance::product("x", vec![Instance::atomic("int", Literal::Num(1))]);
        kb.asserted.insert(x1.clone(), Assertion::False);
        let (closed, _) = close(&kb, &r, &CloseOptions::default()).unwrap();
        let ev = Evaluator::new(&r, &closed, EvalOptions::default());
        assert!(!ev.holds(&x1).unwrap());
    }

    #[test]
    fn conditions_suppress_derived_instances() {
        let (r, kb) = setup(
            "Fact a Identified by Int. Fact ok Identified by Int.\
             Fact b Identified by a Derived from (Foreach a: b(a)) Conditioned by ok(a.a).\
             +a(1). +a(2). +ok(2).",
        );
        let (closed, _) = close(&kb, &r, &CloseOptions::default()).unwrap();
        assert_eq!(held(&closed, "b"), ["b(2)"]);
    }
}
