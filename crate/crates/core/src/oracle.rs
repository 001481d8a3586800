//! Brute-force grounding and stable-model enumeration.
//!
//! Only meant for small ground programs: every interpretation of the
//! candidate atoms is visited, so the atom count is capped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::derivation::{derivation_rules, eval_rule, unsuppressed, CloseOptions, Rule};
use crate::eval::{EvalError, EvalOptions, Evaluator};
use crate::knowledge::{Instance, KnowledgeBase};
use crate::types::Registry;
use crate::Name;

pub const DEFAULT_ATOM_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("ground program needs more than {cap} atoms")]
    AtomCapExceeded { cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `head :- pos, not neg.`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: Instance,
    pub pos: Vec<Instance>,
    pub neg: Vec<Instance>,
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let body: Vec<String> = self
            .pos
            .iter()
            .map(|a| a.to_string())
            .chain(self.neg.iter().map(|a| format!("not {a}")))
            .collect();
        if !body.is_empty() {
            write!(f, " :- {}", body.join(", "))?;
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub atoms: Vec<Instance>,
    pub rules: Vec<GroundRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Zero,
    Unique,
    Multiple(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableModelReport {
    pub models: Vec<BTreeSet<Instance>>,
    pub verdict: Verdict,
}

fn with_atoms(base: &KnowledgeBase, atoms: &[Instance], mask: u64) -> KnowledgeBase {
    let mut kb = base.clone();
    for (i, a) in atoms.iter().enumerate() {
        if mask >> i & 1 == 1 {
            kb.derived.insert(a.clone());
        }
    }
    kb
}

fn produce(reg: &Registry, kb: &KnowledgeBase, rules: &[&Rule], opts: EvalOptions) -> Result<BTreeSet<Instance>, EvalError> {
    let ev = Evaluator::new(reg, kb, opts);
    let mut out = Vec::new();
    for r in rules {
        out.extend(eval_rule(&ev, r)?);
    }
    Ok(unsuppressed(&ev, out)?.into_iter().collect())
}

/// Ground the rules whose heads are in `heads` against `base`.
///
/// Atoms recorded in the asserted or additional layers are fixed by `base`
/// and never become candidates.
pub fn ground(
    reg: &Registry,
    base: &KnowledgeBase,
    heads: &[Name],
    cap: usize,
    opts: EvalOptions,
) -> Result<GroundProgram, OracleError> {
    let cap = cap.min(63);
    let all = derivation_rules(reg);
    let rules: Vec<&Rule> = all.iter().filter(|r| heads.contains(&r.head)).collect();
    let mut base = base.clone();
    base.derived.retain(|d| !heads.contains(&d.ty));

    let fixed = |i: &Instance| base.asserted.contains_key(i) || base.additional.contains_key(i);
    let mut atoms: Vec<Instance> = Vec::new();
    let mut known: BTreeSet<Instance> = BTreeSet::new();
    let mut table: BTreeMap<u64, BTreeSet<Instance>> = BTreeMap::new();
    loop {
        let mut fresh = Vec::new();
        for mask in 0..(1u64 << atoms.len()) {
            if table.contains_key(&mask) {
                continue;
            }
            let produced = produce(reg, &with_atoms(&base, &atoms, mask), &rules, opts)?;
            for p in &produced {
                if !fixed(p) && !known.contains(p) && !fresh.contains(p) {
                    fresh.push(p.clone());
                }
            }
            table.insert(mask, produced);
        }
        if fresh.is_empty() {
            break;
        }
        if atoms.len() + fresh.len() > cap {
            return Err(OracleError::AtomCapExceeded { cap });
        }
        for f in fresh {
            known.insert(f.clone());
            atoms.push(f);
        }
        // masks over the old atoms keep their numbering; new ones are evaluated next round
    }

    let n = atoms.len();
    let mut rules_out = Vec::new();
    for (ai, atom) in atoms.iter().enumerate() {
        let minterms: Vec<u64> = (0..(1u64 << n)).filter(|m| table[m].contains(atom)).collect();
        let _ = ai;
        for (value, care) in prime_implicants(&minterms, n) {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for (j, a) in atoms.iter().enumerate() {
                if care >> j & 1 == 1 {
                    if value >> j & 1 == 1 {
                        pos.push(a.clone());
                    } else {
                        neg.push(a.clone());
                    }
                }
            }
            rules_out.push(GroundRule { head: atom.clone(), pos, neg });
        }
    }
    rules_out.sort();
    Ok(GroundProgram { atoms, rules: rules_out })
}

/// Quine–McCluskey: prime implicants of the function with the given minterms,
/// as `(value, care)` bit pairs.
pub fn prime_implicants(minterms: &[u64], n: usize) -> Vec<(u64, u64)> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut current: BTreeSet<(u64, u64)> = minterms.iter().map(|m| (*m, full)).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut next = BTreeSet::new();
        let mut used = BTreeSet::new();
        let terms: Vec<(u64, u64)> = current.iter().copied().collect();
        let mut by_care: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (v, c) in &terms {
            by_care.entry(*c).or_default().push(*v);
        }
        for (care, values) in &by_care {
            let set: BTreeSet<u64> = values.iter().copied().collect();
            for v in values {
                for bit in 0..n {
                    let b = 1u64 << bit;
                    if care & b == 0 || v & b != 0 {
                        continue;
                    }
                    if set.contains(&(v | b)) {
                        next.insert((*v, care & !b));
                        used.insert((*v, *care));
                        used.insert((v | b, *care));
                    }
                }
            }
        }
        for t in terms {
            if !used.contains(&t) {
                primes.insert(t);
            }
        }
        current = next;
    }
    primes.into_iter().collect()
}

fn mask_of(atoms: &[Instance], set: &[Instance]) -> u64 {
    set.iter().fold(0, |m, a| m | 1 << atoms.iter().position(|x| x == a).expect("atom"))
}

/// All stable models of a ground program.
pub fn enumerate_stable_models(prog: &GroundProgram) -> StableModelReport {
    let n = prog.atoms.len();
    let compiled: Vec<(usize, u64, u64)> = prog
        .rules
        .iter()
        .map(|r| {
            let h = prog.atoms.iter().position(|a| a == &r.head).expect("head");
            (h, mask_of(&prog.atoms, &r.pos), mask_of(&prog.atoms, &r.neg))
        })
        .collect();
    let mut models = Vec::new();
    for m in 0..(1u64 << n) {
        let mut least = 0u64;
        loop {
            let mut next = least;
            for (h, pos, neg) in &compiled {
                if neg & m == 0 && pos & least == *pos {
                    next |= 1 << h;
                }
            }
            if next == least {
                break;
            }
            least = next;
        }
        if least == m {
            models.push(
                (0..n).filter(|i| m >> i & 1 == 1).map(|i| prog.atoms[i].clone()).collect::<BTreeSet<_>>(),
            );
        }
    }
    let verdict = match models.len() {
        0 => Verdict::Zero,
        1 => Verdict::Unique,
        k => Verdict::Multiple(k),
    };
    StableModelReport { models, verdict }
}

/// True when no ground atom depends negatively on itself through a cycle.
pub fn locally_stratified(prog: &GroundProgram) -> bool {
    let n = prog.atoms.len();
    let idx = |a: &Instance| prog.atoms.iter().position(|x| x == a).expect("atom");
    let mut reach = vec![vec![false; n]; n];
    for r in &prog.rules {
        let h = idx(&r.head);
        for b in r.pos.iter().chain(&r.neg) {
            reach[h][idx(b)] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let via = reach[k].clone();
                for (r, v) in reach[i].iter_mut().zip(via) {
                    *r |= v;
                }
            }
        }
    }
    prog.rules.iter().all(|r| {
        let h = idx(&r.head);
        r.neg.iter().all(|b| {
            let b = idx(b);
            !(b == h || reach[b][h])
        })
    })
}

/// The perfect model of a locally stratified ground program.
pub fn perfect_model(prog: &GroundProgram) -> Option<BTreeSet<Instance>> {
    if !locally_stratified(prog) {
        return None;
    }
    let report = enumerate_stable_models(prog);
    report.models.into_iter().next()
}

/// Settle a component that failed type-level stratification.
///
/// Returns the derived instances of the component, or `None` when the
/// component must be rejected.
pub(crate) fn settle_component(
    reg: &Registry,
    kb: &KnowledgeBase,
    heads: &[Name],
    opts: &CloseOptions,
) -> Result<Option<BTreeSet<Instance>>, OracleError> {
    let prog = ground(reg, kb, heads, opts.atom_cap, opts.eval)?;
    if let Some(m) = perfect_model(&prog) {
        return Ok(Some(m));
    }
    if opts.oracle_fallback {
        let report = enumerate_stable_models(&prog);
        if report.verdict == Verdict::Unique {
            return Ok(report.models.into_iter().next());
        }
    }
    Ok(None)
}

/// Stable models of the whole derivation program over the non-derived layers of `kb`.
pub fn stable_models(reg: &Registry, kb: &KnowledgeBase, cap: usize, opts: EvalOptions) -> Result<StableModelReport, OracleError> {
    let heads: Vec<Name> = derivation_rules(reg).into_iter().map(|r| r.head).collect::<BTreeSet<_>>().into_iter().collect();
    let mut base = kb.clone();
    base.derived.clear();
    base.pending.clear();
    let prog = ground(reg, &base, &heads, cap, opts)?;
    Ok(enumerate_stable_models(&prog))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Instance {
        Instance::atomic("p", crate::knowledge::Literal::str(s))
    }

    #[test]
    fn qm_tautology_is_a_fact() {
        assert_eq!(prime_implicants(&[0, 1], 1), vec![(0, 0)]);
    }

    #[test]
    fn qm_classic() {
        // f(a,b) = a | b
        let mut p = prime_implicants(&[1, 2, 3], 2);
        p.sort();
        assert_eq!(p, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn even_loop_has_two_models() {
        let (a, b) = (atom("a"), atom("b"));
        let prog = GroundProgram {
            atoms: vec![a.clone(), b.clone()],
            rules: vec![
                GroundRule { head: a.clone(), pos: vec![], neg: vec![b.clone()] },
                GroundRule { head: b.clone(), pos: vec![], neg: vec![a.clone()] },
            ],
        };
        assert_eq!(enumerate_stable_models(&prog).verdict, Verdict::Multiple(2));
        assert!(!locally_stratified(&prog));
    }

    #[test]
    fn odd_loop_has_none() {
        let a = atom("a");
        let prog = GroundProgram {
            atoms: vec![a.clone()],
            rules: vec![GroundRule { head: a.clone(), pos: vec![], neg: vec![a.clone()] }],
        };
        assert_eq!(enumerate_stable_models(&prog).verdict, Verdict::Zero);
    }

    #[test]
    fn positive_loop_is_unsupported() {
        let a = atom("a");
        let prog = GroundProgram {
            atoms: vec![a.clone()],
            rules: vec![GroundRule { head: a.clone(), pos: vec![a.clone()], neg: vec![] }],
        };
        let r = enumerate_stable_models(&prog);
        assert_eq!(r.verdict, Verdict::Unique);
        assert!(r.models[0].is_empty());
    }
}
