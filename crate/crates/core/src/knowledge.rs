//! Ground instances and the layered three-valued knowledge base.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;
use std::sync::Arc;

use crate::syntax::printer::{name_text, string_text};
use crate::types::{Registry, TypeError};
use crate::Name;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Num(i64),
    Str(Arc<str>),
}

impl Literal {
    pub fn str(s: &str) -> Literal {
        Literal::Str(Arc::from(s))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Num(n) => write!(f, "{n}"),
            Literal::Str(s) => f.write_str(&string_text(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Lit(Literal),
    Inst(Instance),
}

/// A fully ground value of a declared type. Atomic types carry one literal,
/// product types carry one instance per field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub ty: Name,
    pub args: Arc<[Elem]>,
}

impl Instance {
    pub fn atomic(ty: impl Into<Name>, lit: Literal) -> Instance {
        Instance { ty: ty.into(), args: Arc::from(vec![Elem::Lit(lit)]) }
    }

    pub fn product(ty: impl Into<Name>, fields: Vec<Instance>) -> Instance {
        Instance {
            ty: ty.into(),
            args: fields.into_iter().map(Elem::Inst).collect::<Vec<_>>().into(),
        }
    }

    /// The literal of an atomic instance.
    pub fn literal(&self) -> Option<&Literal> {
        match &self.args[..] {
            [Elem::Lit(l)] => Some(l),
            _ => None,
        }
    }

    pub fn field(&self, i: usize) -> Option<&Instance> {
        match self.args.get(i) {
            Some(Elem::Inst(inst)) => Some(inst),
            _ => None,
        }
    }

    /// Smallest possible instance of a type, for range scans.
    fn lower_bound(ty: &Name) -> Instance {
        Instance { ty: ty.clone(), args: Arc::from(Vec::new()) }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", name_text(&self.ty))?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match a {
                Elem::Lit(l) => write!(f, "{l}")?,
                Elem::Inst(inst) => match inst.literal() {
                    Some(l) => write!(f, "{l}")?,
                    None => write!(f, "{inst}")?,
                },
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "True",
            Truth::False => "False",
            Truth::Unknown => "Unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assertion {
    True,
    False,
    Obfuscated,
}

/// Why evaluation stopped: missing information about an open type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, thiserror::Error)]
pub enum Interrupt {
    #[error("truth of {0} is unknown")]
    UnknownInstance(Instance),
    #[error("cannot enumerate open type {0}")]
    OpenEnumeration(Name),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub additional: BTreeMap<Instance, bool>,
    pub asserted: BTreeMap<Instance, Assertion>,
    pub derived: BTreeSet<Instance>,
    /// Types whose derivation was cut short; consulting them re-raises the interrupt.
    pub pending: BTreeMap<Name, Interrupt>,
}

fn of_type<'a, V>(map: &'a BTreeMap<Instance, V>, ty: &'a Name) -> impl Iterator<Item = (&'a Instance, &'a V)> {
    map.range((Bound::Included(Instance::lower_bound(ty)), Bound::Unbounded))
        .take_while(move |(i, _)| &i.ty == ty)
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn derived_of<'a>(&'a self, ty: &'a Name) -> impl Iterator<Item = &'a Instance> {
        self.derived
            .range((Bound::Included(Instance::lower_bound(ty)), Bound::Unbounded))
            .take_while(move |i| &i.ty == ty)
    }

    pub fn asserted_of<'a>(&'a self, ty: &'a Name) -> impl Iterator<Item = (&'a Instance, &'a Assertion)> {
        of_type(&self.asserted, ty)
    }

    pub fn additional_of<'a>(&'a self, ty: &'a Name) -> impl Iterator<Item = (&'a Instance, &'a bool)> {
        of_type(&self.additional, ty)
    }

    /// Layered lookup ignoring openness: `None` means no layer mentions the instance.
    pub fn recorded(&self, inst: &Instance) -> Option<Truth> {
        if let Some(b) = self.additional.get(inst) {
            return Some(Truth::from_bool(*b));
        }
        if let Some(a) = self.asserted.get(inst) {
            return Some(match a {
                Assertion::True => Truth::True,
                Assertion::False => Truth::False,
                Assertion::Obfuscated => Truth::Unknown,
            });
        }
        if self.derived.contains(inst) {
            return Some(Truth::True);
        }
        None
    }

    /// Instances of `ty` recorded True in some layer and not overridden above it.
    pub fn true_instances(&self, ty: &Name) -> Vec<Instance> {
        let mut out: BTreeSet<Instance> = BTreeSet::new();
        for (i, b) in self.additional_of(ty) {
            if *b {
                out.insert(i.clone());
            }
        }
        for (i, a) in self.asserted_of(ty) {
            if *a == Assertion::True && !self.additional.contains_key(i) {
                out.insert(i.clone());
            }
        }
        for i in self.derived_of(ty) {
            if !self.additional.contains_key(i) && !self.asserted.contains_key(i) {
                out.insert(i.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Every instance of `ty` mentioned by any layer.
    pub fn mentioned(&self, ty: &Name) -> BTreeSet<Instance> {
        let mut out: BTreeSet<Instance> = self.additional_of(ty).map(|(i, _)| i.clone()).collect();
        out.extend(self.asserted_of(ty).map(|(i, _)| i.clone()));
        out.extend(self.derived_of(ty).cloned());
        out
    }
}

/// Three-valued truth of a well-typed instance.
pub fn truth_of(kb: &KnowledgeBase, reg: &Registry, inst: &Instance) -> Result<Truth, TypeError> {
    let rec = reg.get(&inst.ty)?;
    Ok(match kb.recorded(inst) {
        Some(Truth::Unknown) if !rec.open => Truth::False,
        Some(t) => t,
        None if rec.open => Truth::Unknown,
        None => Truth::False,
    })
}

/// Write into the asserted layer, displacing other instances of `Var` types
/// and other values for the same key of `Function` types.
pub fn assert_instance(
    kb: &mut KnowledgeBase,
    reg: &Registry,
    inst: &Instance,
    polarity: Assertion,
    function_displacement: bool,
) -> Result<(), TypeError> {
    let rec = reg.get(&inst.ty)?;
    let arity = rec.arity();
    if inst.args.len() != arity {
        return Err(TypeError::ArityMismatch { ty: inst.ty.clone(), expected: arity, found: inst.args.len() });
    }
    if polarity == Assertion::True && (rec.var || (rec.function && function_displacement && arity > 0)) {
        let key_len = if rec.var { 0 } else { arity - 1 };
        for other in kb.mentioned(&inst.ty) {
            if &other != inst && other.args[..key_len] == inst.args[..key_len] && kb.recorded(&other) != Some(Truth::False) {
                kb.asserted.insert(other, Assertion::False);
            }
        }
    }
    kb.asserted.insert(inst.clone(), polarity);
    Ok(())
}

/// Apply a batch of simultaneous writes with create > terminate > obfuscate precedence.
pub fn apply_effects(
    kb: &mut KnowledgeBase,
    reg: &Registry,
    created: &BTreeSet<Instance>,
    terminated: &BTreeSet<Instance>,
    obfuscated: &BTreeSet<Instance>,
    function_displacement: bool,
) -> Result<(), TypeError> {
    for i in obfuscated {
        if !created.contains(i) && !terminated.contains(i) {
            assert_instance(kb, reg, i, Assertion::Obfuscated, function_displacement)?;
        }
    }
    for i in terminated {
        if !created.contains(i) {
            assert_instance(kb, reg, i, Assertion::False, function_displacement)?;
        }
    }
    for i in created {
        assert_instance(kb, reg, i, Assertion::True, function_displacement)?;
    }
    Ok(())
}
