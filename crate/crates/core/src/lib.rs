//! Interpreter for a normative specification language.
//!
//! Programs declare fact, act, event and duty types with derivation rules,
//! then run scenarios of assertions and action triggers against a layered
//! knowledge base. The crate is organised bottom-up:
//!
//! - [`syntax`]: lexer, parser and canonical printer.
//! - [`types`]: the type registry built from declarations.
//! - [`knowledge`]: ground instances, three-valued truth and provenance layers.
//! - [`eval`]: expression evaluation with implicit arguments and quantifiers.
//! - [`derivation`]: dependency analysis, stratification and closure.
//! - [`transition`]: statements, triggers, violations and phrase execution.
//! - [`oracle`]: brute-force grounding and stable-model enumeration.
//! - [`asp`]: emission of answer-set-programming text.

pub mod asp;
pub mod derivation;
pub mod eval;
pub mod knowledge;
pub mod oracle;
pub mod syntax;
pub mod transition;
pub mod types;

mod name;

pub use name::Name;
