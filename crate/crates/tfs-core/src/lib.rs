//! An execution engine for typed-feature-structure grammars.
//!
//! A grammar consists of a type signature (a bounded-complete partial
//! order of types), a set of rules whose elements are feature
//! structures sharing one graph, a lexicon, and a start structure.
//! Sentence membership is decided by a bottom-up chart parser that
//! computes the least fixpoint of a parsing-step operator; a naive
//! derivation-based search acts as an independent acceptor for
//! cross-validation.

pub mod afs;
pub mod avm;
mod engine;
pub mod grammar;
pub mod mrs;
pub mod oracle;
pub mod parser;
pub mod signature;
pub mod syntax;
pub mod termination;
pub mod tfs;

pub use afs::{Afs, NormalizeError, PreAfs, UnificationFailure};
pub use grammar::{Grammar, LoadError, Rule};
pub use mrs::{Amrs, ContextError};
pub use parser::{Config, Item, RunError, RunResult, Status, Verdict};
pub use signature::{FeatureId, Signature, SignatureError, TypeId};
pub use tfs::ConcreteTfs;
