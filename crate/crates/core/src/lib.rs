//! Parallel-innermost runtime complexity analysis for term rewrite systems.

pub mod analysis;
pub mod chain;
pub mod confluence;
pub mod cpi;
pub mod dt;
pub mod fixtures;
pub mod poly;
pub mod rewrite;
pub mod solver;
pub mod sorts;
pub mod term;
pub mod tpdb;
pub mod trs;
pub mod validate;

pub use dt::{DependencyTuple, DtProblem, DtSignature};
pub use rewrite::{DerivationHeight, Strategy};
pub use term::{Position, Signature, Substitution, SymId, SymbolKind, Term, Var};
pub use trs::{RelativeTrs, Rule, Trs};
