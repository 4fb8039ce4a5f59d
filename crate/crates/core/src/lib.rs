//! Synthesis-friendly compilation of Boolean relational specifications.
//!
//! A specification `F(X, Y)` relates outputs `X` to inputs `Y`. This crate
//! compiles CNF specifications into SynNNF, a negation normal form from
//! which Skolem functions for `X` can be read off in time linear in the
//! size of the formula, and provides the supporting checks.

pub mod c2syn;
pub mod cnf;
pub mod error;
pub mod nnf;
pub mod oracle;
pub mod refine;
pub mod sat;
pub mod skolem;
pub mod synnnf;

pub use error::{Error, Result};
pub use nnf::{Assignment, Literal, NnfDag, Node, NodeId, Signature, VarId, VarKind};
