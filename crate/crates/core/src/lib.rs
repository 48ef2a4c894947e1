//! Exact computational algebra for rank-2 Kisin modules over F_{p^r}((u)).
//!
//! The library enumerates the finite flat models of the trivial
//! 2-dimensional mod-p representation as lattices in an etale phi-module,
//! verifies the combinatorial lemmas governing their diagonal invariants,
//! and assembles the chain-of-moves component graph showing the
//! non-ordinary locus connected.
//!
//! Everything is exact: coefficients live in F_{p^r} as polynomial
//! residues, series are Laurent polynomials or precision-capped power
//! series, and any decision that would need unknown coefficients fails
//! loudly instead of guessing.

pub mod algebra;
pub mod connect;
pub mod error;
pub mod kisin;
pub mod lemmas;
pub mod meta;
pub mod moduli;

pub use error::{Error, Result};
