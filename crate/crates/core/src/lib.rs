//! Kernel for second-order functional arithmetic: λ-terms, formulas with
//! equational theories, the AF2 typing rules and the tools built on them.

pub mod bounds;
pub mod datatypes;
pub mod lambda;
pub mod logic;
pub mod sandbox;
pub mod suite;
pub mod syntax;
pub mod typeclass;
pub mod typing;
