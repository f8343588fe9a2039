//! A toolkit for two-sided incorrectness typing over a small functional
//! language with atoms and pattern matching.
//!
//! The library is organised around four layers:
//!
//! * [`syntax`] and [`reduction`] give the object language: terms, patterns,
//!   capture-avoiding substitution, and a call-by-name small-step semantics
//!   whose closed normal forms split into values and stuck terms.
//! * [`types`] and [`subtyping`] give the type language (with a complement
//!   operator) and a terminating decision procedure for the subtype
//!   relation, plus a checker for explicit subtyping derivations.
//! * [`typing`] and [`onesided`] give checkers for the two-sided and
//!   one-sided sequent systems, elaborators that expand every derived rule
//!   into primitives, translations between the two systems, and a synthesiser
//!   that classifies any closed normal form with a certifying derivation.
//! * [`frontend`] gives concrete syntax for terms, types and derivation
//!   scripts, and the corpus runner behind the `incortype` binary.
//!
//! The `examples/` directory contains one runnable example per capability;
//! `cargo run --example eval_reduction` is a good place to start.

pub mod frontend;
pub mod onesided;
pub mod oracle;
pub mod reduction;
pub mod subtyping;
pub mod syntax;
pub mod types;
pub mod typing;
