//! Independent oracles and generators used by the test suites.
//!
//! Everything here is written against the public data types of the engine
//! only: derivations are produced by separate implementations of typing,
//! evaluation and proof search, so agreement with the engine's verifier is
//! meaningful evidence.

pub mod alfa;
pub mod gen;
pub mod mutate;
pub mod nd;
