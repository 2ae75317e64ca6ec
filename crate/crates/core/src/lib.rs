//! Engine for building derivation trees with holes and checking them live
//! against declarative inference rules.
//!
//! A [`document::DerivationDoc`] holds a prelude of abbreviations, reusable
//! subtrees and a root derivation. [`verifier::verify_document`] classifies
//! every node as correct, incorrect (with localized errors) or
//! indeterminate (with the obligations its holes leave open).

pub mod document;
pub mod rules;
pub mod term;
pub mod textio;
pub mod verifier;
