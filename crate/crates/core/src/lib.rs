//! Mask-and-predict mutation testing for block-diagram models.
//!
//! Models are rendered to a canonical JSON text, individual property values
//! are masked, and a masked-token predictor proposes replacements. Each
//! replacement that still compiles becomes a mutant. Mutants are then run
//! through a fixed-step interpreter and judged under two kill notions:
//! output differences (classical) and requirement violations
//! (requirements-aware).

pub mod ir;
pub mod ingest;
pub mod masking;
pub mod predictor;
pub mod sim;
pub mod reqmon;
pub mod mutgen;
pub mod harness;
pub mod fixtures;
