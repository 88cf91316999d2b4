//! Repetition thresholds, Pansiot encodings and the word constructions used
//! to show that threshold words grow exponentially.
//!
//! Letters are `u16` values starting at 1; binary words are stored over
//! `{1, 2}` and rendered as `0`/`1`.

pub mod carpi;
pub mod constructions;
pub mod error;
pub mod exec;
pub mod growth;
pub mod pansiot;
pub mod verifier;
pub mod words;

pub use error::{Error, Result};
pub use exec::Exec;
pub use words::{
    Letter, RationalExponent, RepetitionKind, RepetitionReport, Word, repetition_threshold,
};
