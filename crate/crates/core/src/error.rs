use thiserror::Error;

use crate::words::RepetitionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter} is outside the alphabet 1..={alphabet}")]
    LetterOutOfRange { letter: u32, alphabet: usize },

    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("undefined exponent: the word is empty")]
    UndefinedExponent,

    #[error("invalid rational exponent: {0}")]
    InvalidRational(String),

    #[error("cannot parse word {text:?}: {reason}")]
    ParseWord { text: String, reason: String },

    #[error("expected a binary word (letters 0/1), got alphabet size {0}")]
    NotBinary(usize),

    #[error("{what} must be at least {min}, got {got}")]
    OutOfRange {
        what: &'static str,
        min: u64,
        got: u64,
    },

    #[error("stabilizing depth k={k} is outside 1..={max}")]
    StabilizingDepth { k: usize, max: usize },

    #[error("invalid morphism table: {0}")]
    InvalidTable(String),

    #[error("letter {0} has no image in the morphism table")]
    MissingImage(u32),

    #[error("input word contains a psi-kernel repetition: {0}")]
    PsiKernelInput(RepetitionReport),

    #[error("pipeline output is not threshold-free: {0}")]
    NotThresholdFree(RepetitionReport),

    #[error("word is not a member of Z_{m}")]
    NotZmMember { m: usize },

    #[error("enumeration limit exceeded: {needed} free slots, limit is {limit}")]
    LimitExceeded { needed: usize, limit: usize },

    #[error("search exceeded the depth cap of {0}; the language may be infinite")]
    DepthCapExceeded(usize),

    #[error("language does not declare whether it is prefix-closed")]
    UndeclaredClosure,

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}
