use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    Resource { needed: u64, budget: u64 },

    #[error("search space too large: {0}")]
    SearchTooLarge(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("table kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("table limits differ: {0} vs {1}")]
    LimitMismatch(u64, u64),

    #[error("bad magic bytes in table file")]
    BadMagic,

    #[error("unsupported table version {0}")]
    UnsupportedVersion(u8),

    #[error("corrupt table header: {0}")]
    BadHeader(String),

    #[error("table file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
