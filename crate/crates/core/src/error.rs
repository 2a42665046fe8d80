// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

use thiserror::Error;

/// Errors raised by sketch construction, updates and queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("item {item} is outside the domain [0, {n})")]
    ItemOutOfRange { item: u64, n: u64 },
    #[error("update delta must be nonzero")]
    ZeroDelta,
    #[error("counter overflow")]
    Overflow,
    #[error("sketch parameters or primes do not match")]
    ParamMismatch,
    #[error("collision set is undefined for identical items ({0})")]
    SameItem(u64),
    #[error("invalid range [{l}, {r}] for domain of size {n}")]
    InvalidRange { l: u64, r: u64, n: u64 },
    #[error("estimator under-provisioned: {0}")]
    UnderProvisioned(String),
    #[error("stream mass must be positive, got {0}")]
    NonPositiveMass(i128),
    #[error("strict model violated: item {item} would reach frequency {freq}")]
    StrictViolation { item: u64, freq: i128 },
    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),
    #[error("malformed sketch encoding: {0}")]
    Decode(String),
    #[error("reconstruction failed at level {level}: {detail}")]
    Reconstruction { level: usize, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
