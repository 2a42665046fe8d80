// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Batch harness: read stream files, build sketches, answer queries and
//! compare every answer with the exact oracle.

pub mod query;
pub mod report;
pub mod stream;

pub use query::{adversarial_stream, reconstruction_report, run_query, Command, Inputs, Options};
pub use report::{ErrorReport, Row};
pub use stream::StreamFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sketch(#[from] crprecis::Error),
}

impl CliError {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        CliError::Parse { line, reason: reason.into() }
    }
}
