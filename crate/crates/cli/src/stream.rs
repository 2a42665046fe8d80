// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Text stream files:
//!
//! ```text
//! N 16 MODEL strict
//! # comment
//! 3 5
//! 8 2
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crprecis::{FrequencyOracle, ModelTag, StreamUpdate};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamFile {
    pub n: u64,
    pub model: ModelTag,
    pub updates: Vec<StreamUpdate>,
}

fn model_name(model: ModelTag) -> &'static str {
    match model {
        ModelTag::Strict => "strict",
        ModelTag::General => "general",
    }
}

impl StreamFile {
    /// Parses and validates a stream, replaying it into an exact oracle.
    pub fn parse(text: &str) -> Result<(Self, FrequencyOracle), CliError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| CliError::parse(1, "missing header `N <size> MODEL <strict|general>`"))?;
        let (n, model) = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["N", size, "MODEL", model] => {
                let n: u64 = size
                    .parse()
                    .map_err(|_| CliError::parse(hline, format!("bad domain size `{size}`")))?;
                let model = match model {
                    "strict" => ModelTag::Strict,
                    "general" => ModelTag::General,
                    other => return Err(CliError::parse(hline, format!("unknown model `{other}`"))),
                };
                (n, model)
            }
            _ => return Err(CliError::parse(hline, "expected `N <size> MODEL <strict|general>`")),
        };
        if n < 2 {
            return Err(CliError::parse(hline, "domain size must be at least 2"));
        }
        let mut oracle = FrequencyOracle::new(n, model);
        let mut updates = Vec::new();
        for (line, body) in lines {
            let (item, delta) = match body.split_whitespace().collect::<Vec<_>>()[..] {
                [item, delta] => (item, delta),
                _ => return Err(CliError::parse(line, "expected `<item> <delta>`")),
            };
            let item: u64 = item
                .parse()
                .map_err(|_| CliError::parse(line, format!("bad item `{item}`")))?;
            let delta: i64 = delta
                .parse()
                .map_err(|_| CliError::parse(line, format!("bad delta `{delta}`")))?;
            let u = StreamUpdate::new(item, delta).map_err(|e| CliError::parse(line, e.to_string()))?;
            oracle.apply(u).map_err(|e| CliError::parse(line, e.to_string()))?;
            updates.push(u);
        }
        Ok((Self { n, model, updates }, oracle))
    }

    pub fn ingest(path: &Path) -> Result<(Self, FrequencyOracle), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse { line, reason } => CliError::Parse {
                line,
                reason: format!("{}: {reason}", path.display()),
            },
            other => other,
        })
    }

    pub fn render(&self, comments: &[String]) -> String {
        let mut out = format!("N {} MODEL {}\n", self.n, model_name(self.model));
        for c in comments {
            writeln!(out, "# {c}").unwrap();
        }
        for u in &self.updates {
            writeln!(out, "{} {}", u.item(), u.delta()).unwrap();
        }
        out
    }
}
