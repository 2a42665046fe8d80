// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Tab-separated sketch-versus-oracle reports.

use crate::CliError;

pub const HEADER: &str = "query\texact\testimate\tabs_error\tbound\tok";

/// One query; numeric columns are preformatted (integers, `a/b` rationals
/// or decimals).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub query: String,
    pub exact: String,
    pub estimate: String,
    pub abs_error: String,
    pub bound: String,
    pub ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErrorReport {
    /// `# `-prefixed lines printed above the table, e.g. resolved parameters.
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

impl ErrorReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn extend(&mut self, other: ErrorReport) {
        self.notes.extend(other.notes);
        self.rows.extend(other.rows);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            out.push_str("# ");
            out.push_str(note);
            out.push('\n');
        }
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.rows {
            let ok = if r.ok { "true" } else { "false" };
            out.push_str(&[&r.query, &r.exact, &r.estimate, &r.abs_error, &r.bound, ok].join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut report = ErrorReport::default();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(note) = line.strip_prefix("# ") {
                report.notes.push(note.to_string());
                continue;
            }
            if !seen_header {
                if line != HEADER {
                    return Err(CliError::parse(i + 1, "expected report header"));
                }
                seen_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [query, exact, estimate, abs_error, bound, ok] = cols[..] else {
                return Err(CliError::parse(i + 1, format!("expected 6 columns, got {}", cols.len())));
            };
            let ok = match ok {
                "true" => true,
                "false" => false,
                other => return Err(CliError::parse(i + 1, format!("bad ok flag `{other}`"))),
            };
            report.rows.push(Row {
                query: query.into(),
                exact: exact.into(),
                estimate: estimate.into(),
                abs_error: abs_error.into(),
                bound: bound.into(),
                ok,
            });
        }
        if !seen_header {
            return Err(CliError::parse(text.lines().count().max(1), "missing report header"));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(ErrorReport::default().render(), format!("{HEADER}\n"));
        assert!(ErrorReport::default().all_ok());
    }

    #[test]
    fn row_round_trips() {
        let report = ErrorReport {
            notes: vec!["k=5 t=2 N=16".into()],
            rows: vec![Row {
                query: "point 3".into(),
                exact: "5".into(),
                estimate: "5".into(),
                abs_error: "0".into(),
                bound: "3/2".into(),
                ok: true,
            }],
        };
        assert_eq!(ErrorReport::parse(&report.render()).unwrap(), report);
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(ErrorReport::parse("").is_err());
        assert!(ErrorReport::parse(&format!("{HEADER}\na\tb\n")).is_err());
        assert!(ErrorReport::parse(&format!("{HEADER}\na\t1\t1\t0\t0\tyes\n")).is_err());
    }
}
