//! Tabulated class groups and Ш[2] for family primes, and the check against
//! freshly computed values.

use std::path::Path;

use cubesum::cubicfield::{class_group_with, ClassGroupOptions, PureCubicOrder};
use cubesum::descent::sha2_report;
use cubesum::Effort;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;

/// The bundled transcription.
pub const EMBEDDED_ROWS: &str = include_str!("../../../data/appendix_b.tsv");

const HEADER: [&str; 4] = ["table", "p", "class_group", "sha2"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixRow {
    /// 1-based line in the source text.
    pub line: usize,
    /// Residue class mod 9 of the table the row was printed in.
    pub table: u8,
    pub p: u64,
    pub class_group: Vec<u64>,
    pub sha2: Vec<u64>,
}

impl AppendixRow {
    pub fn sha2_dim(&self) -> u32 {
        self.sha2.iter().filter(|d| *d % 2 == 0).count() as u32
    }
}

fn parse_group(field: &str) -> Result<Vec<u64>, String> {
    let field = field.trim();
    if field == "1" || field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(',')
        .map(|d| d.trim().parse::<u64>().map_err(|_| format!("bad invariant factor {d:?}")))
        .collect()
}

/// Parses tab-separated rows. `#` lines and blank lines are skipped; the
/// first other line must be the header.
pub fn parse_rows(text: &str) -> Result<Vec<AppendixRow>, CliError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim_end_matches('\r');
        if s.trim().is_empty() || s.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = s.split('\t').collect();
        let bad = |msg: String| CliError::Usage(format!("appendix line {line}: {msg}: {s:?}"));
        if !seen_header {
            if fields != HEADER {
                return Err(bad(format!("expected header {}", HEADER.join("\\t"))));
            }
            seen_header = true;
            continue;
        }
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let table = match fields[0].trim() {
            "2" => 2,
            "5" => 5,
            t => return Err(bad(format!("table must be 2 or 5, not {t:?}"))),
        };
        let p = fields[1].trim().parse::<u64>().map_err(|_| bad("bad prime".into()))?;
        let class_group = parse_group(fields[2]).map_err(bad)?;
        let sha2 = parse_group(fields[3]).map_err(bad)?;
        rows.push(AppendixRow { line, table, p, class_group, sha2 });
    }
    if !seen_header {
        return Err(CliError::Usage("appendix file has no header".into()));
    }
    Ok(rows)
}

pub fn load_rows(path: Option<&Path>) -> Result<Vec<AppendixRow>, CliError> {
    match path {
        None => parse_rows(EMBEDDED_ROWS),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_rows(&text)
        }
    }
}

/// Embedded row for `p`, if tabulated.
pub fn embedded_row(p: u64) -> Option<AppendixRow> {
    parse_rows(EMBEDDED_ROWS).ok()?.into_iter().find(|r| r.p == p)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RowCheck {
    pub p: u64,
    pub table: u8,
    /// Actual `p mod 9`.
    pub residue: u8,
    /// Whether the table label matches the residue; informational only.
    pub label_consistent: bool,
    pub expected_class_group: String,
    pub computed_class_group: String,
    pub expected_sha2_dim: u32,
    pub computed_sha2_dim: u32,
    pub certificate: String,
    pub class_group_match: bool,
    pub sha2_match: bool,
}

impl RowCheck {
    pub fn matches(&self) -> bool {
        self.class_group_match && self.sha2_match
    }
}

fn group_string(d: &[u64]) -> String {
    if d.is_empty() {
        "1".to_string()
    } else {
        d.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }
}

pub fn check_row(row: &AppendixRow, effort: Effort, seed: u64) -> Result<RowCheck, CliError> {
    let order = PureCubicOrder::new(row.p)?;
    let opts = ClassGroupOptions { effort, seed, certificate: None };
    let cg = class_group_with(&order, &opts)?.structure;
    let selmer = sha2_report(row.p, &cg)?;
    let residue = (row.p % 9) as u8;
    Ok(RowCheck {
        p: row.p,
        table: row.table,
        residue,
        label_consistent: residue == row.table,
        expected_class_group: group_string(&row.class_group),
        computed_class_group: group_string(&cg.elementary_divisors),
        expected_sha2_dim: row.sha2_dim(),
        computed_sha2_dim: selmer.sha2_dim,
        certificate: cg.certificate.as_str().to_string(),
        class_group_match: cg.elementary_divisors == row.class_group,
        sha2_match: selmer.sha2_dim == row.sha2_dim(),
    })
}

/// Checks every row with `p ≤ max_p`, in row order.
pub fn verify_rows(rows: &[AppendixRow], max_p: u64, effort: Effort, seed: u64) -> Result<Vec<RowCheck>, CliError> {
    rows.par_iter().filter(|r| r.p <= max_p).map(|r| check_row(r, effort, seed)).collect()
}

pub fn write_csv(path: &Path, checks: &[RowCheck]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    for c in checks {
        w.serialize(c).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
