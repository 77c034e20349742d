//! Output formats.
//!
//! Every command writes one JSON report (schema version [`SCHEMA_VERSION`]):
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "tool": "evident <version>",
//!   "command": "analyze" | "simulate" | "ratio-sweep" | "security" | "lp" | "profile",
//!   "config":   { "command": ..., every option of the command, including "seed" },
//!   "warnings": [string],
//!   "result":   { command specific, see below }
//! }
//! ```
//!
//! `result` by command:
//!
//! * analyze: `n`, `response`, `reference` and `alternative` (`covariates`,
//!   `params`), `penalty`, `penalty_term`, `observed_evidence`,
//!   `observed_category`, and `kinds`, one entry per interval kind with
//!   `kind`, `point`, `evidence_category`, `replicates`, `rejected`,
//!   `point_mass` and `intervals` (`level`, `lower`, `upper`, `length`,
//!   `security_category`).
//! * simulate: `cases`, each with the `case` definition and its `coverage`
//!   (`global_target`, `rejected` and `rows` of `level`, `kind`,
//!   `coverage`, `se`, `mean_length`, `sd_length`).
//! * ratio-sweep: `case`, `level` and `rows` (`n`, `ratios`, `median`, `q25`, `q75`).
//! * security: `level` and `presets`, each with `case` and `table`
//!   (`true_sign`, `divergence_difference`, `rows` of `kind`, `trials`,
//!   `proportions`, `reliability`).
//! * lp: `estimate`, `capture_prob` and `schemes` (`scheme`, `estimates`,
//!   `discarded`, `mean`, `point_mass`, `intervals`).
//! * profile: `estimate`, `se`, `rows` (`gamma`, `profile`, `adjusted`,
//!   `bias_corrected`) and, for the normal family, `effective_divisor`.
//!
//! Numbers are written in their shortest exactly round-tripping form, so a
//! replayed report is byte-identical to the original. `--csv` writes the
//! command's table (one row per case, level and kind for `simulate`);
//! `lp --grid-csv` also writes the smoothed densities.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub command: String,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub result: Value,
}

impl Report {
    pub fn new(config: RunConfig, warnings: Vec<String>, result: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: format!("evident {}", env!("CARGO_PKG_VERSION")),
            command: config.name().to_owned(),
            config,
            warnings,
            result,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
