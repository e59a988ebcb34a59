//! Output files: a `#`-prefixed JSON header followed by a CSV table.
//!
//! The header records the tool version, the full run configuration, the
//! random stream scheme (for disorder runs) and scalar results. Feeding the
//! header back through `replay` regenerates the file byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const TOOL: &str = "pstchain";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub algorithm: String,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub run: RunConfig,
    pub rng: Option<RngInfo>,
    pub results: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    tool: String,
    version: String,
    command: String,
    config: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<RngInfo>,
    #[serde(default)]
    results: Value,
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

impl Artifact {
    pub fn write_to(&self, out: &mut dyn Write) -> Result<()> {
        let tagged = serde_json::to_value(&self.run).expect("run config serializes");
        let header = Header {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: self.run.name().into(),
            config: tagged["config"].clone(),
            rng: self.rng.clone(),
            results: self.results.clone(),
        };
        let text = serde_json::to_string_pretty(&header).expect("header serializes");
        let stdout_err = |e| CliError::io("<output>", e);
        for line in text.lines() {
            writeln!(out, "# {line}").map_err(stdout_err)?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush().map_err(stdout_err)?;
        Ok(())
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => {
                let mut buf = Vec::new();
                self.write_to(&mut buf)?;
                fs::write(p, buf).map_err(|e| CliError::io(p, e))
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                self.write_to(&mut lock)
            }
        }
    }
}

/// Recovers the run configuration from the header of an output file.
pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::Header {
        path: path.to_path_buf(),
        reason,
    };
    let json: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").unwrap_or(&l[1..]))
        .collect::<Vec<_>>()
        .join("\n");
    if json.is_empty() {
        return Err(bad("no `#` header lines".into()));
    }
    let header: Header = serde_json::from_str(&json).map_err(|e| bad(e.to_string()))?;
    if header.tool != TOOL {
        return Err(bad(format!("written by `{}`, not `{TOOL}`", header.tool)));
    }
    if header.version != VERSION {
        eprintln!(
            "warning: {} was written by {TOOL} {}; replaying with {VERSION} may not be bit-identical",
            path.display(),
            header.version
        );
    }
    serde_json::from_value(json!({ "command": header.command, "config": header.config }))
        .map_err(|e| bad(e.to_string()))
}
