//! Result rows and their CSV / JSON-lines encodings.
//!
//! Both encodings start with one `#` comment line carrying the code version,
//! the config hash and the seed. Floats are written in shortest round-trip
//! form, so reading a file back reproduces every row exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model_id: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "L_A")]
    pub l_a: Option<usize>,
    pub lambda: Option<f64>,
    pub quantity: String,
    /// Empty only on error rows.
    pub value: Option<f64>,
    pub error_estimate: Option<f64>,
    /// Filled only when timing is requested.
    pub wall_time_ms: Option<f64>,
    pub code_version: String,
    /// `ok`, or the error message of a failed grid point.
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub code_version: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn new(config_sha256: String, seed: u64) -> Self {
        Self {
            code_version: CODE_VERSION.to_string(),
            config_sha256,
            seed,
        }
    }

    fn line(&self) -> String {
        format!(
            "# entsus {} config_sha256={} seed={}",
            self.code_version, self.config_sha256, self.seed
        )
    }

    fn parse(line: &str) -> Option<Self> {
        let mut parts = line.strip_prefix("# entsus ")?.split_whitespace();
        let code_version = parts.next()?.to_string();
        let config_sha256 = parts.next()?.strip_prefix("config_sha256=")?.to_string();
        let seed = parts.next()?.strip_prefix("seed=")?.parse().ok()?;
        Some(Self {
            code_version,
            config_sha256,
            seed,
        })
    }
}

pub fn write_rows<W: Write>(mut out: W, header: &Header, rows: &[ResultRow], format: Format) -> Result<()> {
    writeln!(out, "{}", header.line())?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for row in rows {
                w.serialize(row)?;
            }
            if rows.is_empty() {
                w.write_record([
                    "model_id",
                    "d",
                    "L",
                    "L_A",
                    "lambda",
                    "quantity",
                    "value",
                    "error_estimate",
                    "wall_time_ms",
                    "code_version",
                    "status",
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                writeln!(out)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads what [`write_rows`] wrote.
pub fn read_rows<R: BufRead>(mut input: R, format: Format) -> Result<(Header, Vec<ResultRow>)> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let header = Header::parse(first.trim_end())
        .ok_or_else(|| Error::Serialization(format!("missing or malformed header line `{}`", first.trim_end())))?;
    let rows = match format {
        Format::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRow>, _>>()?,
        Format::Json => {
            let mut rows = Vec::new();
            for line in input.lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    rows.push(serde_json::from_str(&line)?);
                }
            }
            rows
        }
    };
    Ok((header, rows))
}

/// Whitespace-separated two-column data, one `x y` pair per line.
pub fn write_two_column<W: Write>(mut out: W, comment: &str, points: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "# {comment}")?;
    for (x, y) in points {
        writeln!(out, "{x} {y}")?;
    }
    Ok(())
}
