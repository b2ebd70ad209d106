//! The bias report: row assembly, TSV/JSON encoding, and TSV parsing for
//! downstream commands. TSV numbers use the shortest representation that
//! round-trips the exact double, '.' decimal separator, '\n' line endings
//! and a fixed column order, so reports are byte-stable and every value is
//! recoverable bit-exactly.

use std::io::Write;

use serde::Serialize;

use crate::errors::CliError;

pub const REPORT_COLUMNS: [&str; 14] = [
    "context", "f_ac", "f_anc", "f_bc", "f_bnc", "bias", "se", "ci_low", "ci_high", "p", "q",
    "ratio_a", "ratio_b", "flags",
];

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub context: String,
    pub f_ac: u64,
    pub f_anc: u64,
    pub f_bc: u64,
    pub f_bnc: u64,
    pub bias: Option<f64>,
    pub se: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub ratio_a: Option<f64>,
    pub ratio_b: Option<f64>,
    pub flags: Vec<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_tsv<W: Write>(out: &mut W, rows: &[ReportRow]) -> std::io::Result<()> {
    writeln!(out, "{}", REPORT_COLUMNS.join("\t"))?;
    for r in rows {
        let flags = if r.flags.is_empty() {
            "-".to_string()
        } else {
            r.flags.join(",")
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.context,
            r.f_ac,
            r.f_anc,
            r.f_bc,
            r.f_bnc,
            opt(r.bias),
            opt(r.se),
            opt(r.ci_low),
            opt(r.ci_high),
            opt(r.p),
            opt(r.q),
            opt(r.ratio_a),
            opt(r.ratio_b),
            flags
        )?;
    }
    Ok(())
}

pub fn write_json<W: Write>(out: &mut W, rows: &[ReportRow]) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, rows)
        .map_err(|e| CliError::Internal(format!("failed to encode report: {e}")))?;
    writeln!(out)?;
    Ok(())
}

/// A parsed report row as read back from TSV; only the fields downstream
/// commands need.
#[derive(Debug, Clone)]
pub struct ParsedRow {
    pub context: String,
    pub bias: Option<f64>,
    pub se: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

pub fn parse_tsv(text: &str, path_label: &str) -> Result<Vec<ParsedRow>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{path_label}: empty report")))?;
    let columns: Vec<&str> = header.split('\t').collect();
    let col = |name: &str| -> Result<usize, CliError> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| CliError::Config(format!("{path_label}: missing column {name:?}")))
    };
    let (ci_ctx, ci_bias, ci_se, ci_lo, ci_hi) = (
        col("context")?,
        col("bias")?,
        col("se")?,
        col("ci_low")?,
        col("ci_high")?,
    );
    let mut rows = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(CliError::Config(format!(
                "{path_label}:{}: expected {} fields, found {}",
                no + 2,
                columns.len(),
                fields.len()
            )));
        }
        let num = |idx: usize| -> Result<Option<f64>, CliError> {
            let raw = fields[idx];
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| {
                CliError::Config(format!("{path_label}:{}: invalid number {raw:?}", no + 2))
            })
        };
        rows.push(ParsedRow {
            context: fields[ci_ctx].to_string(),
            bias: num(ci_bias)?,
            se: num(ci_se)?,
            ci_low: num(ci_lo)?,
            ci_high: num(ci_hi)?,
        });
    }
    Ok(rows)
}
