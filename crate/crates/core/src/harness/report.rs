//! Result emission: the sweep CSV and the JSON run manifest.
//!
//! The CSV is the output contract — fixed header, fixed row order (SNR
//! points in grid order, methods in reporting order), fixed number
//! formatting — so a rerun with identical inputs emits identical bytes.

use super::config::SimConfig;
use super::sweep::SweepRecord;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// The exact header line of every sweep CSV.
pub const CSV_HEADER: &str =
    "snr_db,mode,mae_linear,mae_db,bound_linear,bound_db,delay_error_rate,trials";

/// SNR values print as decimals with up to six fractional digits, trailing
/// zeros trimmed (`-20`, `2.5`).
fn fmt_snr(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Linear quantities print in scientific notation with nine fractional
/// digits.
fn fmt_linear(v: f64) -> String {
    format!("{v:.9e}")
}

/// dB quantities print with four fractional digits.
fn fmt_db(v: f64) -> String {
    format!("{v:.4}")
}

/// Rates print with six fractional digits; an absent rate prints `nan`.
fn fmt_rate(v: Option<f64>) -> String {
    match v {
        Some(r) => format!("{r:.6}"),
        None => "nan".to_string(),
    }
}

/// Renders sweep records as the contractual CSV.
pub fn csv_string(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (1 + 4 * records.len()));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in records {
        for (mode, stats) in &record.modes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_snr(record.snr_db),
                mode.label(),
                fmt_linear(stats.mae_linear),
                fmt_db(stats.mae_db),
                fmt_linear(stats.bound_linear),
                fmt_db(stats.bound_db),
                fmt_rate(record.delay_error_rate),
                record.trials,
            ));
        }
    }
    out
}

/// Writes the contractual CSV to any sink.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut writer: W) -> io::Result<()> {
    writer.write_all(csv_string(records).as_bytes())
}

// ── Run manifest ────────────────────────────────────────────────────────────

/// Identity of the binary that produced a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    /// `git describe` of the build tree, or `unknown` outside a checkout.
    pub git_describe: String,
}

/// Everything needed to reproduce a run: tool identity, the command line,
/// and the full effective configuration (including the seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: ToolInfo,
    pub command: String,
    pub config: SimConfig,
    /// Extra run parameters for commands that take inputs beyond the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

/// Renders a manifest as pretty-printed JSON (trailing newline included).
pub fn manifest_json(manifest: &RunManifest) -> serde_json::Result<String> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    Ok(text)
}
