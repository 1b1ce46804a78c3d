//! Output envelope and locale-free CSV rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Significant digits of every real number written to CSV.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

/// Wrapper around every JSON payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope<T> {
    pub schema_version: String,
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub data: T,
}

impl<T: Serialize> OutputEnvelope<T> {
    pub fn new(command: &str, parameters: BTreeMap<String, Value>, data: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            parameters,
            data,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("payloads serialize to JSON");
        s.push('\n');
        s
    }
}

/// Formats `x` with at most 12 significant digits, `.` as decimal point and
/// no trailing zeros; scientific notation outside `[1e-5, 1e15)`.
pub fn csv_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let digits = CSV_SIGNIFICANT_DIGITS - 1;
    let sci = format!("{x:.digits$e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..15).contains(&exponent) {
        let decimals = (digits as i32 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Header plus rows, one `\n` per line.
pub struct CsvTable {
    out: String,
    width: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        let _ = writeln!(self.out, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.out
    }
}
