//! Serialization helpers shared by the subcommands. Both formats are
//! written by hand so that every number carries 17 significant digits and
//! identical inputs produce byte-identical bytes.

use std::fmt::Write as _;

/// Full-precision scientific notation; the one float formatter in the binary.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quote a CSV field only when it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// JSON string literal, escaped.
pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Numeric table with a fixed header, rendered as CSV or as a columns/rows
/// JSON object.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let cells: Vec<String> = row.iter().map(|v| fmt_full(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let cols: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\n  \"columns\": [{}],\n  \"rows\": [",
            cols.join(", ")
        );
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| fmt_full(*v)).collect();
            let sep = if i + 1 < self.rows.len() { "," } else { "" };
            let _ = write!(out, "\n    [{}]{}", cells.join(", "), sep);
        }
        out.push_str("\n  ]\n}\n");
        out
    }
}
