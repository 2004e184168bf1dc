//! CSV emission and parsing for trajectories.
//!
//! Numbers use nine significant digits in exponent notation, lines end in
//! `\n`, and `#` lines before the header carry provenance.

use bipartite_lindblad::Trajectory;

use crate::error::{CliError, Result};

pub const TOOL_NAME: &str = "bipartite";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Nine significant digits. Negative zero prints as zero.
pub fn format_value(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

pub fn render_csv(traj: &Trajectory, comments: &[(String, String)]) -> String {
    let mut out = format!("# {TOOL_NAME} {TOOL_VERSION}\n");
    for (k, v) in comments {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::with_capacity(16 * (traj.names.len() + 1) * (traj.len() + 1)));
    let header = std::iter::once("t").chain(traj.names.iter().map(String::as_str));
    w.write_record(header).expect("in-memory write");
    for (i, &t) in traj.times.iter().enumerate() {
        let row = std::iter::once(format_value(t)).chain(traj.values.iter().map(|s| format_value(s[i])));
        w.write_record(row).expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(std::str::from_utf8(&body).expect("ascii output"));
    out
}

/// A CSV file read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub comments: Vec<String>,
    /// Column names after `t`.
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ParsedCsv {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
    }

    /// Value of a `# key = value` comment line.
    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let bad = |msg: String| CliError::Config(format!("csv: {msg}"));
    let comments = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|c| c.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.get(0) != Some("t") {
        return Err(bad("header must start with `t`".into()));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut values = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let mut fields = record.iter().map(|f| f.parse::<f64>().map_err(|_| bad(format!("`{f}` is not a number"))));
        times.push(fields.next().ok_or_else(|| bad("empty row".into()))??);
        for col in values.iter_mut() {
            col.push(fields.next().ok_or_else(|| bad("short row".into()))??);
        }
    }
    Ok(ParsedCsv {
        comments,
        names,
        times,
        values,
    })
}
