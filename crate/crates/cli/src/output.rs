//! Tables rendered as CSV with `#` provenance lines, or as one JSON document.

use std::io::Write;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Na,
}

impl Cell {
    /// Non-finite reals other than `±inf` become NA.
    pub fn real(v: f64) -> Self {
        if v.is_nan() {
            Self::Na
        } else {
            Self::Real(v)
        }
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Self::Na, Self::real)
    }

    fn csv(&self) -> String {
        match self {
            Self::Real(v) => fmt_real(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
            Self::Na => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Real(v) if v.is_finite() => json!(v),
            Self::Real(v) => json!(fmt_real(*v)),
            Self::Int(v) => json!(v),
            Self::Text(s) => json!(s),
            Self::Bool(b) => json!(b),
            Self::Na => Value::Null,
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn join_reals(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: Option<u64>,
    /// Canonical description of every input that shapes the rows.
    pub grid: String,
}

impl Provenance {
    pub fn grid_sha256(&self) -> String {
        let digest = Sha256::digest(self.grid.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn lines(&self) -> Vec<String> {
        vec![
            format!("# syncphase {}", env!("CARGO_PKG_VERSION")),
            format!("# command: {}", self.command),
            format!("# seed: {}", self.seed.map_or("none".into(), |s| s.to_string())),
            format!("# grid_sha256: {}", self.grid_sha256()),
        ]
    }

    fn json(&self) -> Value {
        json!({
            "tool": format!("syncphase {}", env!("CARGO_PKG_VERSION")),
            "command": self.command,
            "seed": self.seed,
            "grid_sha256": self.grid_sha256(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub provenance: Provenance,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(provenance: Provenance, columns: &[&'static str]) -> Self {
        Self { provenance, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.provenance.lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(&c.csv())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(k, c)| (k.to_string(), c.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "provenance": self.provenance.json(),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            self.to_json()
        } else {
            self.to_csv()
        }
    }

    pub fn write_to(&self, path: Option<&std::path::Path>, as_json: bool) -> Result<(), CliError> {
        let text = self.render(as_json);
        match path {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display())))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
            }
        }
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
