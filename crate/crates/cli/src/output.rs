//! Tables and their CSV / JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

/// Bumped whenever the JSON layout changes.
pub const SCHEMA: &str = "rdna.v1";

const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rounds to 12 significant digits and renders like C's `%.12g`: plain
/// decimals for moderate exponents, `1.5e-30` style otherwise.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// JSON number rounded like the CSV; non-finite values become strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        let r: f64 = fmt_sig(v).parse().expect("formatted float parses");
        json!(r)
    } else {
        json!(fmt_sig(v))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn json_rows(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// A point on a rate-distortion curve with free-form annotations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdPoint {
    #[serde(rename = "D")]
    pub d: f64,
    pub rate: f64,
    pub label: String,
    #[serde(skip)]
    pub meta: Vec<(String, Cell)>,
}

impl RdPoint {
    pub fn new(label: impl Into<String>, d: f64, rate: f64) -> Self {
        debug_assert!(d >= 0.0 && rate >= 0.0);
        Self { d, rate, label: label.into(), meta: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }
}

/// Lays points out as `label, D, rate, meta...`; every point must carry the
/// same meta keys in the same order.
pub fn rd_table(points: &[RdPoint]) -> Table {
    let keys: Vec<String> = points.first().map(|p| p.meta.iter().map(|(k, _)| k.clone()).collect()).unwrap_or_default();
    let mut table = Table::new(["label", "D", "rate"].into_iter().map(String::from).chain(keys.iter().cloned()));
    for p in points {
        debug_assert!(p.meta.iter().map(|(k, _)| k).eq(keys.iter()));
        let mut row = vec![Cell::Text(p.label.clone()), Cell::Num(p.d), Cell::Num(p.rate)];
        row.extend(p.meta.iter().map(|(_, v)| v.clone()));
        table.push(row);
    }
    table
}

/// Everything a command produces. `summary` only appears in JSON.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub table: Table,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, table: Table) -> Self {
        Self { command: command.to_string(), params: BTreeMap::new(), seed: None, table, summary: Map::new() }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let doc = json!({
                    "schema": SCHEMA,
                    "command": self.command,
                    "seed": self.seed,
                    "params": self.params,
                    "columns": self.table.columns,
                    "rows": self.table.json_rows(),
                    "summary": self.summary,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}
