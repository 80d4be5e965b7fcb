use std::io::Write;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Flat row table behind the CSV and text outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| CliError::Write(e.to_string());
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| cell_string(c, fmt17)))
                .map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Write(e.to_string()))
    }

    pub fn render_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| cell_string(c, |x| format!("{x:.10e}")))
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut s = line(self.headers.clone());
        s.push('\n');
        for row in &cells {
            s.push_str(&line(row.iter().map(String::as_str).collect()));
            s.push('\n');
        }
        s
    }
}

fn cell_string(c: &Cell, num: impl Fn(f64) -> String) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Num(x) => num(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Rewrites every non-integer number with 17 significant digits.
pub fn fixed_digits(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) if x.is_finite() => {
                Value::Number(serde_json::from_str::<Number>(&fmt17(x)).unwrap_or(n))
            }
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(fixed_digits).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, fixed_digits(v))).collect())
        }
        other => other,
    }
}

pub fn to_json(report: &impl Serialize) -> Result<String, CliError> {
    let v = serde_json::to_value(report).map_err(|e| CliError::Write(e.to_string()))?;
    serde_json::to_string_pretty(&fixed_digits(v)).map_err(|e| CliError::Write(e.to_string()))
}
