//! Row-oriented tables rendered as CSV or JSON lines.
//!
//! Every floating-point value is printed with nine significant digits so
//! diffs between engines and reruns stay meaningful.

use crate::config::Format;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

/// Nine-significant-digit float rendering shared by every format.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f(*x),
            Cell::U(n) => n.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::F(x) => fmt_f(*x),
            Cell::U(n) => n.to_string(),
            Cell::S(s) => format!("\"{}\"", json_escape(s)),
            Cell::Empty => "null".to_string(),
        }
    }
}

/// A fixed-column table of results.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Jsonl => {
                let mut out = String::new();
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| format!("\"{}\": {}", c, cell.json()))
                        .collect();
                    out.push_str(&format!("{{{}}}\n", fields.join(", ")));
                }
                out
            }
        }
    }
}
