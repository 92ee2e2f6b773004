//! CSV tables with documented columns, and the JSON run summary.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.8e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows under a header of `# name: description` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub notes: Vec<String>,
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, columns: &[(&'static str, &'static str)]) -> Self {
        Table { title: title.to_string(), notes: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.title);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| *n == name)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        writeln!(out, "# {}", self.title)?;
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        for (name, doc) in &self.columns {
            writeln!(out, "# {name}: {doc}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.0)).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Writes `result.csv`, `summary.json` and any extra tables into `dir`.
pub fn write_outputs(dir: &Path, table: &Table, extra: &[(&str, &Table)], summary: &Value) -> Result<(), CliError> {
    let io = |e: std::io::Error, p: &Path| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let path = dir.join("result.csv");
    fs::write(&path, table.to_csv_string()).map_err(|e| io(e, &path))?;
    for (name, t) in extra {
        let p = dir.join(name);
        fs::write(&p, t.to_csv_string()).map_err(|e| io(e, &p))?;
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(e, &path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_number_format() {
        let mut t = Table::new("demo", &[("g_rx", "receiver gain"), ("n", "count")]);
        t.push(vec![1.015.into(), 7u64.into()]);
        t.push(vec![(-2.5e-5).into(), 0u64.into()]);
        let s = t.to_csv_string();
        assert_eq!(s, "# demo\n# g_rx: receiver gain\n# n: count\ng_rx,n\n1.01500000e0,7\n-2.50000000e-5,0\n");
    }
}
