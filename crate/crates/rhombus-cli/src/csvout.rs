//! Deterministic CSV assembly. Values are formatted with Rust's shortest
//! round-trip float notation, which is locale-independent and stable across
//! runs, so identical data always serializes to identical bytes.

use std::fmt::Write as _;

pub struct Table {
    header: Vec<String>,
    body: String,
    columns: usize,
}

impl Table {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        let header: Vec<String> = header.into_iter().map(Into::into).collect();
        let columns = header.len();
        Table { header, body: String::new(), columns }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match cell {
                Cell::Int(v) => write!(self.body, "{v}").unwrap(),
                Cell::Float(v) => write!(self.body, "{v}").unwrap(),
            }
        }
        self.body.push('\n');
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        out.push_str(&self.body);
        out
    }
}

pub enum Cell {
    Int(u64),
    Float(f64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
