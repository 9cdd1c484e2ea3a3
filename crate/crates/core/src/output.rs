//! CSV artifacts and the PASS/FAIL summary.
//!
//! Every CSV starts with `#` comment lines naming each column and its unit,
//! followed by a header row.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Column {
        Column {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// Cell value; floats are written in a fixed exponent format for
/// bit-identical reruns.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::F(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Cell {
        Cell::I(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Cell {
        Cell::S(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:.12e}"),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[(&str, &str)]) -> Table {
        Table {
            title: title.into(),
            columns: columns.iter().map(|(n, u)| Column::new(*n, *u)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut file = fs::File::create(path)
            .map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?;
        writeln!(file, "# {}", self.title)?;
        for c in &self.columns {
            writeln!(file, "# {}: {}", c.name, c.unit)?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a CSV written by [`Table::write`]: header and rows, comments skipped.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub header: Vec<String>,
    pub criteria: Vec<Criterion>,
}

impl Summary {
    pub fn note(&mut self, line: impl Into<String>) {
        self.header.push(line.into());
    }

    pub fn check(&mut self, id: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.criteria.push(Criterion {
            id: id.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            s.push_str(&format!("# {h}\n"));
        }
        for c in &self.criteria {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {}: {}\n", c.id, c.detail));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("summary.txt");
        fs::write(&path, self.render())?;
        Ok(path)
    }
}
