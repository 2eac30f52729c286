//! CSV and JSON writers with a fixed, platform-independent number format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Decimal rendering with 17 significant digits.
///
/// Values with a decimal exponent in `-5..17` are written positionally,
/// anything else in `d.ddddddddddddddddde±x` form.
pub fn number(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{x:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

/// A CSV cell.
pub enum Cell<'a> {
    Num(f64),
    Int(usize),
    Text(&'a str),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => (*s).to_owned(),
        }
    }
}

pub struct Csv {
    body: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            body: header.join(",") + "\n",
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        assert_eq!(cells.len(), self.columns, "row width must match the header");
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.body, "{}", line.join(","));
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.body)
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value).expect("serializable value") + "\n";
    write_file(dir, name, &text)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
