//! Plain-text columnar files.
//!
//! Every file starts with two header lines: the comma-separated column
//! names and the matching units, e.g.
//!
//! ```text
//! # time_s,value
//! # units: s,W
//! 0.0000000000000000e0,1.2500000000000000e-3
//! ```
//!
//! Values are written with 17 significant digits in Rust's
//! locale-independent float syntax, so files round-trip bit-exactly.
//! Dimensionless columns use the unit `1`. Files without a units line are
//! rejected.

use crate::error::{CliError, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const UNITS_PREFIX: &str = "units:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// Columns plus row-major numeric data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Builds a table from equal-length column vectors.
    pub fn from_columns(columns: Vec<Column>, data: &[&[f64]]) -> Self {
        assert_eq!(columns.len(), data.len());
        let n = data.first().map_or(0, |c| c.len());
        let rows = (0..n)
            .map(|i| data.iter().map(|c| c[i]).collect())
            .collect();
        Self { columns, rows }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let names: Vec<&str> = self.names();
        let units: Vec<&str> = self.columns.iter().map(|c| c.unit.as_str()).collect();
        writeln!(s, "# {}", names.join(",")).unwrap();
        writeln!(s, "# {UNITS_PREFIX} {}", units.join(",")).unwrap();
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                push_number(&mut s, *v);
            }
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses file contents; `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut names: Option<Vec<String>> = None;
        let mut columns: Option<Vec<Column>> = None;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                let Some(cols) = &names else {
                    names = Some(split_fields(comment));
                    continue;
                };
                if columns.is_none() {
                    let units = comment.strip_prefix(UNITS_PREFIX).ok_or_else(|| {
                        CliError::parse(
                            path,
                            line_no,
                            "expected a `# units:` line after the column header",
                        )
                    })?;
                    let units = split_fields(units);
                    if units.len() != cols.len() || units.iter().any(|u| u.is_empty()) {
                        return Err(CliError::parse(
                            path,
                            line_no,
                            format!("{} columns but {} units", cols.len(), units.len()),
                        ));
                    }
                    columns = Some(
                        cols.iter()
                            .zip(units)
                            .map(|(n, u)| Column {
                                name: n.clone(),
                                unit: u,
                            })
                            .collect(),
                    );
                }
                continue;
            }
            let cols = columns.as_ref().ok_or_else(|| {
                CliError::parse(
                    path,
                    line_no,
                    "data before the column and units header lines",
                )
            })?;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(CliError::parse(
                    path,
                    line_no,
                    format!("expected {} fields, found {}", cols.len(), fields.len()),
                ));
            }
            let mut row = Vec::with_capacity(fields.len());
            for f in fields {
                let v: f64 = f.parse().map_err(|_| {
                    CliError::parse(path, line_no, format!("`{f}` is not a number"))
                })?;
                if !v.is_finite() {
                    return Err(CliError::parse(
                        path,
                        line_no,
                        format!("`{f}` is not finite"),
                    ));
                }
                row.push(v);
            }
            rows.push(row);
        }
        let columns = columns.ok_or_else(|| {
            CliError::io(
                path,
                "missing `# column,...` and `# units: ...` header lines",
            )
        })?;
        Ok(Self { columns, rows })
    }

    /// Checks the column names and returns the units.
    pub fn expect_columns(&self, names: &[&str], path: &Path) -> Result<Vec<&str>> {
        if self.names() != names {
            return Err(CliError::io(
                path,
                format!(
                    "expected columns `{}`, found `{}`",
                    names.join(","),
                    self.names().join(",")
                ),
            ));
        }
        Ok(self.columns.iter().map(|c| c.unit.as_str()).collect())
    }
}

fn split_fields(s: &str) -> Vec<String> {
    s.split(',').map(|f| f.trim().to_string()).collect()
}

fn push_number(s: &mut String, v: f64) {
    if v == v.trunc() && v.abs() < 1e15 {
        // integral values (indices, counts) stay readable
        write!(s, "{}", v as i64).unwrap();
        if v == 0.0 && v.is_sign_negative() {
            s.insert(s.len() - 1, '-');
        }
    } else {
        write!(s, "{v:.16e}").unwrap();
    }
}

/// Writes a 2D raster: the first data row holds the column count followed
/// by the x axis, each further row holds y followed by the values at
/// (x_j, y). Directly readable as a gnuplot `nonuniform matrix`.
pub fn write_raster(
    path: &Path,
    axis: &[f64],
    values: &[f64],
    axis_unit: &str,
    value: (&str, &str),
) -> Result<()> {
    let n = axis.len();
    assert_eq!(values.len(), n * n);
    let mut s = String::new();
    writeln!(s, "# raster,y\\x,{}", value.0).unwrap();
    writeln!(s, "# {UNITS_PREFIX} 1,{axis_unit},{}", value.1).unwrap();
    push_number(&mut s, n as f64);
    for &x in axis {
        s.push(',');
        push_number(&mut s, x);
    }
    s.push('\n');
    for (i, &y) in axis.iter().enumerate() {
        push_number(&mut s, y);
        for v in &values[i * n..(i + 1) * n] {
            s.push(',');
            push_number(&mut s, *v);
        }
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

/// `key = value` lines, one per entry, in the given order.
pub fn write_key_values(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut s = String::new();
    for (k, v) in entries {
        writeln!(s, "{k} = {v}").unwrap();
    }
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

/// Formats a float with 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}
