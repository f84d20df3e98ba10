//! CSV and legacy-VTK writers. Floats use Rust's shortest round-trip
//! formatting (switching to exponent form for very small or large values),
//! so identical runs produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn push_float(s: &mut String, v: f64) {
    // negative zero prints as 0
    let v = if v == 0.0 { 0.0 } else { v };
    write!(s, "{v:?}").unwrap();
}

/// CSV table built in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            push_float(&mut self.text, *v);
        }
        self.text.push('\n');
    }

    /// Row with a leading integer column.
    pub fn row_with_id(&mut self, id: usize, values: &[f64]) {
        assert_eq!(values.len() + 1, self.columns, "row width");
        write!(self.text, "{id}").unwrap();
        for v in values {
            self.text.push(',');
            push_float(&mut self.text, *v);
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.text)
    }
}

/// Reads a CSV written by [`Csv`] back into its header and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::Argument(format!("bad number `{x}` in {}", path.display())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

/// Legacy-ASCII VTK structured-points file with cell data on an `n x n` grid.
pub fn write_vtk(path: &Path, title: &str, n: usize, dx: f64, fields: &[(&str, &[f64])]) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET STRUCTURED_POINTS").unwrap();
    writeln!(s, "DIMENSIONS {} {} 1", n + 1, n + 1).unwrap();
    writeln!(s, "ORIGIN 0 0 0\nSPACING {dx} {dx} 1").unwrap();
    writeln!(s, "CELL_DATA {}", n * n).unwrap();
    for (name, data) in fields {
        assert_eq!(data.len(), n * n, "field {name}");
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in data.iter() {
            push_float(&mut s, *v);
            s.push('\n');
        }
    }
    write_text(path, &s)
}
