//! CSV tables and JSON fit summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EmError, Result};
use crate::lab::fit::DecayFit;

/// Table with `#` comment lines describing units and norms, a column header
/// and numeric or textual cells.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> CsvTable {
        CsvTable {
            notes: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(mut self, line: &str) -> CsvTable {
        self.notes.push(line.to_string());
        self
    }

    pub fn push(&mut self, cells: Vec<String>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(EmError::InvalidParameter(format!(
                "row has {} cells, table has {} columns",
                cells.len(),
                self.columns.len()
            )));
        }
        self.rows.push(cells);
        Ok(())
    }

    pub fn push_nums(&mut self, vals: &[f64]) -> Result<()> {
        self.push(vals.iter().map(|v| num(*v)).collect())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Round-trip representation of a float.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// A fitted slope with its prediction and verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitSummary {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl FitSummary {
    pub fn new(name: &str, fit: &DecayFit, predicted: f64, tolerance: f64) -> FitSummary {
        FitSummary {
            name: name.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.residual,
            points: fit.x.len(),
            predicted,
            tolerance,
            pass: fit.matches(predicted, tolerance),
        }
    }
}

/// Pretty JSON to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let mut t = CsvTable::new(&["a", "b"]).note("units: none");
        assert!(t.push_nums(&[1.0]).is_err());
        t.push_nums(&[1.0, 0.5]).unwrap();
        assert_eq!(t.render(), "# units: none\na,b\n1e0,5e-1\n");
    }

    #[test]
    fn summary_verdict() {
        let fit = DecayFit::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.5, 1.0, 1.5]).unwrap();
        assert!(FitSummary::new("x", &fit, 0.52, 0.05).pass);
        assert!(!FitSummary::new("x", &fit, 0.6, 0.05).pass);
    }
}
