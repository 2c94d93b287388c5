//! Column tables, (alpha, b) grids and their CSV serialization.
//!
//! Numbers are written with 17 significant digits so that re-parsing a file
//! reproduces every f64 bit-exactly, and identical inputs always produce
//! byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use twistion::{Error, Result};

/// A column-oriented scan result; the first column is the scan variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Divides every non-leading column by the global maximum.
    /// Returns false (and leaves the table untouched) when all values are 0.
    pub fn normalize_peak(&mut self) -> bool {
        let peak = self
            .rows
            .iter()
            .flat_map(|r| r.iter().skip(1))
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if peak == 0.0 {
            return false;
        }
        for row in &mut self.rows {
            for v in row.iter_mut().skip(1) {
                *v /= peak;
            }
        }
        true
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                write!(out, "{}", format_value(*v)).unwrap();
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Strength over a (row angle, signed impact parameter) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    /// Name of the row variable (e.g. `alpha_rad`).
    pub row_label: String,
    pub row_values: Vec<f64>,
    /// Signed impact parameters labelling the columns.
    pub col_values: Vec<f64>,
    /// Row-major values, `rows x cols`.
    pub values: Vec<f64>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.col_values.len() + col]
    }

    pub fn normalize_peak(&mut self) -> bool {
        let peak = self.values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if peak == 0.0 {
            return false;
        }
        for v in &mut self.values {
            *v /= peak;
        }
        true
    }

    /// Reverses the column order (the signed-b axis).
    pub fn mirror_columns(&self) -> Grid {
        let ncol = self.col_values.len();
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.row_values.len() {
            for c in (0..ncol).rev() {
                values.push(self.get(r, c));
            }
        }
        Grid {
            row_label: self.row_label.clone(),
            row_values: self.row_values.clone(),
            col_values: self.col_values.iter().rev().map(|b| -b).collect(),
            values,
        }
    }

    /// CSV matrix: header row holds the b labels, each data row starts with
    /// its angle label.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.row_label);
        for b in &self.col_values {
            out.push(',');
            write!(out, "{}", format_value(*b)).unwrap();
        }
        out.push('\n');
        for (r, angle) in self.row_values.iter().enumerate() {
            write!(out, "{}", format_value(*angle)).unwrap();
            for c in 0..self.col_values.len() {
                out.push(',');
                write!(out, "{}", format_value(self.get(r, c))).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Plain-text heat map with one character per grid cell.
    pub fn to_ascii(&self) -> String {
        const RAMP: &[u8] = b" .:-=+*#%@";
        let peak = self.values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let mut out = String::new();
        for r in 0..self.row_values.len() {
            for c in 0..self.col_values.len() {
                let level = if peak == 0.0 {
                    0
                } else {
                    ((self.get(r, c).abs() / peak) * (RAMP.len() - 1) as f64).round() as usize
                };
                out.push(RAMP[level.min(RAMP.len() - 1)] as char);
            }
            out.push('\n');
        }
        out
    }
}

/// 17-significant-digit scientific notation; round-trips every f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    fs::write(path, table.to_csv())
        .map_err(|e| Error::Unsupported(format!("writing {}: {e}", path.display())))
}

pub fn emit_grid(grid: &Grid, path: &Path) -> Result<()> {
    fs::write(path, grid.to_csv())
        .map_err(|e| Error::Unsupported(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table {
            headers: vec!["b_lambda".into(), "strength_H".into()],
            rows: vec![],
        };
        assert_eq!(t.to_csv(), "b_lambda,strength_H\n");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let values = [1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 12345.678901234567, 0.0];
        for v in values {
            let parsed: f64 = format_value(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn one_by_one_grid_has_labels() {
        let g = Grid {
            row_label: "alpha_rad".into(),
            row_values: vec![0.5],
            col_values: vec![1.0],
            values: vec![0.25],
        };
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), 2);
        assert_eq!(lines[1].split(',').count(), 2);
    }

    #[test]
    fn peak_normalization() {
        let mut t = Table {
            headers: vec!["b".into(), "s".into()],
            rows: vec![vec![0.0, 2.0], vec![1.0, 0.5]],
        };
        assert!(t.normalize_peak());
        assert_eq!(t.rows[0][1], 1.0);
        let mut zero = Table {
            headers: vec!["b".into(), "s".into()],
            rows: vec![vec![0.0, 0.0]],
        };
        assert!(!zero.normalize_peak());
    }

    #[test]
    fn mirror_reverses_columns_and_signs() {
        let g = Grid {
            row_label: "alpha_rad".into(),
            row_values: vec![0.0],
            col_values: vec![-1.0, 0.0, 1.0],
            values: vec![1.0, 2.0, 3.0],
        };
        let m = g.mirror_columns();
        assert_eq!(m.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(m.col_values, vec![-1.0, 0.0, 1.0]);
    }
}
