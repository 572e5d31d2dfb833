//! The `Sample` data panel: an n×p matrix of observations, the universal
//! input of every test in this crate.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{invalid, Result};

/// An n×p panel of real observations (rows are observations).
///
/// Construction validates that every entry is finite and that the panel is
/// large enough for the tests in this crate (n ≥ 4, p ≥ 2).
#[derive(Debug, Clone)]
pub struct Sample {
    values: Array2<f64>,
    variable_names: Option<Vec<String>>,
}

impl Sample {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        Self::with_names(values, None)
    }

    pub fn with_names(values: Array2<f64>, variable_names: Option<Vec<String>>) -> Result<Self> {
        let (n, p) = values.dim();
        if n < 4 {
            return Err(invalid(format!("need at least 4 observations, got {n}")));
        }
        if p < 2 {
            return Err(invalid(format!("need at least 2 variables, got {p}")));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("sample contains non-finite entries"));
        }
        if let Some(names) = &variable_names {
            if names.len() != p {
                return Err(invalid(format!(
                    "{} variable names for {} columns",
                    names.len(),
                    p
                )));
            }
        }
        Ok(Self {
            values,
            variable_names,
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn variable_names(&self) -> Option<&[String]> {
        self.variable_names.as_deref()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// A new panel with the given rows removed (order preserved).
    pub fn without_rows(&self, excluded: &[usize]) -> Result<Sample> {
        let n = self.n();
        for &i in excluded {
            if i >= n {
                return Err(invalid(format!("row index {i} out of range (n={n})")));
            }
        }
        let keep: Vec<usize> = (0..n).filter(|i| !excluded.contains(i)).collect();
        let mut out = Array2::zeros((keep.len(), self.p()));
        for (dst, &src) in keep.iter().enumerate() {
            out.row_mut(dst).assign(&self.values.row(src));
        }
        Sample::with_names(out, self.variable_names.clone())
    }

    /// Copy the panel without rows i and j, skipping re-validation (the
    /// entries were validated at construction).
    pub(crate) fn without_two_rows_unchecked(&self, i: usize, j: usize) -> Sample {
        let (n, p) = self.values.dim();
        let src = self.values.as_slice().expect("standard layout");
        let mut out = Vec::with_capacity((n - 2) * p);
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            out.extend_from_slice(&src[k * p..(k + 1) * p]);
        }
        Sample {
            values: Array2::from_shape_vec((n - 2, p), out).expect("shape preserved"),
            variable_names: self.variable_names.clone(),
        }
    }

    /// A new panel keeping only the selected rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Sample> {
        let n = self.n();
        let mut out = Array2::zeros((rows.len(), self.p()));
        for (dst, &src) in rows.iter().enumerate() {
            if src >= n {
                return Err(invalid(format!("row index {src} out of range (n={n})")));
            }
            out.row_mut(dst).assign(&self.values.row(src));
        }
        Sample::with_names(out, self.variable_names.clone())
    }

    /// Read a panel from CSV: first row variable names, remaining rows
    /// comma-separated decimal reals.
    pub fn from_csv(path: &Path) -> Result<Sample> {
        let (header, rows) = read_csv_matrix(path)?;
        let p = header.len();
        let n = rows.len();
        if n == 0 {
            return Err(invalid("csv has a header but no data rows"));
        }
        let mut values = Array2::zeros((n, p));
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[[i, j]] = v;
            }
        }
        Sample::with_names(values, Some(header))
    }

    /// Write the panel as CSV in the same format accepted by `from_csv`.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let names: Vec<String> = match &self.variable_names {
            Some(n) => n.clone(),
            None => (0..self.p()).map(|j| format!("v{j}")).collect(),
        };
        writeln!(out, "{}", names.join(","))?;
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Parse a simple CSV file into a header and rows of f64 values.
pub(crate) fn read_csv_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| invalid(format!("{}: empty file", path.display())))??;
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    let p = header.len();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(p);
        for (j, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                invalid(format!(
                    "{}: line {}, column {}: cannot parse '{}' as a real number",
                    path.display(),
                    lineno + 2,
                    j + 1,
                    field.trim()
                ))
            })?;
            row.push(v);
        }
        if row.len() != p {
            return Err(invalid(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                lineno + 2,
                row.len(),
                p
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_small_and_non_finite_panels() {
        let tiny = Array2::<f64>::zeros((3, 5));
        assert!(Sample::new(tiny).is_err());
        let thin = Array2::<f64>::zeros((10, 1));
        assert!(Sample::new(thin).is_err());
        let mut bad = Array2::<f64>::zeros((5, 3));
        bad[[2, 1]] = f64::NAN;
        assert!(Sample::new(bad).is_err());
    }

    #[test]
    fn without_rows_drops_the_right_observations() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0], [9.0, 10.0], [11.0, 12.0]];
        let s = Sample::new(x).unwrap();
        let r = s.without_rows(&[1, 2]).unwrap();
        assert_eq!(r.n(), 4);
        assert_eq!(r.row(1).to_vec(), vec![7.0, 8.0]);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panel.csv");
        let x = array![[1.0, 2.5], [3.0, -4.0], [0.125, 6.0], [7.0, 8.0]];
        let s = Sample::with_names(x, Some(vec!["a".into(), "b".into()])).unwrap();
        let mut buf = Vec::new();
        s.to_csv(&mut buf).unwrap();
        std::fs::write(&path, buf).unwrap();
        let back = Sample::from_csv(&path).unwrap();
        assert_eq!(back.variable_names().unwrap(), &["a", "b"]);
        assert_eq!(back.values(), s.values());
    }
}
