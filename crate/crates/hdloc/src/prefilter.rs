//! Ljung–Box prefiltering for return panels: drop series showing serial
//! correlation before running the location tests.

use std::path::Path;

use ndarray::{Array1, Array2};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::sample::{read_csv_matrix, Sample};

/// A T×p panel of return series with column labels and an optional
/// risk-free series for excess-return construction.
#[derive(Debug, Clone)]
pub struct SeriesPanel {
    values: Array2<f64>,
    labels: Vec<String>,
    risk_free: Option<Array1<f64>>,
}

impl SeriesPanel {
    pub fn new(
        values: Array2<f64>,
        labels: Vec<String>,
        risk_free: Option<Array1<f64>>,
    ) -> Result<Self> {
        let (t, p) = values.dim();
        if t == 0 || p == 0 {
            return Err(invalid("series panel must be non-empty"));
        }
        if labels.len() != p {
            return Err(invalid(format!("{} labels for {p} series", labels.len())));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("series panel contains non-finite entries"));
        }
        if let Some(rf) = &risk_free {
            if rf.len() != t {
                return Err(invalid("risk-free series length must match the panel"));
            }
            if !rf.iter().all(|v| v.is_finite()) {
                return Err(invalid("risk-free series contains non-finite entries"));
            }
        }
        Ok(SeriesPanel {
            values,
            labels,
            risk_free,
        })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let (labels, rows) = read_csv_matrix(path)?;
        let t = rows.len();
        if t == 0 {
            return Err(invalid("series panel csv has no data rows"));
        }
        let p = labels.len();
        let mut values = Array2::zeros((t, p));
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[[i, j]] = v;
            }
        }
        SeriesPanel::new(values, labels, None)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn series_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn with_risk_free(mut self, rf: Array1<f64>) -> Result<Self> {
        if rf.len() != self.rows() {
            return Err(invalid("risk-free series length must match the panel"));
        }
        self.risk_free = Some(rf);
        Ok(self)
    }

    /// Excess returns X_ij = R_ij − rf_i; without a risk-free series the
    /// panel is returned unchanged.
    pub fn excess_returns(&self) -> SeriesPanel {
        match &self.risk_free {
            None => self.clone(),
            Some(rf) => {
                let mut values = self.values.clone();
                for (i, mut row) in values.rows_mut().into_iter().enumerate() {
                    for v in row.iter_mut() {
                        *v -= rf[i];
                    }
                }
                SeriesPanel {
                    values,
                    labels: self.labels.clone(),
                    risk_free: None,
                }
            }
        }
    }

    /// View the panel as a test-ready sample (rows are observations).
    pub fn to_sample(&self) -> Result<Sample> {
        Sample::with_names(self.values.clone(), Some(self.labels.clone()))
    }
}

/// Ljung–Box portmanteau statistic Q = T(T+2) Σ_{k≤h} ρ̂_k²/(T−k) with its
/// χ²_h upper-tail p-value.
pub fn ljung_box(series: &[f64], lags: usize) -> Result<(f64, f64)> {
    let t = series.len();
    if lags < 1 {
        return Err(invalid("ljung-box needs at least one lag"));
    }
    if t <= lags {
        return Err(invalid(format!(
            "ljung-box needs more observations than lags (T={t}, lags={lags})"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(invalid("series contains non-finite values"));
    }
    let t_f = t as f64;
    let mean = series.iter().sum::<f64>() / t_f;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateSeries(
            "constant series has no autocorrelation structure".to_string(),
        ));
    }
    let mut q = 0.0;
    for k in 1..=lags {
        let mut num = 0.0;
        for i in k..t {
            num += centered[i] * centered[i - k];
        }
        let rho = num / denom;
        q += rho * rho / (t - k) as f64;
    }
    q *= t_f * (t_f + 2.0);
    let chi = ChiSquared::new(lags as f64).expect("positive dof");
    let p_value = 1.0 - chi.cdf(q);
    Ok((q, p_value))
}

/// Outcome of prefiltering one panel.
#[derive(Debug, Clone)]
pub struct PrefilterReport {
    /// (label, p-value) of every retained column.
    pub retained: Vec<(String, f64)>,
    /// (label, p-value) of columns dropped by the test; a degenerate
    /// column is reported with `None`.
    pub dropped: Vec<(String, Option<f64>)>,
    pub lags: usize,
    pub alpha: f64,
}

/// Keep the columns whose Ljung–Box p-value is at least `alpha`; drop the
/// rest. Degenerate (constant) columns are dropped with a flag rather than
/// failing the whole panel.
pub fn prefilter_panel(
    panel: &SeriesPanel,
    lags: usize,
    alpha: f64,
) -> Result<(SeriesPanel, PrefilterReport)> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("prefilter level must be in [0,1), got {alpha}")));
    }
    let mut retained_idx = Vec::new();
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for j in 0..panel.series_count() {
        let col: Vec<f64> = panel.values.column(j).to_vec();
        match ljung_box(&col, lags) {
            Ok((_, p)) => {
                if p >= alpha {
                    retained_idx.push(j);
                    retained.push((panel.labels[j].clone(), p));
                } else {
                    dropped.push((panel.labels[j].clone(), Some(p)));
                }
            }
            Err(Error::DegenerateSeries(_)) => {
                dropped.push((panel.labels[j].clone(), None));
            }
            Err(e) => return Err(e),
        }
    }
    if retained_idx.is_empty() {
        return Err(Error::DegenerateSeries(
            "prefilter dropped every column".to_string(),
        ));
    }
    let mut values = Array2::zeros((panel.rows(), retained_idx.len()));
    for (dst, &src) in retained_idx.iter().enumerate() {
        values.column_mut(dst).assign(&panel.values.column(src));
    }
    let labels: Vec<String> = retained_idx
        .iter()
        .map(|&j| panel.labels[j].clone())
        .collect();
    let filtered = SeriesPanel::new(values, labels, panel.risk_free.clone())?;
    Ok((
        filtered,
        PrefilterReport {
            retained,
            dropped,
            lags,
            alpha,
        },
    ))
}
