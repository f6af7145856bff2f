//! Error tables and their CSV/JSON output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::GraphInterface;
use crate::benchmark::resample;

use super::config::OutputFormat;

/// How the error column is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// discrete L² norm over one period
    L2,
    /// absolute error of a radius
    RadiusAbs,
    /// absolute error of the enclosed area
    AreaAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n_steps: u64,
    pub error: f64,
    /// `None` on the first row
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub experiment: String,
    pub kernel: String,
    pub label: String,
    pub norm: Norm,
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<ErrorRow>,
}

/// `log(e_prev/e)/log(n/n_prev)`.
pub fn observed_order(prev: (u64, f64), cur: (u64, f64)) -> f64 {
    (prev.1 / cur.1).ln() / (cur.0 as f64 / prev.0 as f64).ln()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs two or more positive points".into()));
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    Ok(sxy / sxx)
}

/// `√((L/n) Σ (a_i − b_i)²)`; `b` is resampled onto the nodes of `a` if needed.
pub fn l2_error(a: &GraphInterface, b: &GraphInterface) -> Result<f64> {
    if a.period() != b.period() {
        return Err(Error::InvalidArgument(format!(
            "period mismatch: {} vs {}",
            a.period(),
            b.period()
        )));
    }
    let b = if b.len() == a.len() { b.clone() } else { resample(b, a.len())? };
    let sum: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((a.spacing() * sum).sqrt())
}

impl ErrorTable {
    pub fn new(experiment: &str, kernel: &str, label: &str, norm: Norm) -> Self {
        Self {
            experiment: experiment.to_string(),
            kernel: kernel.to_string(),
            label: label.to_string(),
            norm,
            metadata: BTreeMap::new(),
            rows: Vec::new(),
        }
    }

    /// Appends a row, computing its observed order from the previous one.
    pub fn push(&mut self, n_steps: u64, error: f64) {
        let order = self.rows.last().map(|p| observed_order((p.n_steps, p.error), (n_steps, error)));
        self.rows.push(ErrorRow { n_steps, error, order });
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_steps,error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:e},{order}", r.n_steps, r.error);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Writes the table to `path` in the given format.
pub fn emit(table: &ErrorTable, format: OutputFormat, path: &Path) -> Result<()> {
    let text = table.render(format)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample() -> ErrorTable {
        let mut t = ErrorTable::new("graph-converge", "second-order", "half-sine", Norm::L2)
            .with_meta("final_time", 0.025);
        for (n, e) in [(32, 3.76e-4), (64, 1.04e-4), (128, 2.73e-5)] {
            t.push(n, e);
        }
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ErrorTable::new("circle-lte", "gaussian", "r0=1", Norm::RadiusAbs);
        assert_eq!(t.to_csv(), "n_steps,error,order\n");
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "32,3.76e-4,");
        assert!(lines[2].starts_with("64,1.04e-4,1.85"));
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let json = t.to_json().unwrap();
        assert_eq!(ErrorTable::from_json(&json).unwrap(), t);
        assert_eq!(t.to_json().unwrap(), json);
    }

    #[test]
    fn emit_writes_rendered_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        emit(&sample(), OutputFormat::Json, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), sample().to_json().unwrap());
        assert!(emit(&sample(), OutputFormat::Csv, &dir.path().join("missing/t.csv")).is_err());
    }

    #[test]
    fn synthetic_orders_are_recovered() {
        for p in [1.0, 2.0, 2.5, 3.0] {
            let mut t = ErrorTable::new("x", "x", "x", Norm::L2);
            for n in [10u64, 20, 40, 80, 160, 320] {
                t.push(n, 0.7 * (n as f64).powf(-p));
            }
            for r in &t.rows[1..] {
                assert!((r.order.unwrap() - p).abs() < 1e-10);
            }
            assert!(t.rows[0].order.is_none());
        }
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| {
            let x = 2f64.powi(-k);
            (x, 3.0 * x.powi(3))
        }).collect();
        assert!((log_log_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
    }

    #[test]
    fn l2_error_values() {
        let a = GraphInterface::from_fn(1.0, 1024, |x| (2.0 * PI * x).sin()).unwrap();
        let zero = GraphInterface::new(1.0, vec![0.0; 1024]).unwrap();
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        assert!((l2_error(&a, &zero).unwrap() - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((l2_error(&a.shifted(0.3), &a).unwrap() - 0.3).abs() < 1e-14);
        let other = GraphInterface::new(2.0, vec![0.0; 1024]).unwrap();
        assert!(l2_error(&a, &other).is_err());
        let fine = GraphInterface::new(1.0, vec![0.0; 4096]).unwrap();
        assert!((l2_error(&a, &fine).unwrap() - 0.5f64.sqrt()).abs() < 1e-6);
    }
}
