use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;
use tqm_core::CMatrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One line of a sweep table.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell_or_mode: String,
    pub value: f64,
    pub residual: Option<f64>,
}

impl Row {
    pub fn new(n: usize, label: impl Into<String>, value: f64, residual: Option<f64>) -> Self {
        Row { n, ell_or_mode: label.into(), value, residual }
    }
}

/// Command result: table rows, CSV footer lines and a structured summary
/// that only appears in JSON output.
#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub footer: Vec<String>,
    pub summary: Option<Value>,
}

impl Report {
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json()?,
        };
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
        }
    }

    fn to_csv(&self) -> String {
        let mut s = String::from("N,ell_or_mode,value,residual\n");
        for r in &self.rows {
            let residual = r.residual.map(number).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", r.n, r.ell_or_mode, number(r.value), residual));
        }
        for line in &self.footer {
            s.push_str(&format!("# {line}\n"));
        }
        s
    }

    fn to_json(&self) -> Result<String> {
        let mut obj = serde_json::Map::new();
        obj.insert("rows".into(), serde_json::to_value(&self.rows)?);
        if let Some(summary) = &self.summary {
            obj.insert("summary".into(), summary.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj))?;
        s.push('\n');
        Ok(s)
    }
}

/// Shortest round-trip text; scientific outside `[1e-4, 1e15)`.
fn number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Matrix dump: magic `TQM1`, `u64` N, then N² row-major `(re, im)` pairs
/// of `f64`, all little-endian.
pub fn dump_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(b"TQM1")?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Row-major `[re, im]` pairs.
pub fn matrix_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
        .collect()
}

/// Least-squares fit of `ln y = a + b ln x`; returns `(b, R²)`.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}
