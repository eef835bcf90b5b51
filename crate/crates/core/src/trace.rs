//! CSV trace files and the regression comparison between two of them.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::TraceError;
use crate::metrics::{mean, std_dev};

pub const PHASE_HEADER: &str = "t,agent_id,theta,hidden";
pub const POSITION_HEADER: &str = "t,agent_id,x,y,vx,vy";
pub const METRICS_HEADER: &str = "t,order_param,max_pair_diff,am,gm,min,max,collisions_cum";

/// Formats `v` with 9 significant digits, dropping trailing zeros.
/// Non-finite values print as `nan`, `inf` or `-inf`.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.8e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim_zeros(mantissa.to_string()), exponent)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// Writes `header` and `rows` to `path`, one line per row, `\n` endings.
pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<(), TraceError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(header.as_bytes());
    buf.push(b'\n');
    for row in rows {
        buf.extend_from_slice(row.as_bytes());
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| TraceError::io(path, e))?;
    f.write_all(&buf).map_err(|e| TraceError::io(path, e))
}

/// A CSV file read back as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, TraceError> {
        let mut lines = text.lines();
        let header: Vec<String> = match lines.next() {
            Some(h) if !h.trim().is_empty() => h.split(',').map(|s| s.trim().to_string()).collect(),
            _ => {
                return Err(TraceError::Malformed { path: origin.to_path_buf(), message: "empty file".into() });
            }
        };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(TraceError::Malformed {
                    path: origin.to_path_buf(),
                    message: format!("line {}: {} fields, header has {}", i + 2, row.len(), header.len()),
                });
            }
            rows.push(row);
        }
        Ok(CsvTable { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self, TraceError> {
        let text = fs::read_to_string(path).map_err(|e| TraceError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub metric: String,
    pub tolerance: f64,
    pub rows: usize,
    /// Rows where both traces hold a value.
    pub compared: usize,
    pub max_abs_delta: f64,
    pub mean_abs_delta: f64,
    pub a_final_third: WindowStats,
    pub b_final_third: WindowStats,
    pub pass: bool,
}

impl CompareReport {
    pub fn render(&self) -> String {
        format!(
            "metric {}: {} rows, {} compared\n\
             max |delta| = {}, mean |delta| = {}, tolerance = {}\n\
             a final third: mean {} std {}\n\
             b final third: mean {} std {}\n\
             {}\n",
            self.metric,
            self.rows,
            self.compared,
            fmt_sig(self.max_abs_delta),
            fmt_sig(self.mean_abs_delta),
            fmt_sig(self.tolerance),
            fmt_sig(self.a_final_third.mean),
            fmt_sig(self.a_final_third.std),
            fmt_sig(self.b_final_third.mean),
            fmt_sig(self.b_final_third.std),
            if self.pass { "PASS" } else { "FAIL" },
        )
    }
}

fn final_third_stats(values: &[Option<f64>]) -> WindowStats {
    let start = values.len() - values.len() / 3;
    let tail: Vec<f64> = values[start..].iter().flatten().copied().collect();
    WindowStats { mean: mean(&tail), std: std_dev(&tail) }
}

/// Compares one column of two schema-compatible traces row by row.
///
/// The traces must share the header, the row count, and the `t` (and
/// `agent_id`, if present) columns. Empty cells are skipped.
pub fn compare(a: &CsvTable, b: &CsvTable, metric: &str, tolerance: f64) -> Result<CompareReport, TraceError> {
    if a.header != b.header {
        return Err(TraceError::Schema(format!(
            "headers differ: `{}` vs `{}`",
            a.header.join(","),
            b.header.join(",")
        )));
    }
    let col = a
        .column(metric)
        .ok_or_else(|| TraceError::Schema(format!("no column `{metric}` in `{}`", a.header.join(","))))?;
    if a.rows.len() != b.rows.len() {
        return Err(TraceError::Schema(format!("row counts differ: {} vs {}", a.rows.len(), b.rows.len())));
    }
    let keys: Vec<usize> = ["t", "agent_id"].iter().filter_map(|k| a.column(k)).collect();
    let parse = |s: &str| -> Result<Option<f64>, TraceError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>().map(Some).map_err(|_| TraceError::Schema(format!("`{s}` is not a number")))
        }
    };
    let mut va = Vec::with_capacity(a.rows.len());
    let mut vb = Vec::with_capacity(b.rows.len());
    let mut deltas = Vec::new();
    for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        for &k in &keys {
            if ra[k] != rb[k] {
                return Err(TraceError::Schema(format!(
                    "row {}: `{}` differs ({} vs {})",
                    i + 1,
                    a.header[k],
                    ra[k],
                    rb[k]
                )));
            }
        }
        let (x, y) = (parse(&ra[col])?, parse(&rb[col])?);
        if let (Some(x), Some(y)) = (x, y) {
            deltas.push((x - y).abs());
        }
        va.push(x);
        vb.push(y);
    }
    let max_abs_delta = deltas.iter().copied().fold(0.0, f64::max);
    let mean_abs_delta = if deltas.is_empty() { 0.0 } else { mean(&deltas) };
    Ok(CompareReport {
        metric: metric.to_string(),
        tolerance,
        rows: a.rows.len(),
        compared: deltas.len(),
        max_abs_delta,
        mean_abs_delta,
        a_final_third: final_third_stats(&va),
        b_final_third: final_third_stats(&vb),
        pass: max_abs_delta <= tolerance,
    })
}

pub fn compare_files(a: &Path, b: &Path, metric: &str, tolerance: f64) -> Result<CompareReport, TraceError> {
    compare(&CsvTable::read(a)?, &CsvTable::read(b)?, metric, tolerance)
}
