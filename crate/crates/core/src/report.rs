//! Run reports: per-time rows, study tables and a summary, emitted as CSV,
//! JSON and SVG. Output is a pure function of the report, so identical runs
//! give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::spectral::Spectral;
use crate::sse::Trajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    /// One entry per name in [`RunReport::residual_columns`].
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl StudyTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&join_numbers(r));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SummaryValue {
    Flag(bool),
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub residual_columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub tables: Vec<StudyTable>,
    pub summary: BTreeMap<String, SummaryValue>,
}

fn join_numbers(r: &[f64]) -> String {
    r.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",")
}

impl RunReport {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self {
            config_hash: config_hash.into(),
            residual_columns: Vec::new(),
            rows: Vec::new(),
            tables: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    /// Rows of `L²` and `H¹` norms for every snapshot of a trajectory.
    pub fn from_trajectory(config_hash: impl Into<String>, sp: &Spectral, traj: &Trajectory) -> Result<Self> {
        let mut r = Self::new(config_hash);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            r.rows.push(ReportRow {
                t: *t,
                l2_norm: s.l2_norm(),
                h1_norm: sp.sobolev_norm(&s.values, 1.0)?,
                residuals: Vec::new(),
            });
        }
        Ok(r)
    }

    /// Attach a residual column; `values` aligns with the rows.
    pub fn add_residual(&mut self, name: &str, values: &[f64]) -> Result<()> {
        if values.len() != self.rows.len() {
            return Err(Error::shape(format!("{} values", self.rows.len()), values.len().to_string()));
        }
        self.residual_columns.push(name.to_string());
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.residuals.push(*v);
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: SummaryValue) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.set(key, SummaryValue::Number(value));
    }

    pub fn flag(&mut self, key: &str, value: bool) {
        self.set(key, SummaryValue::Flag(value));
    }

    /// Rows strictly ordered in `t`; every numeric cell finite.
    pub fn validate(&self) -> Result<()> {
        if self.rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Numerical("report rows are not ordered in t".into()));
        }
        for r in &self.rows {
            if r.residuals.len() != self.residual_columns.len() {
                return Err(Error::shape(
                    format!("{} residuals", self.residual_columns.len()),
                    r.residuals.len().to_string(),
                ));
            }
            let cells = [r.t, r.l2_norm, r.h1_norm];
            if cells.iter().chain(&r.residuals).any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite report cell at t = {}", r.t)));
            }
        }
        for t in &self.tables {
            if t.rows.iter().any(|r| r.len() != t.columns.len()) {
                return Err(Error::shape(format!("{} columns", t.columns.len()), t.name.clone()));
            }
            if t.rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite cell in table {}", t.name)));
            }
        }
        for (k, v) in &self.summary {
            if let SummaryValue::Number(x) = v {
                if !x.is_finite() {
                    return Err(Error::Numerical(format!("non-finite summary value {k}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,l2_norm,h1_norm");
        for c in &self.residual_columns {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for r in &self.rows {
            let mut cells = vec![r.t, r.l2_norm, r.h1_norm];
            cells.extend(&r.residuals);
            s.push_str(&join_numbers(&cells));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Write `report.csv`, `report.json`, one CSV per table and one SVG per
    /// table with at least two rows. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.validate()?;
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        put("report.csv".into(), self.to_csv())?;
        put("report.json".into(), self.to_json())?;
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv())?;
            if t.rows.len() >= 2 && t.columns.len() >= 2 {
                put(format!("{}.svg", t.name), log_log_svg(t))?;
            }
        }
        Ok(written)
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log plot of every column against the first; nonpositive values are skipped.
pub fn log_log_svg(table: &StudyTable) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let series: Vec<Vec<(f64, f64)>> = (1..table.columns.len())
        .map(|j| {
            table
                .rows
                .iter()
                .filter(|r| r[0] > 0.0 && r[j] > 0.0)
                .map(|r| (r[0].log10(), r[j].log10()))
                .collect()
        })
        .collect();
    let pts = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (dx, dy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    let px = |x: f64| pad + (x - x0) / dx * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / dy * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{pad} {pad} V{} H{}" stroke="black" fill="none"/>"#, h - pad, w - pad);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 {}</text>"#,
        w / 2.0,
        h - 15.0,
        table.columns[0]
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, table.name);
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{}">{x0:.2}</text><text x="{}" y="{}" text-anchor="end">{x1:.2}</text>"#,
        h - pad + 15.0,
        w - pad,
        h - pad + 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{y0:.2}</text><text x="{}" y="{pad}" text-anchor="end">{y1:.2}</text>"#,
        pad - 5.0,
        h - pad,
        pad - 5.0
    );
    for (j, pts) in series.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none"/>"#, d.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - pad + 5.0,
            pad + 15.0 * j as f64,
            table.columns[j + 1]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("abc");
        for k in 0..3 {
            r.rows.push(ReportRow { t: k as f64, l2_norm: 1.0, h1_norm: 2.0, residuals: vec![] });
        }
        r.add_residual("duhamel", &[0.0, 1e-3, 2e-3]).unwrap();
        let mut t = StudyTable::new("gaps", &["dt", "gap"]);
        t.push(vec![0.1, 1e-2]);
        t.push(vec![0.05, 5e-3]);
        r.tables.push(t);
        r.number("order", 1.0);
        r.flag("monotone", true);
        r
    }

    #[test]
    fn emission_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let a = r.write(&dir.path().join("a")).unwrap();
        let b = r.write(&dir.path().join("b")).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_csv().starts_with("t,l2_norm,h1_norm,duhamel\n"));
    }

    #[test]
    fn validation_catches_bad_rows() {
        let mut r = sample();
        r.rows[1].t = 5.0;
        assert!(r.validate().is_err());
        let mut r = sample();
        r.tables[0].rows[0][1] = f64::NAN;
        assert!(r.validate().is_err());
        let mut r = sample();
        r.number("x", f64::INFINITY);
        assert!(r.validate().is_err());
    }
}
