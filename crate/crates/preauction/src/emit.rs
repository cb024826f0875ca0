//! Report files: JSON report, CSV sweep table and two-column plot data.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use preauction_core::statics::StaticsRecord;

use crate::report::Report;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> EmitError + '_ {
    move |source| EmitError::Io { path: path.to_path_buf(), source }
}

/// A named `x y` series written as whitespace-separated columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub file: String,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn render(&self) -> String {
        let mut s = format!("# {} {}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            s.push_str(&format!("{x:.12e} {y:.12e}\n"));
        }
        s
    }

    /// Abscissa of the largest ordinate, first one on ties.
    pub fn argmax(&self) -> Option<f64> {
        self.points.iter().fold(None, |best: Option<(f64, f64)>, &(x, y)| match best {
            Some((_, by)) if by >= y => best,
            _ => Some((x, y)),
        })
        .map(|(x, _)| x)
    }
}

/// Everything a command produces besides the report itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub series: Vec<Series>,
    /// Rows of `sweep.csv`.
    pub sweep: Option<Vec<StaticsRecord>>,
}

fn write(path: &Path, contents: &str) -> Result<(), EmitError> {
    fs::write(path, contents).map_err(io_err(path))
}

pub fn write_sweep_csv(path: &Path, records: &[StaticsRecord]) -> Result<(), EmitError> {
    let csv_err = |source| EmitError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["c", "tau_s_star", "seller_payoff", "p_auction", "p_no_trade_given_auction", "flag"])
        .map_err(csv_err)?;
    let cell = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.12e}"));
    for r in records {
        w.write_record([
            format!("{:.12e}", r.c),
            cell(r.tau_s_star),
            cell(r.seller_payoff),
            cell(r.p_auction),
            cell(r.p_no_trade_given_auction),
            r.flag.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `report.json`, the sweep table and every plot series into `dir`
/// and returns the paths written.
pub fn emit_report(report: &Report, artifacts: &Artifacts, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let path = dir.join("report.json");
    write(&path, &report.to_json())?;
    written.push(path);
    if let Some(records) = &artifacts.sweep {
        let path = dir.join("sweep.csv");
        write_sweep_csv(&path, records)?;
        written.push(path);
    }
    for s in &artifacts.series {
        let path = dir.join(&s.file);
        write(&path, &s.render())?;
        written.push(path);
    }
    Ok(written)
}
