//! CSV emitters for grid-shaped results. Columns and formatting are
//! fixed so that identical inputs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::measure::DensityParams;
use crate::sweepout::WidthReport;
use crate::tighten::TightenTrace;

/// Nine significant digits — enough to audit 1e−6 tolerances without
/// dragging in the unstable tail of a double.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Optimizer trace of (center, scale, value) probes.
pub fn entropy_grid_csv(trace: &[(DensityParams, f64)], path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .iter()
        .map(|(p, v)| {
            vec![sig9(p.x0.x), sig9(p.x0.y), sig9(p.x0.z), sig9(p.t0), sig9(*v)]
        })
        .collect();
    write_csv(path, &["x0x", "x0y", "x0z", "t0", "F"], &rows)
}

pub fn tighten_trace_csv(trace: &TightenTrace, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .steps
        .iter()
        .map(|s| {
            vec![
                s.step.to_string(),
                sig9(s.f_value),
                s.case.to_string(),
                sig9(s.gamma),
                sig9(s.dt),
            ]
        })
        .collect();
    write_csv(path, &["step", "F", "case", "gamma", "dt"], &rows)
}

pub fn width_grid_csv(report: &WidthReport, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| r.iter().map(|v| sig9(*v)).collect())
        .collect();
    write_csv(path, &["t1", "t2", "t3", "tau", "F"], &rows)
}
