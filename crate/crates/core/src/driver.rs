//! A full run: mesh, initial data, time stepping, diagnostics, outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::{audit, record_from_rows, node_rows, AuditReport, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::flow;
use crate::io::{write_snapshot_rows, TimeseriesWriter};
use crate::mesh::Field;

pub const TIMESERIES_FILE: &str = "timeseries.jsonl";
pub const AUDIT_FILE: &str = "audit.json";

pub fn snapshot_file(index: usize) -> String {
    format!("snapshot_{index:04}.csv")
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub audit: AuditReport,
    pub final_field: Field,
    pub steps: usize,
    pub rejections: usize,
}

/// Run `cfg` to its end time. With `out`, snapshots, the time series and
/// the audit are written there as they become available.
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let initial = cfg.initial.field(&mesh);
    let ctl = cfg.time.control();
    let mut series = match out {
        Some(dir) if cfg.output.wants("jsonl") => {
            std::fs::create_dir_all(dir)?;
            Some(TimeseriesWriter::create(&dir.join(TIMESERIES_FILE))?)
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            None
        }
        None => None,
    };
    let csv_dir: Option<PathBuf> = out.filter(|_| cfg.output.wants("csv")).map(Path::to_path_buf);
    let mut records = Vec::new();
    let on_snapshot = |field: &Field, _: &flow::ParabolicityReport| -> Result<()> {
        let rows = node_rows(&mesh, field)?;
        let rec = record_from_rows(&mesh, field, &rows, cfg.interior_fraction)?;
        if let Some(dir) = &csv_dir {
            write_snapshot_rows(&dir.join(snapshot_file(records.len())), mesh.dim(), &rows)?;
        }
        if let Some(w) = series.as_mut() {
            w.push(&rec)?;
        }
        records.push(rec);
        Ok(())
    };
    let stepper = if mesh.is_axisymmetric() {
        flow::run_axisymmetric(&mesh, initial, &ctl, on_snapshot)?
    } else {
        flow::run(&mesh, initial, &ctl, on_snapshot)?
    };
    let report = audit(&records)?;
    if let Some(dir) = out {
        write_json(&dir.join(AUDIT_FILE), &report)?;
    }
    Ok(RunOutcome {
        records,
        audit: report,
        steps: stepper.steps,
        rejections: stepper.rejections,
        final_field: stepper.into_field(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Exact expanding solution `u(t) = sqrt(k^2 + 2nt)` at the given times.
pub fn homothetic_trajectory(k: f64, n: usize, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(k > 0.0) || n < 2 {
        return Err(Error::Domain(format!("need k > 0 and n >= 2, got k = {k}, n = {n}")));
    }
    Ok(times.iter().map(|&t| (t, (k * k + 2.0 * n as f64 * t).sqrt())).collect())
}
