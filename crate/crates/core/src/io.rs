//! Snapshot tables (CSV) and diagnostics time series (JSON lines).

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::{node_rows, DiagnosticsRecord, NodeRow};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};

/// Geometry columns after `node_id` and the coordinates.
pub const SNAPSHOT_COLUMNS: [&str; 6] = ["u", "v", "S", "H", "A2", "J"];

pub fn snapshot_header(n: usize) -> String {
    let mut cols = vec!["node_id".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend(SNAPSHOT_COLUMNS.iter().map(|c| c.to_string()));
    cols.join(",")
}

/// Seventeen significant digits: enough to reparse every `f64` exactly.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_snapshot_rows(path: &Path, n: usize, rows: &[NodeRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", snapshot_header(n))?;
    for r in rows {
        let mut line = r.node_id.to_string();
        for v in r.x.iter().chain([r.u, r.v, r.s, r.h, r.a2, r.j].iter()) {
            line.push(',');
            line.push_str(&fmt(*v));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot(path: &Path, mesh: &Mesh, field: &Field) -> Result<()> {
    let rows = node_rows(mesh, field)?;
    write_snapshot_rows(path, mesh.dim(), &rows)
}

pub fn read_snapshot(path: &Path) -> Result<Vec<NodeRow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot file".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    let n = cols.iter().filter(|c| c.starts_with('x')).count();
    let expected = snapshot_header(n);
    if header != expected {
        let missing: Vec<&str> = expected.split(',').filter(|c| !cols.contains(c)).collect();
        return Err(Error::Parse(format!(
            "snapshot header {header:?} does not match {expected:?}; missing columns {missing:?}"
        )));
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 7 {
            return Err(Error::Parse(format!(
                "snapshot line {} has {} fields, expected {}",
                line_no + 2,
                fields.len(),
                n + 7
            )));
        }
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("snapshot line {}: {e}", line_no + 2));
        let node_id = fields[0].parse::<usize>().map_err(|e| bad(&e))?;
        let vals = fields[1..]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| bad(&e))?;
        rows.push(NodeRow {
            node_id,
            x: vals[..n].to_vec(),
            u: vals[n],
            v: vals[n + 1],
            s: vals[n + 2],
            h: vals[n + 3],
            a2: vals[n + 4],
            j: vals[n + 5],
        });
    }
    Ok(rows)
}

/// Appends one JSON object per line, flushed line by line so an
/// interrupted run leaves a readable prefix.
pub struct TimeseriesWriter {
    out: BufWriter<File>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn append_to(path: &Path) -> Result<Self> {
        Ok(Self {
            out: BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?),
        })
    }

    pub fn push(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        let line = serde_json::to_string(rec).map_err(|e| Error::Parse(e.to_string()))?;
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Contract("a time series needs at least one record".into()));
    }
    let mut w = TimeseriesWriter::create(path)?;
    for r in records {
        w.push(r)?;
    }
    Ok(())
}

/// Parse a time series. A final line without its newline is an interrupted
/// write and is dropped; any other malformed line is an error.
pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_timeseries(&text)
}

pub fn parse_timeseries(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("time series line {}: {e}", i + 1))))
        .collect()
}
