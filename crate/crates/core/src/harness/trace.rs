use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use super::HarnessError;
use crate::solver::{Trace, TraceRow};

pub const TRACE_HEADER: [&str; 9] = [
    "n",
    "f_x",
    "f_avg",
    "gap_best",
    "gap_avg",
    "bound",
    "backward_step",
    "nnz",
    "elapsed_s",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `trace` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::io(path, e);
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in &trace.rows {
        w.write_record([
            r.n.to_string(),
            float(r.f_x),
            float(r.f_avg),
            float(r.gap_best),
            float(r.gap_avg),
            float(r.bound),
            float(r.backward_step),
            r.nnz.to_string(),
            float(r.elapsed_s),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::io(path, e.error()))?;
    write_atomic(path, &bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Trace, HarnessError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    let header = rd.headers().map_err(|e| HarnessError::io(path, e))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(HarnessError::Usage(format!(
            "{}: not a trace file (header `{}`)",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut trace = Trace::default();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::io(path, e))?;
        let bad =
            |col: &str| HarnessError::Usage(format!("{}: row {}: malformed `{col}`", path.display(), i + 1));
        let f = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(TRACE_HEADER[k]));
        let u = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(TRACE_HEADER[k]));
        let row = TraceRow {
            n: u(0)?,
            f_x: f(1)?,
            f_avg: f(2)?,
            gap_best: f(3)?,
            gap_avg: f(4)?,
            bound: f(5)?,
            backward_step: f(6)?,
            nnz: u(7)?,
            elapsed_s: f(8)?,
        };
        if trace.rows.last().is_some_and(|prev| prev.n >= row.n) {
            return Err(HarnessError::Usage(format!(
                "{}: row {}: n is not strictly increasing",
                path.display(),
                i + 1
            )));
        }
        trace.rows.push(row);
    }
    Ok(trace)
}
