//! CSV encodings of reports and traces.

use std::io;

use crate::ddesim::SimulationTrace;
use crate::designs::ControllerDesign;
use crate::rootfinder::SpectrumReport;

fn finish(w: csv::Writer<Vec<u8>>) -> io::Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

fn num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

/// `re,im,multiplicity,residual`, one row per root.
pub fn spectrum_csv(report: &SpectrumReport) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im", "multiplicity", "residual"])?;
    for r in &report.roots {
        w.write_record([
            num(r.re),
            num(r.im),
            r.multiplicity.to_string(),
            num(r.residual),
        ])?;
    }
    finish(w)
}

/// `t,y0,y1,…` with `y_k` the `k`-th derivative of `y`.
pub fn trace_csv(trace: &SimulationTrace) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((0..trace.y_full.len()).map(|k| format!("y{k}")));
    w.write_record(&header)?;
    for (i, t) in trace.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(trace.y_full.iter().map(|c| num(c[i])));
        w.write_record(&row)?;
    }
    finish(w)
}

/// One row of values under a header of `name [unit]` columns.
pub fn controller_csv(design: &ControllerDesign) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let table = design.table();
    w.write_record(table.iter().map(|(name, _, unit)| format!("{name} [{unit}]")))?;
    w.write_record(table.iter().map(|(_, v, _)| num(*v)))?;
    finish(w)
}

/// `name,value` rows.
pub fn key_value_csv(rows: &[(&str, f64)]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value"])?;
    for (k, v) in rows {
        w.write_record([k.to_string(), num(*v)])?;
    }
    finish(w)
}
