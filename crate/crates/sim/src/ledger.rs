//! Diagnostics CSV: one header line naming the record fields, then one row
//! per record with every value printed to 17 significant digits, so that
//! reading the file back recovers the doubles exactly.

use std::path::Path;

use pitaevskii_core::DiagnosticsRecord;

use crate::checkpoint::write_atomic;
use crate::error::{Result, SimError};

pub const FILE_NAME: &str = "diagnostics.csv";

pub fn render(records: &[DiagnosticsRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DiagnosticsRecord::COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record(r.values().iter().map(|v| format!("{v:.16e}")))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn parse(text: &str) -> std::result::Result<Vec<DiagnosticsRecord>, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(DiagnosticsRecord::COLUMNS) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let mut v = [0.0; 15];
        for (slot, cell) in v.iter_mut().zip(row.iter()) {
            *slot = cell
                .parse()
                .map_err(|e| format!("row {}: cannot parse {cell:?}: {e}", line + 1))?;
        }
        out.push(DiagnosticsRecord::from_values(&v));
    }
    Ok(out)
}

pub fn emit_diagnostics(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    write_atomic(path, render(records).as_bytes())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|message| SimError::Diagnostics {
        path: path.to_path_buf(),
        message,
    })
}
