use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SimError, Trace, TraceRecord};
use crate::exactmath::{format_rational, rational_to_f64};

pub const TRACE_COLUMNS: [&str; 14] = [
    "k",
    "y_err_inf",
    "restoration_exact",
    "figure4_norm",
    "internal_state_inf",
    "l_k",
    "overflow_detected",
    "y_err_inf_f64",
    "u_a",
    "u",
    "m_exact",
    "history_identity",
    "e_v_within",
    "controller_consistent",
];

/// One CSV line. Rationals are exact `p/q` strings; vectors are `;`-joined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub k: usize,
    pub y_err_inf: String,
    pub restoration_exact: bool,
    pub figure4_norm: String,
    pub internal_state_inf: String,
    pub l_k: String,
    pub overflow_detected: bool,
    pub y_err_inf_f64: f64,
    pub u_a: String,
    pub u: String,
    pub m_exact: Option<bool>,
    pub history_identity: Option<bool>,
    pub e_v_within: Option<bool>,
    pub controller_consistent: bool,
}

impl From<&TraceRecord> for CsvRow {
    fn from(r: &TraceRecord) -> Self {
        let join = |v: &[crate::exactmath::Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(";");
        CsvRow {
            k: r.k,
            y_err_inf: format_rational(&r.y_err_inf),
            restoration_exact: r.restoration_exact,
            figure4_norm: r.figure4_norm.to_string(),
            internal_state_inf: r.internal_state_inf.to_string(),
            l_k: format_rational(&r.l_k),
            overflow_detected: r.overflow_detected,
            y_err_inf_f64: rational_to_f64(&r.y_err_inf),
            u_a: join(&r.u_a),
            u: join(&r.u),
            m_exact: r.m_exact,
            history_identity: r.history_identity,
            e_v_within: r.e_v_within,
            controller_consistent: r.controller_consistent,
        }
    }
}

fn csv_err(e: impl std::fmt::Display) -> SimError {
    SimError::Trace(e.to_string())
}

fn write_rows<W: std::io::Write>(out: W, records: &[TraceRecord]) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Header line is always written, even for an empty trace.
pub fn trace_to_csv(records: &[TraceRecord]) -> Result<String, SimError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, records)?;
    String::from_utf8(buf).map_err(csv_err)
}

pub fn write_trace_csv(path: &Path, records: &[TraceRecord]) -> Result<(), SimError> {
    let file = std::fs::File::create(path).map_err(|e| csv_err(format!("{}: {e}", path.display())))?;
    write_rows(std::io::BufWriter::new(file), records)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<CsvRow>, SimError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if header != TRACE_COLUMNS {
        return Err(SimError::Trace(format!("unexpected header {header:?}")));
    }
    r.deserialize().collect::<Result<Vec<CsvRow>, _>>().map_err(csv_err)
}

/// Compares a recorded trace with a fresh run of the same configuration and
/// checks each recorded row against the oracle's own values. Returns every mismatch.
pub fn verify_trace(recorded: &[CsvRow], fresh: &Trace) -> Vec<String> {
    let mut out = Vec::new();
    if recorded.len() != fresh.records.len() {
        out.push(format!("row count {} vs fresh run {}", recorded.len(), fresh.records.len()));
    }
    for (rec, new) in recorded.iter().zip(&fresh.records) {
        let expected = CsvRow::from(new);
        if *rec != expected {
            let diff: Vec<&str> = TRACE_COLUMNS
                .iter()
                .zip(field_strings(rec).iter().zip(field_strings(&expected)))
                .filter(|(_, (a, b))| *a != b)
                .map(|(c, _)| *c)
                .collect();
            out.push(format!("k={}: differs from fresh run in {}", rec.k, diff.join(", ")));
        }
        if rec.restoration_exact != (rec.u_a == expected.u) {
            out.push(format!("k={}: restoration flag disagrees with the oracle input", rec.k));
        }
        if rec.controller_consistent != new.controller_consistent || !new.controller_consistent {
            out.push(format!("k={}: encrypted state diverges from the oracle", rec.k));
        }
    }
    out
}

fn field_strings(r: &CsvRow) -> Vec<String> {
    let o = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
    vec![
        r.k.to_string(),
        r.y_err_inf.clone(),
        r.restoration_exact.to_string(),
        r.figure4_norm.clone(),
        r.internal_state_inf.clone(),
        r.l_k.clone(),
        r.overflow_detected.to_string(),
        r.y_err_inf_f64.to_string(),
        r.u_a.clone(),
        r.u.clone(),
        o(r.m_exact),
        o(r.history_identity),
        o(r.e_v_within),
        r.controller_consistent.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat};
    use num_bigint::BigInt;

    fn record(k: usize) -> TraceRecord {
        TraceRecord {
            k,
            l_k: rat(1, 2),
            y_err_inf: rat(3, 4),
            restoration_exact: true,
            figure4_norm: BigInt::from(7),
            internal_state_inf: BigInt::from(-2),
            overflow_detected: false,
            u_a: vec![rat(1, 2), int(-3)],
            u: vec![rat(1, 2), int(-3)],
            m_exact: None,
            history_identity: Some(true),
            e_v_within: None,
            controller_consistent: true,
            controller_state: vec![],
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let s = trace_to_csv(&[]).unwrap();
        assert_eq!(s, format!("{}\n", TRACE_COLUMNS.join(",")));
    }

    #[test]
    fn one_step_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&path, &[record(0)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].split(',').count() >= 7);
        assert!(lines[1].starts_with("0,3/4,true,7,-2,1/2,false,0.75,1/2;-3,"));
        let rows = read_trace_csv(&path).unwrap();
        assert_eq!(rows, vec![CsvRow::from(&record(0))]);
    }

    #[test]
    fn bad_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_trace_csv(&path).is_err());
    }
}
