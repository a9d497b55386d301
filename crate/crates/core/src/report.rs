//! Versioned CSV output with 17 significant digits.

use std::io::Write;

use serde::Serialize;

/// Written into every CSV row and JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// `x` with 17 significant digits, enough to reproduce the exact double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// One row of a per-sample sweep.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepRow {
    pub schema_version: u32,
    pub sample_id: u64,
    pub seed: u64,
    pub n: usize,
    pub value: String,
    pub witness_file: String,
}

impl SweepRow {
    pub fn new(sample_id: u64, seed: u64, n: usize, value: f64, witness_file: impl Into<String>) -> Self {
        SweepRow {
            schema_version: SCHEMA_VERSION,
            sample_id,
            seed,
            n,
            value: fmt_f64(value),
            witness_file: witness_file.into(),
        }
    }
}

/// Writes rows with a header derived from the field names of `T`.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// Writes a table of numbers under `header`, prefixed by a `schema_version` column.
pub fn write_numeric_csv<W: Write>(header: &[&str], rows: &[Vec<f64>], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut h = vec!["schema_version"];
    h.extend_from_slice(header);
    w.write_record(&h)?;
    for r in rows {
        let mut rec = vec![SCHEMA_VERSION.to_string()];
        rec.extend(r.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn sweep_csv_has_versioned_header() {
        let mut buf = Vec::new();
        write_csv(&[SweepRow::new(0, 7, 2, 1.5, "w0.json")], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("schema_version,sample_id,seed,n,value,witness_file\n1,0,7,2,"));
    }
}
