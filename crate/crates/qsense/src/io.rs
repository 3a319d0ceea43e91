//! CSV helpers with round-trip float formatting.

use std::io::Write;

use crate::error::{ensure, Result};

/// Shortest decimal string that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || x.is_nan() || x.is_infinite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes equal-length numeric columns under a header row.
pub fn write_columns<W: Write>(w: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    ensure(headers.len() == columns.len(), || "one header per column".into())?;
    let rows = columns.first().map_or(0, |c| c.len());
    ensure(columns.iter().all(|c| c.len() == rows), || "columns differ in length".into())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(headers)?;
    for i in 0..rows {
        out.write_record(columns.iter().map(|c| fmt_f64(c[i])))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric CSV with a header row into columns.
pub fn read_columns<R: std::io::Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut cols = vec![Vec::new(); headers.len()];
    for rec in rdr.records() {
        let rec = rec?;
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| crate::Error::Argument(format!("not a number: {field:?}")))?;
            cols[i].push(v);
        }
    }
    Ok((headers, cols))
}
