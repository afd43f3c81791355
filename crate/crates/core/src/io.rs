//! Number formatting and CSV emission shared by the reports and the CLI.

use std::io::Write;

use crate::error::{Error, Result};

/// 17 significant digits, `.` as decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Write a header row and numeric rows as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Usage(format!("write failed: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Usage(format!("csv write failed: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for &x in &[std::f64::consts::PI, 1e-300, 7.389056098930650, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn csv_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[vec![1.0, 2.0]]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
