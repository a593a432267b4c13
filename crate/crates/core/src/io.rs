//! Matrix JSON: `{"rows": r, "cols": c, "data": [[re, im], ...]}`, row-major,
//! numbers written with 17 significant digits.

use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{EtfError, Result};
use crate::matrix::ComplexMatrix;

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Value>>,
}

fn number(v: &Value, index: usize) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| EtfError::Parse(format!("entry {index}: number out of range"))),
        Value::String(s) => match s.as_str() {
            "NaN" | "nan" => Ok(f64::NAN),
            "Infinity" | "inf" | "+inf" => Ok(f64::INFINITY),
            "-Infinity" | "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(EtfError::Parse(format!("entry {index}: expected a number, found \"{other}\""))),
        },
        other => Err(EtfError::Parse(format!("entry {index}: expected a number, found {other}"))),
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix<f64>> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| EtfError::Parse(format!("malformed matrix JSON: {e}")))?;
    let expected = raw.rows.checked_mul(raw.cols).ok_or(EtfError::Overflow)?;
    if raw.data.len() != expected {
        return Err(EtfError::DimensionMismatch {
            expected: format!("{expected} entries for {}x{}", raw.rows, raw.cols),
            found: format!("{} entries", raw.data.len()),
        });
    }
    let mut data = Vec::with_capacity(expected);
    for (index, pair) in raw.data.iter().enumerate() {
        if pair.len() != 2 {
            return Err(EtfError::Parse(format!("entry {index}: expected [re, im], found {} values", pair.len())));
        }
        data.push(Complex::new(number(&pair[0], index)?, number(&pair[1], index)?));
    }
    ComplexMatrix::new(raw.rows, raw.cols, data)
}

fn write_number(out: &mut String, x: f64) {
    if x == 0.0 {
        // normalises -0.0 as well
        out.push('0');
    } else {
        out.push_str(&format!("{x:.16e}"));
    }
}

pub fn matrix_to_json(m: &ComplexMatrix<f64>) -> String {
    let mut out = format!("{{\"rows\": {}, \"cols\": {}, \"data\": [", m.rows(), m.cols());
    for (k, z) in m.as_slice().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(if k % m.cols().max(1) == 0 { "\n  [" } else { " [" });
        write_number(&mut out, z.re);
        out.push_str(", ");
        write_number(&mut out, z.im);
        out.push(']');
    }
    out.push_str("\n]}\n");
    out
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<ComplexMatrix<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EtfError::Parse(format!("cannot read {}: {e}", path.display())))?;
    matrix_from_json(&text)
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &ComplexMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_json(m)).map_err(|e| EtfError::Parse(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::hermitian_fourier;

    #[test]
    fn round_trip_is_lossless() {
        let m = hermitian_fourier::<f64>(5).unwrap().into_matrix().scale(std::f64::consts::PI);
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn identity_file() {
        let text = r#"{"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0], [1.0, 0.0]]}"#;
        assert_eq!(matrix_from_json(text).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn distinct_diagnostics() {
        let short = r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#;
        assert!(matches!(matrix_from_json(short), Err(EtfError::DimensionMismatch { .. })));
        let nan = r#"{"rows": 1, "cols": 1, "data": [["NaN", 0]]}"#;
        assert!(matches!(matrix_from_json(nan), Err(EtfError::NonFinite { row: 0, col: 0 })));
        assert!(matches!(matrix_from_json("{\"rows\": 1"), Err(EtfError::Parse(_))));
        let triple = r#"{"rows": 1, "cols": 1, "data": [[1, 0, 0]]}"#;
        assert!(matches!(matrix_from_json(triple), Err(EtfError::Parse(_))));
    }
}
