//! JSON output with round-trippable floats.
//!
//! Every `f64` is written in scientific notation with 17 significant digits,
//! so reports reparse to the exact bits that produced them. Non-finite values
//! have no JSON spelling and are written as `null`.

use std::io;

use nalgebra::DMatrix;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::ser::Formatter;

/// Schema tag carried by every top-level report.
pub const SCHEMA: &str = "ghx/1";

#[derive(Clone, Copy, Debug, Default)]
pub struct ExactFloats;

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` with [`ExactFloats`], one report per string.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// `serialize_with` helper: a real matrix as a list of rows.
pub fn matrix_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let values = vec![0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE];
        let text = to_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(text.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn matrices_as_rows() {
        #[derive(Serialize)]
        struct Wrap {
            #[serde(serialize_with = "matrix_rows")]
            m: DMatrix<f64>,
        }
        let w = Wrap {
            m: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
        };
        let v: serde_json::Value = serde_json::from_str(&to_string(&w).unwrap()).unwrap();
        assert_eq!(v["m"][1][0].as_f64(), Some(3.0));
    }
}
