//! Plain-text Hermitian matrix literals.
//!
//! A file holds one or more matrices. Each is a line with the dimension `n`
//! followed by `n` lines of `n` whitespace-separated complex entries such as
//! `2`, `-1.5e-3`, `3i`, `-i` or `1-2i`. Blank lines and everything after `#`
//! are ignored.
//!
//! ```text
//! # diag(1, 2) with a coupling
//! 2
//! 1      0.5+1i
//! 0.5-1i 2
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GhxError, Result};
use crate::herm::{HermitianForm, MAX_DIM};

/// Relative asymmetry accepted in a literal.
const HERMITIAN_TOL: f64 = 1e-12;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> GhxError {
    GhxError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Byte offset of the sign separating real and imaginary parts, skipping a
/// leading sign and exponent signs.
fn split_point(body: &str) -> Option<usize> {
    let bytes = body.as_bytes();
    (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

/// Parses one entry token.
pub fn parse_entry(token: &str) -> Option<Complex64> {
    if token.is_empty() {
        return None;
    }
    let Some(body) = token.strip_suffix('i') else {
        return token.parse::<f64>().ok().filter(|x| x.is_finite()).map(|re| Complex64::new(re, 0.0));
    };
    match split_point(body) {
        Some(p) => {
            let re = body[..p].parse::<f64>().ok().filter(|x| x.is_finite())?;
            let im = parse_real(&body[p..])?;
            Some(Complex64::new(re, im))
        }
        None => parse_real(body).map(|im| Complex64::new(0.0, im)),
    }
}

/// Non-blank, comment-stripped lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

pub fn parse_matrices(text: &str) -> Result<Vec<HermitianForm>> {
    let mut lines = content_lines(text);
    let mut out = Vec::new();
    while let Some((header_line, header)) = lines.next() {
        let toks = tokens(header);
        let (col, tok) = toks[0];
        if toks.len() != 1 {
            return Err(parse_error(header_line, toks[1].0, "expected a single dimension on this line"));
        }
        let n: usize = tok
            .parse()
            .ok()
            .filter(|n| (1..=MAX_DIM).contains(n))
            .ok_or_else(|| parse_error(header_line, col, format!("invalid dimension '{tok}' (expected 1..={MAX_DIM})")))?;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for row in 0..n {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_error(header_line, col, format!("expected {n} rows, found {row}")))?;
            let toks = tokens(line);
            if toks.len() != n {
                let column = toks.get(n).map_or(line.chars().count() + 1, |t| t.0);
                return Err(parse_error(line_no, column, format!("expected {n} entries, found {}", toks.len())));
            }
            for (j, (col, tok)) in toks.into_iter().enumerate() {
                m[(row, j)] = parse_entry(tok)
                    .ok_or_else(|| parse_error(line_no, col, format!("invalid complex entry '{tok}'")))?;
            }
        }
        let a = HermitianForm::from_matrix(&m, HERMITIAN_TOL).map_err(|e| match e {
            GhxError::NotHermitian { asymmetry } => {
                parse_error(header_line, col, format!("matrix is not Hermitian (asymmetry {asymmetry:e})"))
            }
            other => other,
        })?;
        out.push(a);
    }
    Ok(out)
}

/// Exactly one matrix.
pub fn parse_matrix(text: &str) -> Result<HermitianForm> {
    let mut all = parse_matrices(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("length checked")),
        k => Err(parse_error(1, 1, format!("expected exactly one matrix, found {k}"))),
    }
}

fn format_entry(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Literal that parses back to the identical matrix.
pub fn format_matrix(a: &HermitianForm) -> String {
    let n = a.dim();
    let mut s = format!("{n}\n");
    for j in 0..n {
        let row: Vec<String> = (0..n).map(|k| format_entry(a.get(j, k))).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_matrices(items: &[HermitianForm]) -> String {
    items.iter().map(format_matrix).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries() {
        let c = |re, im| Some(Complex64::new(re, im));
        assert_eq!(parse_entry("2"), c(2.0, 0.0));
        assert_eq!(parse_entry("-1.5e-3"), c(-1.5e-3, 0.0));
        assert_eq!(parse_entry("3i"), c(0.0, 3.0));
        assert_eq!(parse_entry("-i"), c(0.0, -1.0));
        assert_eq!(parse_entry("i"), c(0.0, 1.0));
        assert_eq!(parse_entry("1-2i"), c(1.0, -2.0));
        assert_eq!(parse_entry("1e-3+2E+2i"), c(1e-3, 200.0));
        assert_eq!(parse_entry("0.5+i"), c(0.5, 1.0));
        assert_eq!(parse_entry("1+2"), None);
        assert_eq!(parse_entry("x"), None);
        assert_eq!(parse_entry("nan"), None);
    }

    #[test]
    fn matrices_with_comments() {
        let text = "# pair\n2\n1 0.5+1i   # row one\n0.5-1i 2\n\n1\n-3\n";
        let ms = parse_matrices(text).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].get(0, 1), Complex64::new(0.5, 1.0));
        assert_eq!(ms[1].coords(), &[-3.0]);
    }

    #[test]
    fn errors_name_line_and_column() {
        let err = parse_matrix("2\n1 0\n0 2x\n").unwrap_err();
        assert_eq!(
            err,
            GhxError::Parse {
                line: 3,
                column: 3,
                message: "invalid complex entry '2x'".into()
            }
        );
        assert!(matches!(parse_matrix("2\n1 0\n"), Err(GhxError::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("2\n1 0 0\n0 1\n"), Err(GhxError::Parse { line: 2, column: 5, .. })));
        assert!(matches!(parse_matrix("2\n1 1\n0 1\n"), Err(GhxError::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("0\n"), Err(GhxError::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_matrix(""), Err(GhxError::Parse { .. })));
    }

    #[test]
    fn format_round_trip() {
        let a = HermitianForm::from_upper(3, |j, k| Complex64::new(0.1 * (j + 1) as f64 / 3.0, if j == k { 0.0 } else { -1e-17 * k as f64 }));
        let back = parse_matrix(&format_matrix(&a)).unwrap();
        assert_eq!(a, back);
    }
}
