//! Matrix files: MatrixMarket (array or coordinate; real, integer or
//! complex; general, symmetric, skew-symmetric or hermitian) and a plain
//! whitespace grid whose entries are `a`, `a+bi` or `a-bi`.
//!
//! Vectors are `n × 1` matrices; a single row is also accepted.

use std::path::Path;

use crate::dense::{c, Matrix, Scalar, Vector};
use crate::error::{Error, Location, Result};

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        location: Location { line, column },
        message: message.into(),
    }
}

fn parse_real(tok: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, column, format!("'{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, column, format!("'{tok}' is not finite")));
    }
    Ok(v)
}

/// Parse `a`, `a+bi`, `a-bi` or `bi`.
pub fn parse_scalar(tok: &str) -> Option<Scalar> {
    let real = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let Some(body) = tok.strip_suffix('i') else {
        return real(tok).map(|x| c(x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                s => real(s)?,
            };
            Some(c(real(&body[..k])?, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => real(s)?,
            };
            Some(c(0.0, im))
        }
    }
}

/// Tokens of a line with their 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |t| {
        let offset = t.as_ptr() as usize - line.as_ptr() as usize;
        (line[..offset].chars().count() + 1, t)
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().expect("caller checked the banner");
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[1] != "matrix" {
        return Err(parse_err(1, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match words[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_err(1, 1, format!("unsupported format '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, 1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size_text) = body
        .next()
        .ok_or_else(|| parse_err(text.lines().count().max(1), 1, "missing size line"))?;
    let size: Vec<(usize, &str)> = tokens(size_text).collect();
    let want = if coordinate { 3 } else { 2 };
    if size.len() != want {
        return Err(parse_err(size_line, 1, format!("size line needs {want} integers")));
    }
    let mut dims = [0usize; 3];
    for (k, &(col, tok)) in size.iter().enumerate() {
        dims[k] = tok
            .parse()
            .map_err(|_| parse_err(size_line, col, format!("'{tok}' is not a nonnegative integer")))?;
    }
    let (m, n) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && m != n {
        return Err(parse_err(size_line, 1, "symmetric storage needs a square matrix"));
    }
    let mut a = Matrix::zeros(m, n);
    let value_tokens = if field == Field::Complex { 2 } else { 1 };

    let read_value = |line: usize, toks: &[(usize, &str)]| -> Result<Scalar> {
        let (col, t) = toks[0];
        let re = parse_real(t, line, col)?;
        let im = if field == Field::Complex {
            let (col, t) = toks[1];
            parse_real(t, line, col)?
        } else {
            0.0
        };
        Ok(c(re, im))
    };
    let store = |a: &mut Matrix, i: usize, j: usize, v: Scalar| {
        a.col_mut(j)[i] = v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => a.col_mut(i)[j] = v,
                Symmetry::Skew => a.col_mut(i)[j] = -v,
                Symmetry::Hermitian => a.col_mut(i)[j] = v.conj(),
            }
        }
    };

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (line, l) in body {
            let toks: Vec<(usize, &str)> = tokens(l).collect();
            if toks.len() != 2 + value_tokens {
                return Err(parse_err(line, 1, format!("entry line needs {} fields", 2 + value_tokens)));
            }
            if seen == nnz {
                return Err(parse_err(line, 1, format!("more than the declared {nnz} entries")));
            }
            let mut idx = [0usize; 2];
            for k in 0..2 {
                let (col, t) = toks[k];
                let v: usize = t
                    .parse()
                    .map_err(|_| parse_err(line, col, format!("'{t}' is not an index")))?;
                let bound = if k == 0 { m } else { n };
                if v == 0 || v > bound {
                    return Err(parse_err(line, col, format!("index {v} outside 1..={bound}")));
                }
                idx[k] = v - 1;
            }
            let v = read_value(line, &toks[2..])?;
            store(&mut a, idx[0], idx[1], v);
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(text.lines().count().max(1), 1, format!("expected {nnz} entries, found {seen}")));
        }
        return Ok(a);
    }

    // Array format: column-major; symmetric variants store the lower triangle
    // (strictly lower for skew-symmetric).
    let mut slots = Vec::new();
    for j in 0..n {
        let start = match symmetry {
            Symmetry::General => 0,
            Symmetry::Skew => j + 1,
            _ => j,
        };
        for i in start..m {
            slots.push((i, j));
        }
    }
    let mut pending: Vec<(usize, usize, &str)> = Vec::new();
    for (line, l) in body {
        for (col, t) in tokens(l) {
            pending.push((line, col, t));
        }
    }
    if pending.len() != slots.len() * value_tokens {
        let (line, col) = pending
            .get(slots.len() * value_tokens)
            .map(|&(l, c, _)| (l, c))
            .unwrap_or((text.lines().count().max(1), 1));
        return Err(parse_err(
            line,
            col,
            format!("expected {} values, found {}", slots.len() * value_tokens, pending.len()),
        ));
    }
    for (k, &(i, j)) in slots.iter().enumerate() {
        let chunk = &pending[k * value_tokens..(k + 1) * value_tokens];
        let line = chunk[0].0;
        let toks: Vec<(usize, &str)> = chunk.iter().map(|&(_, c, t)| (c, t)).collect();
        let v = read_value(line, &toks)?;
        store(&mut a, i, j, v);
    }
    Ok(a)
}

fn parse_grid(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut row = Vec::new();
        for (col, tok) in tokens(content) {
            let v = parse_scalar(tok)
                .ok_or_else(|| parse_err(line, col, format!("'{tok}' is not a number of the form a, a+bi or a-bi")))?;
            row.push(v);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::InconsistentRowLength {
                    row: line,
                    expected: first.len(),
                    got: row.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "no matrix entries"));
    }
    Ok(Matrix::from_rows(&rows))
}

/// Parse either format; MatrixMarket is recognised by its banner.
pub fn parse_matrix_str(text: &str) -> Result<Matrix> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(text.trim_start())
    } else {
        parse_grid(text)
    }
}

pub fn parse_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_str(&text)
}

pub fn matrix_to_vector(a: Matrix) -> Result<Vector> {
    match a.shape() {
        (_, 1) => Ok(a.column(0)),
        (1, n) => Ok(Vector::from_vec((0..n).map(|j| a.col(j)[0]).collect())),
        (m, n) => Err(Error::DimensionMismatch(format!(
            "expected a vector, got a {m}x{n} matrix"
        ))),
    }
}

pub fn parse_vector_str(text: &str) -> Result<Vector> {
    matrix_to_vector(parse_matrix_str(text)?)
}

pub fn parse_vector_file(path: impl AsRef<Path>) -> Result<Vector> {
    matrix_to_vector(parse_matrix_file(path)?)
}

/// Real number with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    format!("{x:.16e}")
}

/// `re`, or `re+imi` / `re-imi` when the imaginary part is nonzero.
pub fn format_scalar(z: Scalar) -> String {
    if z.im == 0.0 {
        return format_real(z.re);
    }
    let im = format_real(z.im.abs());
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{sign}{im}i", format_real(z.re))
}

/// MatrixMarket array format, `real` when every entry is real.
pub fn write_matrix_market(a: &Matrix) -> String {
    let real = a.is_real();
    let mut out = format!(
        "%%MatrixMarket matrix array {} general\n{} {}\n",
        if real { "real" } else { "complex" },
        a.rows(),
        a.cols()
    );
    for z in a.as_slice() {
        if real {
            out.push_str(&format_real(z.re));
        } else {
            out.push_str(&format_real(z.re));
            out.push(' ');
            out.push_str(&format_real(z.im));
        }
        out.push('\n');
    }
    out
}

/// Plain grid, one row per line.
pub fn write_grid(a: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols()).map(|j| format_scalar(a.col(j)[i])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::re;

    #[test]
    fn matrix_market_array_identity() {
        let a = parse_matrix_str("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
        assert_eq!(a, Matrix::identity(2));
    }

    #[test]
    fn plain_grid_complex() {
        let a = parse_matrix_str("1+2i 0\n0 1\n").unwrap();
        assert_eq!(a, Matrix::from_rows(&[vec![c(1.0, 2.0), re(0.0)], vec![re(0.0), re(1.0)]]));
    }

    #[test]
    fn scalar_forms() {
        assert_eq!(parse_scalar("3"), Some(c(3.0, 0.0)));
        assert_eq!(parse_scalar("1-2i"), Some(c(1.0, -2.0)));
        assert_eq!(parse_scalar("-1.5e-3+2.5E+2i"), Some(c(-1.5e-3, 250.0)));
        assert_eq!(parse_scalar("1e-5-1e-5i"), Some(c(1e-5, -1e-5)));
        assert_eq!(parse_scalar("-2i"), Some(c(0.0, -2.0)));
        assert_eq!(parse_scalar("2+i"), Some(c(2.0, 1.0)));
        assert_eq!(parse_scalar("1+2j"), None);
        assert_eq!(parse_scalar("nan"), None);
        assert_eq!(parse_scalar("1 + 2i"), None);
    }

    #[test]
    fn coordinate_complex_hermitian() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n% comment\n2 2 2\n1 1 2 0\n2 1 1 -1\n";
        let a = parse_matrix_str(text).unwrap();
        assert_eq!(a.col(0), &[c(2.0, 0.0), c(1.0, -1.0)]);
        assert_eq!(a.col(1), &[c(1.0, 1.0), c(0.0, 0.0)]);
    }

    #[test]
    fn coordinate_skew_and_errors() {
        let a = parse_matrix_str("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n").unwrap();
        assert_eq!(a.col(1)[0], re(-3.0));
        let err = parse_matrix_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { location: Location { line: 3, column: 1 }, .. }), "{err:?}");
        let err = parse_matrix_str("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn array_symmetric_lower_triangle() {
        let a = parse_matrix_str("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(a, Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]));
    }

    #[test]
    fn grid_errors_carry_locations() {
        let err = parse_matrix_str("1 2\n3 x4\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                location: Location { line: 2, column: 3 },
                message: "'x4' is not a number of the form a, a+bi or a-bi".into()
            }
        );
        assert_eq!(
            parse_matrix_str("1 2\n3\n").unwrap_err(),
            Error::InconsistentRowLength { row: 2, expected: 2, got: 1 }
        );
        assert!(parse_matrix_str("\n# nothing\n").is_err());
    }

    #[test]
    fn round_trip_is_lossless() {
        let a = Matrix::from_rows(&[
            vec![c(0.1, -1.0 / 3.0), re(std::f64::consts::PI)],
            vec![re(-1e-300), c(2.0f64.sqrt(), 1e17)],
        ]);
        assert_eq!(parse_matrix_str(&write_matrix_market(&a)).unwrap(), a);
        assert_eq!(parse_matrix_str(&write_grid(&a)).unwrap(), a);
        let r = Matrix::from_real_rows(&[&[1.0 / 7.0, -2.5]]);
        assert!(write_matrix_market(&r).contains(" real "));
        assert_eq!(parse_matrix_str(&write_matrix_market(&r)).unwrap(), r);
    }

    #[test]
    fn vectors_accept_rows_and_columns() {
        assert_eq!(parse_vector_str("1\n2\n3\n").unwrap(), Vector::from_real(&[1.0, 2.0, 3.0]));
        assert_eq!(parse_vector_str("1 2 3\n").unwrap(), Vector::from_real(&[1.0, 2.0, 3.0]));
        assert!(parse_vector_str("1 2\n3 4\n").is_err());
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_scalar(c(1.0, -2.0)), "1.0000000000000000e0-2.0000000000000000e0i");
        assert_eq!(format_scalar(re(0.0)), "0");
        assert_eq!(format_real(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
