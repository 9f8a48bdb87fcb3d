//! Dense Matrix Market (`array`) reading and writing.
//!
//! Files carry a banner `%%MatrixMarket matrix array <field> general`
//! with field `complex` or `real`, a `rows cols` line, then entries in
//! column-major order, one per line. Complex entries are `re im`.

use std::fs;
use std::path::{Path, PathBuf};

use bcinv_core::{c64, CMatrix, C64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MtxError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Parse failure located at a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

fn parse_banner(line: &str) -> Result<Field, ParseError> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return fail(1, "missing %%MatrixMarket banner");
    }
    if tokens.len() != 5 {
        return fail(
            1,
            "banner must read `%%MatrixMarket matrix array <field> general`",
        );
    }
    if tokens[1] != "matrix" || tokens[2] != "array" {
        return fail(
            1,
            format!("unsupported object `{} {}`", tokens[1], tokens[2]),
        );
    }
    let field = match tokens[3].as_str() {
        "complex" => Field::Complex,
        "real" => Field::Real,
        other => return fail(1, format!("unsupported field `{other}`")),
    };
    if tokens[4] != "general" {
        return fail(1, format!("unsupported symmetry `{}`", tokens[4]));
    }
    Ok(field)
}

fn parse_number(token: &str, line: usize) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => fail(line, format!("non-finite value `{token}`")),
        Err(_) => fail(line, format!("cannot parse `{token}` as a number")),
    }
}

/// Parses Matrix Market text. Real files are promoted to complex.
pub fn parse_matrix(text: &str) -> Result<CMatrix, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let field = match lines.next() {
        Some((_, banner)) => parse_banner(banner)?,
        None => return fail(1, "empty file"),
    };
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (dim_line, dims) = match body.next() {
        Some(entry) => entry,
        None => return fail(text.lines().count() + 1, "missing dimension line"),
    };
    let parts: Vec<&str> = dims.split_whitespace().collect();
    let (rows, cols) = match parts.as_slice() {
        [r, c] => match (r.parse::<usize>(), c.parse::<usize>()) {
            (Ok(r), Ok(c)) => (r, c),
            _ => return fail(dim_line, format!("bad dimensions `{}`", dims.trim())),
        },
        _ => return fail(dim_line, "dimension line must hold exactly `rows cols`"),
    };
    let count = rows.checked_mul(cols).ok_or_else(|| ParseError {
        line: dim_line,
        message: "dimensions overflow".into(),
    })?;

    let width = if field == Field::Complex { 2 } else { 1 };
    let mut values: Vec<C64> = Vec::with_capacity(count);
    let mut last_line = dim_line;
    for (line, content) in body {
        last_line = line;
        if values.len() == count {
            return fail(line, format!("more than the {count} declared entries"));
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != width {
            return fail(
                line,
                format!("expected {width} value(s), found {}", tokens.len()),
            );
        }
        let re = parse_number(tokens[0], line)?;
        let im = if width == 2 {
            parse_number(tokens[1], line)?
        } else {
            0.0
        };
        values.push(c64(re, im));
    }
    if values.len() != count {
        return fail(
            last_line + 1,
            format!("expected {count} entries, found {}", values.len()),
        );
    }
    // Column-major on disk, row-major in memory.
    Ok(CMatrix::from_fn(rows, cols, |i, j| values[j * rows + i]))
}

/// Complex Matrix Market text with 17 significant digits per component.
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = m[(i, j)];
            out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
        }
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, MtxError> {
    let text = fs::read_to_string(path).map_err(|source| MtxError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_matrix(&text).map_err(|e| MtxError::Parse {
        path: path.to_owned(),
        line: e.line,
        message: e.message,
    })
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<(), MtxError> {
    fs::write(path, format_matrix(m)).map_err(|source| MtxError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_round_trip_is_byte_identical() {
        let text = format_matrix(&CMatrix::identity(2));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back, CMatrix::identity(2));
        assert_eq!(format_matrix(&back), text);
    }

    #[test]
    fn real_files_promote() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 1\n1.5\n-2\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.shape(), (2, 1));
        assert_eq!(m[(1, 0)], c64(-2.0, 0.0));
        assert!(m.as_slice().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn column_major_order() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m, CMatrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let short = "%%MatrixMarket matrix array complex general\n2 1\n1 0\n";
        assert_eq!(parse_matrix(short).unwrap_err().line, 4);
        let long = "%%MatrixMarket matrix array real general\n1 1\n1\n2\n";
        assert_eq!(parse_matrix(long).unwrap_err().line, 4);
        let bad = "%%MatrixMarket matrix array complex general\n1 1\n1 x\n";
        assert_eq!(parse_matrix(bad).unwrap_err().line, 3);
        let banner = "%%MatrixMarket matrix coordinate real general\n1 1 1\n";
        assert_eq!(parse_matrix(banner).unwrap_err().line, 1);
        let dims = "%%MatrixMarket matrix array real general\n\n2\n";
        assert_eq!(parse_matrix(dims).unwrap_err().line, 3);
        assert_eq!(parse_matrix("").unwrap_err().line, 1);
        let nan = "%%MatrixMarket matrix array real general\n1 1\nNaN\n";
        assert_eq!(parse_matrix(nan).unwrap_err().line, 3);
    }
}
