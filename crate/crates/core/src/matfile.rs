//! The `mat` text format.
//!
//! ```text
//! mat R C
//! a11 a12 ... a1C
//! ...
//! aR1 aR2 ... aRC
//! ```
//!
//! Lines whose first non-blank character is `#` are comments. Blank lines
//! are ignored. Writing always produces the canonical form above with
//! single spaces and a trailing newline, so equal matrices serialize to
//! identical bytes.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::matrix::{BitMatrix, IntMatrix};

#[derive(Debug, Error)]
pub enum MatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input: expected {expected} rows, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> MatError {
    MatError::Syntax { line, msg: msg.into() }
}

pub fn parse_matrix(source: impl BufRead) -> Result<IntMatrix, MatError> {
    let mut dims: Option<(usize, usize)> = None;
    let mut data: Vec<i64> = Vec::new();
    let mut rows_seen = 0usize;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match dims {
            None => {
                let mut it = trimmed.split_whitespace();
                if it.next() != Some("mat") {
                    return Err(syntax(lineno, "expected header `mat R C`"));
                }
                let mut dim = |what: &str| -> Result<usize, MatError> {
                    it.next()
                        .ok_or_else(|| syntax(lineno, format!("missing {what} in header")))?
                        .parse()
                        .map_err(|_| syntax(lineno, format!("bad {what} in header")))
                };
                let r = dim("row count")?;
                let c = dim("column count")?;
                if it.next().is_some() {
                    return Err(syntax(lineno, "trailing tokens in header"));
                }
                data.reserve(r.saturating_mul(c).min(1 << 28));
                dims = Some((r, c));
            }
            Some((r, c)) => {
                if rows_seen == r {
                    return Err(syntax(lineno, format!("more than {r} rows")));
                }
                let before = data.len();
                for tok in trimmed.split_whitespace() {
                    let v: i64 = tok
                        .parse()
                        .map_err(|_| syntax(lineno, format!("bad integer `{tok}`")))?;
                    data.push(v);
                }
                let got = data.len() - before;
                if got != c {
                    return Err(syntax(lineno, format!("row has {got} entries, expected {c}")));
                }
                rows_seen += 1;
            }
        }
    }
    let (r, c) = dims.ok_or_else(|| syntax(1, "missing header `mat R C`"))?;
    if rows_seen != r {
        return Err(MatError::Truncated {
            expected: r,
            found: rows_seen,
        });
    }
    let rows = data.chunks(c.max(1)).take(r).map(<[i64]>::to_vec).collect::<Vec<_>>();
    if c == 0 {
        return Ok(IntMatrix::zeros(r, 0));
    }
    Ok(IntMatrix::from_rows(rows).expect("row lengths checked while parsing"))
}

pub fn write_matrix(m: &IntMatrix, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "mat {} {}", m.rows(), m.cols())?;
    let mut line = String::new();
    for r in 0..m.rows() {
        line.clear();
        for (j, v) in m.row(r).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Same bytes as [`write_matrix`] on `m.to_int()`, without the copy.
pub fn write_bit_matrix(m: &BitMatrix, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "mat {} {}", m.rows(), m.cols())?;
    let mut line = Vec::with_capacity(2 * m.cols());
    for r in 0..m.rows() {
        line.clear();
        for c in 0..m.cols() {
            if c > 0 {
                line.push(b' ');
            }
            line.push(if m.get(r, c) { b'1' } else { b'0' });
        }
        line.push(b'\n');
        out.write_all(&line)?;
    }
    Ok(())
}
