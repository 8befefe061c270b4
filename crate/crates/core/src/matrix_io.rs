//! Plain-text complex matrix format.
//!
//! The first line holds `m n`; each of the following `m` lines holds `n`
//! whitespace-separated entries written `re{sign}imj`, e.g. `0.5-0.25j`.
//! A bare real number is also accepted on input. Blank lines and lines
//! starting with `#` are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numlin::{ComplexMatrix, C64};

/// Formats one entry with 17 significant digits in each part.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

/// Parses `re{+|-}imj`, `imj`, or a bare real.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    let Some(body) = t.strip_suffix(['j', 'J']) else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // The split point is the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().ok()?;
            let im_text = &body[i..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            Some(C64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            Some(C64::new(0.0, im))
        }
    }
}

pub fn read_matrix<R: BufRead>(reader: R) -> Result<ComplexMatrix> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let s = s.trim();
                !s.is_empty() && !s.starts_with('#')
            }
            Err(_) => true,
        });

    let (line_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `m n` header".into(),
    })?;
    let header = header?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad header `{header}`: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: line_no,
            message: format!("header must be `m n`, got `{header}`"),
        });
    };

    let mut entries = vec![C64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        let (line_no, text) = lines.next().ok_or(Error::Parse {
            line: line_no + r + 1,
            message: format!("expected {rows} rows, found {r}"),
        })?;
        let text = text?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {cols} entries, found {}", tokens.len()),
            });
        }
        for (c, tok) in tokens.iter().enumerate() {
            entries[c * rows + r] = parse_complex(tok).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("cannot parse complex entry `{tok}`"),
            })?;
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("trailing data after {rows} rows"),
        });
    }
    ComplexMatrix::from_column_major(rows, cols, entries)
}

pub fn write_matrix<W: Write>(m: &ComplexMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_complex(m.get(r, c))).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn save_matrix(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(m, &mut w)?;
    w.flush()?;
    Ok(())
}
