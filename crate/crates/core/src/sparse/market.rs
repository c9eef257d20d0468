//! Matrix Market coordinate format, real or complex, general or symmetric.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CooMatrix, CsrMatrix};
use crate::cnum::{fmt_shortest, Cplx};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_banner(line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(Error::parse(1, "missing or malformed %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(Error::parse(1, format!("unsupported object '{}'", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::parse(
            1,
            format!("unsupported format '{}', only coordinate is accepted", tokens[2]),
        ));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(Error::parse(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::parse(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CooMatrix> {
    let f = File::open(path)?;
    read_matrix_market_from(BufReader::new(f))
}

/// Parses Matrix Market text. Symmetric files are expanded to full storage
/// and real values are promoted to complex with zero imaginary part.
pub fn read_matrix_market_from<R: BufRead>(reader: R) -> Result<CooMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (field, symmetry) = match lines.next() {
        Some((_, line)) => parse_banner(&line?)?,
        None => return Err(Error::parse(1, "empty file")),
    };

    let mut size = None;
    let mut last_line = 1;
    for (no, line) in lines.by_ref() {
        let line = line?;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let rows: usize = parse_num(it.next(), no, "row count")?;
        let cols: usize = parse_num(it.next(), no, "column count")?;
        let nnz: usize = parse_num(it.next(), no, "entry count")?;
        if it.next().is_some() {
            return Err(Error::parse(no, "trailing tokens on size line"));
        }
        if symmetry == Symmetry::Symmetric && rows != cols {
            return Err(Error::parse(no, "symmetric matrix must be square"));
        }
        size = Some((rows, cols, nnz));
        break;
    }
    let (rows, cols, nnz) = size.ok_or_else(|| Error::parse(last_line, "missing size line"))?;

    let mut coo = CooMatrix::new(rows, cols);
    coo.entries.reserve(if symmetry == Symmetry::Symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if seen == nnz {
            return Err(Error::parse(
                no,
                format!("more entries than the {nnz} declared"),
            ));
        }
        let mut it = t.split_whitespace();
        let i: usize = parse_num(it.next(), no, "row index")?;
        let j: usize = parse_num(it.next(), no, "column index")?;
        if i == 0 || i > rows || j == 0 || j > cols {
            return Err(Error::parse(
                no,
                format!("index ({i}, {j}) outside {rows}x{cols} matrix"),
            ));
        }
        let re: f64 = parse_num(it.next(), no, "real part")?;
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => parse_num(it.next(), no, "imaginary part")?,
        };
        if it.next().is_some() {
            return Err(Error::parse(no, "trailing tokens on entry line"));
        }
        let v = Cplx::new(re, im);
        coo.push(i - 1, j - 1, v);
        if symmetry == Symmetry::Symmetric && i != j {
            coo.push(j - 1, i - 1, v);
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::parse(
            last_line,
            format!("expected {nnz} entries, found {seen}"),
        ));
    }
    Ok(coo)
}

pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let f = File::create(path)?;
    let mut w = BufWriter::new(f);
    write_matrix_market_to(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes a `complex general` coordinate file with one-based indices.
pub fn write_matrix_market_to<W: Write>(a: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {} {}", i + 1, j + 1, fmt_shortest(v.re), fmt_shortest(v.im))?;
        }
    }
    Ok(())
}
