//! Matrix Market ingestion into dense complex storage.
//!
//! Supported: `matrix` objects in `coordinate` or `array` format with field
//! `real`, `integer` or `complex` and symmetry `general`, `symmetric` or
//! `skew-symmetric`. Symmetric storage is expanded to full storage and duplicate
//! coordinate entries are summed.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::General => "general",
            Symmetry::Symmetric => "symmetric",
            Symmetry::SkewSymmetric => "skew-symmetric",
        })
    }
}

/// Header information retained from the source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceMeta {
    pub format: Format,
    pub field: Field,
    pub symmetry: Symmetry,
    /// Number of stored entries as read from the file.
    pub nnz: usize,
    /// Coordinate entries whose position had already been seen and were summed.
    pub duplicates_summed: usize,
}

/// A square matrix held in dense complex form.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHandle<T> {
    pub matrix: DenseMatrix<T>,
    /// True iff every imaginary part is exactly zero.
    pub is_real: bool,
    pub source: Option<SourceMeta>,
}

impl<T: Real> MatrixHandle<T> {
    pub fn from_dense(matrix: DenseMatrix<T>) -> Self {
        let is_real = matrix.is_real();
        Self {
            matrix,
            is_real,
            source: None,
        }
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }
}

/// Max over columns of the sum of entry moduli.
pub fn one_norm<T: Real>(m: &MatrixHandle<T>) -> T {
    m.matrix.one_norm()
}

pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<MatrixHandle<T>> {
    let path = path.as_ref();
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(&text)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_value<T: Real>(tok: &str, line: usize) -> Result<T> {
    let fixed;
    let tok = if tok.contains(['d', 'D']) {
        fixed = tok.replace(['d', 'D'], "e");
        fixed.as_str()
    } else {
        tok
    };
    T::from_str_radix(tok, 10).map_err(|_| parse_err(line, format!("bad numeric value `{tok}`")))
}

fn parse_index(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing index"))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad index `{tok}`")))
}

struct Header {
    format: Format,
    field: Field,
    symmetry: Symmetry,
}

fn parse_banner(line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if toks[1] != "matrix" {
        return Err(parse_err(1, format!("unsupported object `{}`", toks[1])));
    }
    let format = match toks[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(parse_err(1, format!("unknown format `{other}`"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(Error::UnsupportedSymmetry(other.to_string())),
    };
    Ok(Header {
        format,
        field,
        symmetry,
    })
}

/// Parses Matrix Market text into a dense handle (1-based indices become 0-based).
pub fn parse_matrix_market<T: Real>(text: &str) -> Result<MatrixHandle<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = parse_banner(banner)?;

    // Skip comments and blank lines everywhere after the banner.
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

    let (size_line_no, size_line) = body
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let mut size = size_line.split_whitespace();
    let rows = parse_index(size.next(), size_line_no)?;
    let cols = parse_index(size.next(), size_line_no)?;
    let declared = match header.format {
        Format::Coordinate => Some(parse_index(size.next(), size_line_no)?),
        Format::Array => None,
    };
    if size.next().is_some() {
        return Err(parse_err(size_line_no, "trailing tokens on size line"));
    }
    if rows != cols {
        return Err(Error::Shape { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Err(parse_err(size_line_no, "matrix order must be positive"));
    }

    let mut m = DenseMatrix::<T>::zeros(n);
    let n_values = match header.field {
        Field::Complex => 2,
        _ => 1,
    };
    let read_value = |toks: &mut std::str::SplitWhitespace<'_>, line: usize| -> Result<Complex<T>> {
        let re = parse_value::<T>(toks.next().ok_or_else(|| parse_err(line, "missing value"))?, line)?;
        let im = if n_values == 2 {
            parse_value::<T>(
                toks.next().ok_or_else(|| parse_err(line, "missing imaginary part"))?,
                line,
            )?
        } else {
            T::zero()
        };
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        Ok(Complex::new(re, im))
    };

    let mut nnz = 0usize;
    let mut duplicates = 0usize;
    match header.format {
        Format::Coordinate => {
            let declared = declared.unwrap_or(0);
            let mut seen = HashSet::with_capacity(declared);
            for (line_no, line) in body {
                if nnz == declared {
                    return Err(parse_err(line_no, format!("more than {declared} entries")));
                }
                let mut toks = line.split_whitespace();
                let i = parse_index(toks.next(), line_no)?;
                let j = parse_index(toks.next(), line_no)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Index { row: i, col: j, n });
                }
                let v = read_value(&mut toks, line_no)?;
                let (i, j) = (i - 1, j - 1);
                if !seen.insert((i, j)) {
                    duplicates += 1;
                }
                place(&mut m, header.symmetry, i, j, v, line_no)?;
                nnz += 1;
            }
            if nnz != declared {
                return Err(parse_err(
                    size_line_no,
                    format!("declared {declared} entries, found {nnz}"),
                ));
            }
        }
        Format::Array => {
            // Column-major; symmetric variants store only the lower triangle.
            let positions: Vec<(usize, usize)> = (0..n)
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .filter(|&(i, j)| match header.symmetry {
                    Symmetry::General => true,
                    Symmetry::Symmetric => i >= j,
                    Symmetry::SkewSymmetric => i > j,
                })
                .collect();
            let mut pos = positions.iter();
            for (line_no, line) in body {
                let &(i, j) = pos
                    .next()
                    .ok_or_else(|| parse_err(line_no, "too many array entries"))?;
                let mut toks = line.split_whitespace();
                let v = read_value(&mut toks, line_no)?;
                place(&mut m, header.symmetry, i, j, v, line_no)?;
                nnz += 1;
            }
            if nnz != positions.len() {
                return Err(parse_err(
                    size_line_no,
                    format!("expected {} array entries, found {nnz}", positions.len()),
                ));
            }
        }
    }

    let is_real = m.is_real();
    Ok(MatrixHandle {
        matrix: m,
        is_real,
        source: Some(SourceMeta {
            format: header.format,
            field: header.field,
            symmetry: header.symmetry,
            nnz,
            duplicates_summed: duplicates,
        }),
    })
}

fn place<T: Real>(
    m: &mut DenseMatrix<T>,
    sym: Symmetry,
    i: usize,
    j: usize,
    v: Complex<T>,
    line: usize,
) -> Result<()> {
    match sym {
        Symmetry::General => m[(i, j)] += v,
        Symmetry::Symmetric => {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        Symmetry::SkewSymmetric => {
            if i == j {
                return Err(parse_err(line, "diagonal entry in skew-symmetric matrix"));
            }
            m[(i, j)] += v;
            m[(j, i)] -= v;
        }
    }
    Ok(())
}

/// Writes every nonzero entry in `coordinate general` form (complex field when any
/// imaginary part is nonzero). Values use the shortest representation that parses
/// back to the same bits.
pub fn write_matrix_market<T: Real>(m: &MatrixHandle<T>) -> String {
    let n = m.order();
    let complex = !m.matrix.is_real();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v = m.matrix[(i, j)];
            if v.re != T::zero() || v.im != T::zero() {
                entries.push((i, j, v));
            }
        }
    }
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{n} {n} {}\n",
        if complex { "complex" } else { "real" },
        entries.len()
    );
    for (i, j, v) in entries {
        if complex {
            out.push_str(&format!("{} {} {:e} {:e}\n", i + 1, j + 1, v.re, v.im));
        } else {
            out.push_str(&format!("{} {} {:e}\n", i + 1, j + 1, v.re));
        }
    }
    out
}
