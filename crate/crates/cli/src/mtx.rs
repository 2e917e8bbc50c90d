//! Matrix Market reader and writer for the three model files.
//!
//! `Q` is `coordinate real symmetric` (lower triangle, 1-based), `A` is
//! `coordinate real general`, and the diagonal of `T` is either an
//! `array real general` column or a `coordinate` matrix. Values are written
//! with the shortest representation that reads back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use medalplot_core::dense::{DenseMatrix, DenseSymMatrix};
use medalplot_core::sparse::{DiagonalNoise, Noise, SparseIncidence, SparseSymMatrix};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

/// A parsed file with 0-based entries. Array files list entries in
/// column-major order, keeping only the lower triangle when symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct MtxData {
    pub format: Format,
    pub symmetry: Symmetry,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn parse(text: &str, path: &Path) -> Result<MtxData> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| CliError::parse(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(CliError::parse(path, 1, "expected a '%%MatrixMarket matrix ...' header"));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(CliError::parse(path, 1, format!("unsupported format '{other}'"))),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(CliError::parse(path, 1, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(CliError::parse(path, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| CliError::parse(path, 2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| CliError::parse(path, size_line, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let expected_dims = if format == Format::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(CliError::parse(path, size_line, "malformed size line"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(CliError::parse(path, size_line, "symmetric matrix must be square"));
    }

    let mut entries = Vec::new();
    match format {
        Format::Coordinate => {
            let nnz = dims[2];
            for (line, text) in body.by_ref().take(nnz) {
                let t: Vec<&str> = text.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(CliError::parse(path, line, "expected 'row col value'"));
                }
                let i = parse_index(t[0], rows, path, line)?;
                let j = parse_index(t[1], cols, path, line)?;
                let v = parse_value(t[2], path, line)?;
                if symmetry == Symmetry::Symmetric && j > i {
                    return Err(CliError::parse(path, line, "symmetric files list the lower triangle only"));
                }
                entries.push((i, j, v));
            }
            if entries.len() != nnz {
                return Err(CliError::parse(path, size_line, format!("expected {nnz} entries, found {}", entries.len())));
            }
        }
        Format::Array => {
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| symmetry == Symmetry::General || i >= j)
                .collect();
            let mut values = Vec::with_capacity(positions.len());
            for (line, text) in body.by_ref() {
                for t in text.split_whitespace() {
                    values.push(parse_value(t, path, line)?);
                }
                if values.len() >= positions.len() {
                    break;
                }
            }
            if values.len() != positions.len() {
                return Err(CliError::parse(
                    path,
                    size_line,
                    format!("expected {} values, found {}", positions.len(), values.len()),
                ));
            }
            entries = positions.into_iter().zip(values).map(|((i, j), v)| (i, j, v)).collect();
        }
    }
    if let Some((line, _)) = body.next() {
        return Err(CliError::parse(path, line, "unexpected data after the last entry"));
    }
    Ok(MtxData { format, symmetry, rows, cols, entries })
}

fn parse_index(t: &str, bound: usize, path: &Path, line: usize) -> Result<usize> {
    match t.parse::<usize>() {
        Ok(k) if k >= 1 && k <= bound => Ok(k - 1),
        _ => Err(CliError::parse(path, line, format!("index '{t}' outside 1..={bound}"))),
    }
}

fn parse_value(t: &str, path: &Path, line: usize) -> Result<f64> {
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::parse(path, line, format!("bad value '{t}'"))),
    }
}

pub fn read(path: &Path) -> Result<MtxData> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path)
}

pub fn read_precision(path: &Path) -> Result<SparseSymMatrix> {
    let data = read(path)?;
    if data.rows != data.cols {
        return Err(CliError::parse(path, 1, "Q must be square"));
    }
    let triplets = match data.symmetry {
        Symmetry::Symmetric => data.entries,
        Symmetry::General => lower_of_general(&data, path)?,
    };
    Ok(SparseSymMatrix::from_triplets(data.rows, &triplets)?)
}

/// Lower triangle of a general square file, which must be symmetric.
fn lower_of_general(data: &MtxData, path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut map = std::collections::BTreeMap::new();
    for &(i, j, v) in &data.entries {
        *map.entry((i, j)).or_insert(0.0) += v;
    }
    for (&(i, j), &v) in &map {
        if map.get(&(j, i)).copied().unwrap_or(0.0) != v {
            return Err(CliError::parse(path, 1, format!("general matrix is not symmetric at ({}, {})", i + 1, j + 1)));
        }
    }
    Ok(map.into_iter().filter(|&((i, j), _)| i >= j).map(|((i, j), v)| (i, j, v)).collect())
}

pub fn read_incidence(path: &Path) -> Result<SparseIncidence> {
    let data = read(path)?;
    if data.symmetry != Symmetry::General {
        return Err(CliError::parse(path, 1, "A must be a general matrix"));
    }
    Ok(SparseIncidence::from_triplets(data.rows, data.cols, &data.entries)?)
}

/// Reads `T`. A single column, or a square matrix with only diagonal
/// entries, gives diagonal noise; any off-diagonal entry gives dense noise.
pub fn read_noise(path: &Path) -> Result<Noise> {
    let data = read(path)?;
    if data.cols == 1 && data.symmetry == Symmetry::General {
        let mut diag = vec![0.0; data.rows];
        for &(i, _, v) in &data.entries {
            diag[i] += v;
        }
        return Ok(Noise::Diagonal(DiagonalNoise::new(diag)?));
    }
    if data.rows != data.cols {
        return Err(CliError::parse(path, 1, "T must be a column vector or a square matrix"));
    }
    let m = data.rows;
    let off_diagonal = data.entries.iter().any(|&(i, j, v)| i != j && v != 0.0);
    if !off_diagonal {
        let mut diag = vec![0.0; m];
        for &(i, _, v) in &data.entries {
            diag[i] += v;
        }
        return Ok(Noise::Diagonal(DiagonalNoise::new(diag)?));
    }
    let mut dense = DenseMatrix::zeros(m, m);
    for &(i, j, v) in &data.entries {
        dense.row_mut(i)[j] += v;
        if data.symmetry == Symmetry::Symmetric && i != j {
            dense.row_mut(j)[i] += v;
        }
    }
    Ok(Noise::Dense(DenseSymMatrix::new(dense)?))
}

fn header(out: &mut String, kind: &str, comment: &str) {
    let _ = writeln!(out, "%%MatrixMarket matrix {kind}");
    if !comment.is_empty() {
        let _ = writeln!(out, "% {comment}");
    }
}

pub fn format_precision(q: &SparseSymMatrix, comment: &str) -> String {
    let mut out = String::new();
    header(&mut out, "coordinate real symmetric", comment);
    let _ = writeln!(out, "{} {} {}", q.dim(), q.dim(), q.nnz());
    for j in 0..q.dim() {
        let (rows, vals) = q.column(j);
        for (&i, &v) in rows.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
        }
    }
    out
}

pub fn format_incidence(a: &SparseIncidence, comment: &str) -> String {
    let mut out = String::new();
    header(&mut out, "coordinate real general", comment);
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for i in 0..a.rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
        }
    }
    out
}

pub fn format_noise_diagonal(t: &[f64], comment: &str) -> String {
    let mut out = String::new();
    header(&mut out, "array real general", comment);
    let _ = writeln!(out, "{} 1", t.len());
    for v in t {
        let _ = writeln!(out, "{v:e}");
    }
    out
}
