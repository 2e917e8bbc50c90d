//! Plain-text companions: observation locations, base-map polylines and
//! ordering permutations.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use medalplot_core::render::{LineStyle, Polyline};
use medalplot_core::sparse::Permutation;

use crate::error::{CliError, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_point(text: &str, path: &Path, line: usize) -> Result<[f64; 2]> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 2 {
        return Err(CliError::parse(path, line, "expected 'x,y'"));
    }
    let mut p = [0.0; 2];
    for (slot, f) in p.iter_mut().zip(&fields) {
        *slot = match f.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => return Err(CliError::parse(path, line, format!("bad coordinate '{f}'"))),
        };
    }
    Ok(p)
}

fn is_header(text: &str) -> bool {
    text.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
}

/// One `x,y` row per observation. `#` lines and an optional first-line
/// header are skipped.
pub fn parse_locations(text: &str, path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if std::mem::take(&mut first) && is_header(line) {
            continue;
        }
        out.push(parse_point(line, path, i + 1)?);
    }
    Ok(out)
}

pub fn read_locations(path: &Path) -> Result<Vec<[f64; 2]>> {
    parse_locations(&read_text(path)?, path)
}

pub fn format_locations(locations: &[[f64; 2]]) -> String {
    let mut out = String::from("x,y\n");
    for p in locations {
        let _ = writeln!(out, "{:e},{:e}", p[0], p[1]);
    }
    out
}

/// Polylines as `x,y` rows separated by blank lines. A `# dashed` or
/// `# solid` line sets the style of the path that follows.
pub fn parse_base_map(text: &str, path: &Path) -> Result<Vec<Polyline>> {
    let mut out = Vec::new();
    let mut current = Polyline::default();
    let mut next_style = LineStyle::Solid;
    let flush = |current: &mut Polyline, out: &mut Vec<Polyline>| {
        if !current.points.is_empty() {
            out.push(std::mem::take(current));
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut current, &mut out);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            match comment.trim().to_ascii_lowercase().as_str() {
                "dashed" => next_style = LineStyle::Dashed,
                "solid" => next_style = LineStyle::Solid,
                _ => {}
            }
            continue;
        }
        if current.points.is_empty() && is_header(line) {
            continue;
        }
        if current.points.is_empty() {
            current.style = next_style;
        }
        current.points.push(parse_point(line, path, i + 1)?);
    }
    flush(&mut current, &mut out);
    Ok(out)
}

pub fn read_base_map(path: &Path) -> Result<Vec<Polyline>> {
    parse_base_map(&read_text(path)?, path)
}

/// Whitespace-separated 0-based indices: entry `k` is the original index
/// eliminated `k`-th.
pub fn read_permutation(path: &Path) -> Result<Permutation> {
    let text = read_text(path)?;
    let mut perm = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for t in line.split_whitespace() {
            perm.push(t.parse::<usize>().map_err(|_| CliError::parse(path, i + 1, format!("bad index '{t}'")))?);
        }
    }
    Ok(Permutation::new(perm)?)
}
