//! Text formats for feature sets and distance matrices.
//!
//! Feature file:
//!
//! ```text
//! reid-features v1 <N> <d>
//! <person_id> <camera_id> <probe|gallery> <v1> ... <vd>
//! ```
//!
//! Distance file: a `reid-dist v1 <N>` header followed by `N` rows of `N`
//! floats. Floats are written with 17 significant digits so every value
//! reads back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Label, Role};
use crate::matrix::{DistanceKind, DistanceMatrix};

pub const FEATURES_MAGIC: &str = "reid-features";
pub const DIST_MAGIC: &str = "reid-dist";
pub const VERSION: &str = "v1";

/// Supported on-disk encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    TextV1,
}

/// Canonical float encoding: 17 significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(tok: &str, line: usize, row: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("row {row}: cannot parse {tok:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("row {row}: non-finite value {tok:?}")));
    }
    Ok(v)
}

fn parse_count(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(1, format!("malformed header: missing or invalid {what}")))
}

/// Content lines with their 1-based line numbers; blank lines are skipped.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_features(text: &str) -> Result<FeatureSet> {
    let mut lines = numbered_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "malformed header: empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(FEATURES_MAGIC) || toks.next() != Some(VERSION) {
        return Err(Error::parse(
            hline,
            format!("malformed header: expected \"{FEATURES_MAGIC} {VERSION} <N> <d>\""),
        ));
    }
    let n = parse_count(toks.next(), "row count")?;
    let dim = parse_count(toks.next(), "dimension")?;
    if toks.next().is_some() {
        return Err(Error::parse(hline, "malformed header: trailing tokens"));
    }
    if n < 2 {
        return Err(Error::parse(hline, format!("need at least 2 rows, header declares {n}")));
    }
    if dim == 0 {
        return Err(Error::parse(hline, "dimension must be at least 1"));
    }

    let mut vectors = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (line, text) in lines {
        let row = labels.len() + 1;
        if row > n {
            return Err(Error::parse(line, format!("more than the declared {n} rows")));
        }
        let mut toks = text.split_whitespace();
        let person = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line, format!("row {row}: invalid person id")))?;
        let camera = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line, format!("row {row}: invalid camera id")))?;
        let role: Role = toks
            .next()
            .ok_or_else(|| Error::parse(line, format!("row {row}: missing role")))?
            .parse()
            .map_err(|e| Error::parse(line, format!("row {row}: {e}")))?;
        let values: Vec<&str> = toks.collect();
        if values.len() != dim {
            return Err(Error::parse(
                line,
                format!("row {row}: expected {dim} values, found {}", values.len()),
            ));
        }
        for tok in values {
            vectors.push(parse_float(tok, line, row)?);
        }
        labels.push(Label {
            person,
            camera,
            role,
        });
    }
    if labels.len() != n {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("expected {n} rows, found {}", labels.len()),
        ));
    }
    FeatureSet::new(dim, vectors, labels)
}

pub fn render_features(fs: &FeatureSet) -> String {
    let mut out = String::new();
    writeln!(out, "{FEATURES_MAGIC} {VERSION} {} {}", fs.len(), fs.dim()).unwrap();
    for (i, label) in fs.labels().iter().enumerate() {
        write!(out, "{} {} {}", label.person, label.camera, label.role.as_str()).unwrap();
        for &v in fs.row(i) {
            out.push(' ');
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_distances(text: &str) -> Result<DistanceMatrix> {
    let mut lines = numbered_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "malformed header: empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(DIST_MAGIC) || toks.next() != Some(VERSION) {
        return Err(Error::parse(
            hline,
            format!("malformed header: expected \"{DIST_MAGIC} {VERSION} <N>\""),
        ));
    }
    let n = parse_count(toks.next(), "order")?;
    if toks.next().is_some() {
        return Err(Error::parse(hline, "malformed header: trailing tokens"));
    }
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (line, text) in lines {
        rows += 1;
        if rows > n {
            return Err(Error::parse(line, format!("more than the declared {n} rows")));
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != n {
            return Err(Error::parse(
                line,
                format!("row {rows}: expected {n} values, found {}", toks.len()),
            ));
        }
        for tok in toks {
            let v = parse_float(tok, line, rows)?;
            if v < 0.0 {
                return Err(Error::parse(line, format!("row {rows}: negative distance {tok}")));
            }
            values.push(v);
        }
    }
    if rows != n {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("expected {n} rows, found {rows}"),
        ));
    }
    DistanceMatrix::new(n, values, DistanceKind::Composed)
}

pub fn render_distances(d: &DistanceMatrix) -> String {
    let n = d.order();
    let mut out = String::with_capacity(n * n * 24 + 32);
    writeln!(out, "{DIST_MAGIC} {VERSION} {n}").unwrap();
    for row in d.rows() {
        for (j, &v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn load_features(path: impl AsRef<Path>, format: Format) -> Result<FeatureSet> {
    match format {
        Format::TextV1 => parse_features(&fs::read_to_string(path)?),
    }
}

pub fn write_features(path: impl AsRef<Path>, fs_: &FeatureSet, format: Format) -> Result<()> {
    match format {
        Format::TextV1 => fs::write(path, render_features(fs_))?,
    }
    Ok(())
}

pub fn load_distances(path: impl AsRef<Path>, format: Format) -> Result<DistanceMatrix> {
    match format {
        Format::TextV1 => parse_distances(&fs::read_to_string(path)?),
    }
}

pub fn write_distances(path: impl AsRef<Path>, d: &DistanceMatrix, format: Format) -> Result<()> {
    match format {
        Format::TextV1 => fs::write(path, render_distances(d))?,
    }
    Ok(())
}
