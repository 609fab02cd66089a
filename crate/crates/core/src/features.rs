//! Labeled feature sets, even sub-feature splitting and squared Euclidean
//! distances.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DistanceKind, DistanceMatrix};

/// Whether an entry is searched for (probe) or searched in (gallery).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Probe,
    Gallery,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Probe => "probe",
            Role::Gallery => "gallery",
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "probe" => Ok(Role::Probe),
            "gallery" => Ok(Role::Gallery),
            other => Err(format!("unknown role {other:?} (expected probe or gallery)")),
        }
    }
}

/// Per-row labels shared by a feature set and all of its sub-features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    /// Identity; negative values mark distractors.
    pub person: i64,
    pub camera: i64,
    pub role: Role,
}

/// `N` labeled feature vectors of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    dim: usize,
    vectors: Vec<f64>,
    labels: Vec<Label>,
}

impl FeatureSet {
    pub fn new(dim: usize, vectors: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, found {n}")));
        }
        if dim == 0 {
            return Err(Error::InvalidData("feature dimension must be at least 1".into()));
        }
        if vectors.len() != n * dim {
            return Err(Error::InvalidData(format!(
                "expected {} values for {n} rows of width {dim}, found {}",
                n * dim,
                vectors.len()
            )));
        }
        if let Some(pos) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "row {}: non-finite value",
                pos / dim + 1
            )));
        }
        Ok(Self {
            dim,
            vectors,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn probe_count(&self) -> usize {
        self.labels.iter().filter(|l| l.role == Role::Probe).count()
    }

    pub fn gallery_count(&self) -> usize {
        self.labels.iter().filter(|l| l.role == Role::Gallery).count()
    }

    pub fn camera_count(&self) -> usize {
        let mut cams: Vec<i64> = self.labels.iter().map(|l| l.camera).collect();
        cams.sort_unstable();
        cams.dedup();
        cams.len()
    }

    /// Copy with every row scaled to unit L2 norm. Zero rows are left as is.
    pub fn l2_normalized(&self) -> Self {
        let mut vectors = self.vectors.clone();
        for row in vectors.chunks_exact_mut(self.dim) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        Self {
            dim: self.dim,
            vectors,
            labels: self.labels.clone(),
        }
    }

    /// Rows reordered so that output row `i` is input row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len());
        let mut vectors = Vec::with_capacity(self.vectors.len());
        for &p in perm {
            vectors.extend_from_slice(self.row(p));
        }
        Self {
            dim: self.dim,
            vectors,
            labels: perm.iter().map(|&p| self.labels[p]).collect(),
        }
    }

    fn columns(&self, start: usize, end: usize) -> Self {
        let mut vectors = Vec::with_capacity(self.len() * (end - start));
        for i in 0..self.len() {
            vectors.extend_from_slice(&self.row(i)[start..end]);
        }
        Self {
            dim: end - start,
            vectors,
            labels: self.labels.clone(),
        }
    }
}

/// A feature set cut into `S` contiguous column blocks.
#[derive(Debug, Clone)]
pub struct SubFeatureSplit {
    offsets: Vec<usize>,
    parts: Vec<FeatureSet>,
}

impl SubFeatureSplit {
    /// Column boundaries; part `i` covers `offsets[i]..offsets[i + 1]`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn parts(&self) -> &[FeatureSet] {
        &self.parts
    }

    pub fn widths(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Concatenates the parts column-wise back into one feature set.
    pub fn concat(&self) -> FeatureSet {
        let first = &self.parts[0];
        let dim = *self.offsets.last().unwrap();
        let mut vectors = Vec::with_capacity(first.len() * dim);
        for i in 0..first.len() {
            for part in &self.parts {
                vectors.extend_from_slice(part.row(i));
            }
        }
        FeatureSet {
            dim,
            vectors,
            labels: first.labels.clone(),
        }
    }
}

/// Column boundaries of an even split of `dim` columns into `parts` blocks.
/// The first `dim % parts` blocks are one column wider.
pub fn split_offsets(dim: usize, parts: usize) -> Result<Vec<usize>> {
    if parts < 2 {
        return Err(Error::invalid(format!(
            "sub-feature count must be at least 2, got {parts}"
        )));
    }
    if parts > dim {
        return Err(Error::invalid(format!(
            "cannot split {dim} columns into {parts} non-empty sub-features"
        )));
    }
    let (base, extra) = (dim / parts, dim % parts);
    let mut offsets = Vec::with_capacity(parts + 1);
    offsets.push(0);
    for i in 0..parts {
        let width = base + usize::from(i < extra);
        offsets.push(offsets[i] + width);
    }
    Ok(offsets)
}

/// Splits `fs` evenly into `parts` sub-feature sets with identical labels.
pub fn split_features(fs: &FeatureSet, parts: usize) -> Result<SubFeatureSplit> {
    let offsets = split_offsets(fs.dim(), parts)?;
    let parts = offsets
        .windows(2)
        .map(|w| fs.columns(w[0], w[1]))
        .collect();
    Ok(SubFeatureSplit { offsets, parts })
}

/// Squared L2 distance between every pair of rows.
pub fn euclidean_distances(fs: &FeatureSet) -> DistanceMatrix {
    let n = fs.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = fs.row(i);
            ((i + 1)..n)
                .map(|j| {
                    a.iter()
                        .zip(fs.row(j))
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    DistanceMatrix::from_raw(n, values, DistanceKind::Euclidean).expect("square by construction")
}
