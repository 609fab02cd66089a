//! Dense square distance matrices.

use crate::error::{Error, Result};

/// Where a distance matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    /// Squared Euclidean distance between feature rows.
    Euclidean,
    /// Jaccard distance between k-reciprocal sets.
    Jaccard,
    /// Normalized base metric plus Jaccard distance (one re-ranking round).
    Final,
    /// Reciprocal of the diffused multi-graph status matrix.
    Fused,
    /// Output of a multi-stage transform, or a matrix of unknown origin.
    Composed,
}

/// An `N x N` row-major matrix of nonnegative distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    /// Builds a matrix and checks the invariants for `kind`.
    pub fn new(n: usize, values: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        let m = Self::from_raw(n, values, kind)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds a matrix without checking entry invariants; only the shape is checked.
    pub fn from_raw(n: usize, values: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidData(format!(
                "expected {} entries for order {n}, found {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self { n, values, kind })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>], kind: DistanceKind) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidData(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::new(n, rows.concat(), kind)
    }

    pub(crate) fn from_fn(n: usize, kind: DistanceKind, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        Self { n, values, kind }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: DistanceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n.max(1))
    }

    /// Smallest and largest entry.
    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// True when every entry holds the same value.
    pub fn is_degenerate(&self) -> bool {
        let (lo, hi) = self.min_max();
        lo == hi
    }

    /// Affine rescale of all entries onto `[0, 1]`.
    ///
    /// A degenerate matrix maps to all zeros and `None` is returned in place
    /// of the scale so callers can report it.
    pub fn min_max_normalized(&self) -> (Self, Option<f64>) {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        // also catches a NaN span
        if span.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            let zeros = Self {
                n: self.n,
                values: vec![0.0; self.values.len()],
                kind: self.kind,
            };
            return (zeros, None);
        }
        let values = self.values.iter().map(|&v| (v - lo) / span).collect();
        (
            Self {
                n: self.n,
                values,
                kind: self.kind,
            },
            Some(span),
        )
    }

    /// Checks the kind-specific invariants: finite, nonnegative entries; zero
    /// diagonal for Euclidean and Jaccard matrices; symmetry for Euclidean ones.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidData(format!(
                        "entry ({i}, {j}) = {v} is not a finite nonnegative distance"
                    )));
                }
            }
        }
        if matches!(self.kind, DistanceKind::Euclidean | DistanceKind::Jaccard) {
            if let Some(i) = (0..n).find(|&i| self.get(i, i) != 0.0) {
                return Err(Error::InvalidData(format!(
                    "diagonal entry {i} is {} for a {:?} matrix",
                    self.get(i, i),
                    self.kind
                )));
            }
        }
        if self.kind == DistanceKind::Euclidean {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (self.get(i, j), self.get(j, i));
                    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
                        return Err(Error::InvalidData(format!(
                            "euclidean matrix is asymmetric at ({i}, {j}): {a} vs {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Permutes both axes: output `(i, j)` is input `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        Self::from_fn(self.n, self.kind, |i, j| self.get(perm[i], perm[j]))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind: self.kind,
        }
    }
}
