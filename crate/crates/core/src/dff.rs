//! Multi-graph diffusion fusion of sub-feature metrics.
//!
//! Each metric becomes a weighted graph with affinities `exp(-d)`, whose rows
//! are normalized into a Markov transition matrix. A copy truncated to the
//! `k_local` most likely transitions per row acts as the local kernel. Status
//! matrices start as the full transition matrices and are updated
//! synchronously:
//!
//! ```text
//! P_s <- L_s * mean_{s' != s}(P_s') * L_s^T
//! ```
//!
//! After the last step the status matrices are averaged into `P*` and the
//! fused distance is `1 / max(P*, epsilon)`.

use rayon::prelude::*;

use crate::arr::DEFAULT_K0;
use crate::error::{Error, Result};
use crate::matrix::{DistanceKind, DistanceMatrix};

pub const DEFAULT_SUBFEATURES: usize = 4;
pub const DEFAULT_DIFFUSION_ITERS: usize = 1;
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DffConfig {
    /// Number of sub-feature metrics `S`.
    pub subfeatures: usize,
    /// Local kernel size; `None` falls back to the ARR default `k0`.
    pub k_local: Option<usize>,
    /// Diffusion steps.
    pub iterations: usize,
    /// Floor applied to `P*` before taking the reciprocal.
    pub epsilon: f64,
    /// Rescale truncated rows to sum to one. Off keeps the raw truncated
    /// probabilities.
    pub renormalize_local: bool,
}

impl Default for DffConfig {
    fn default() -> Self {
        Self {
            subfeatures: DEFAULT_SUBFEATURES,
            k_local: None,
            iterations: DEFAULT_DIFFUSION_ITERS,
            epsilon: DEFAULT_EPSILON,
            renormalize_local: true,
        }
    }
}

impl DffConfig {
    pub fn k_local_or_default(&self) -> usize {
        self.k_local.unwrap_or(DEFAULT_K0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.subfeatures < 2 {
            return Err(Error::invalid(format!(
                "fusion needs at least 2 sub-features, got {}",
                self.subfeatures
            )));
        }
        let k = self.k_local_or_default();
        if k == 0 || k > n {
            return Err(Error::invalid(format!("local neighborhood k = {k} outside 1..={n}")));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("diffusion needs at least 1 iteration"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Graph edge weights `exp(-d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinity {
    n: usize,
    values: Vec<f64>,
}

impl Affinity {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// Rows sum to one.
    Stochastic,
    /// At most `k_local` nonzeros per row at the row's most likely positions.
    Local { k_local: usize, renormalized: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    values: Vec<f64>,
    kind: TransitionKind,
}

impl TransitionMatrix {
    /// Wraps raw values; used by tests and by callers that build kernels
    /// themselves. The values are checked with [`TransitionMatrix::validate`].
    pub fn new(n: usize, values: Vec<f64>, kind: TransitionKind) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidData(format!("expected {} entries", n * n)));
        }
        let m = Self { n, values, kind };
        m.validate()?;
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidData(format!("transition entry {v} outside [0, 1]")));
        }
        let must_sum_to_one = match self.kind {
            TransitionKind::Stochastic => true,
            TransitionKind::Local { k_local, renormalized } => {
                for i in 0..self.n {
                    let nz = self.row(i).iter().filter(|&&v| v != 0.0).count();
                    if nz > k_local {
                        return Err(Error::InvalidData(format!(
                            "row {i} has {nz} nonzeros, more than k_local = {k_local}"
                        )));
                    }
                }
                renormalized
            }
        };
        if must_sum_to_one {
            for i in 0..self.n {
                let s: f64 = self.row(i).iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidData(format!("row {i} sums to {s}")));
                }
            }
        }
        Ok(())
    }

    /// Nonzero `(column, value)` pairs of each row, in column order.
    fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect()
    }
}

pub fn affinity(d: &DistanceMatrix) -> Affinity {
    Affinity {
        n: d.order(),
        values: d.values().iter().map(|&v| (-v).exp()).collect(),
    }
}

/// Divides every row by its degree.
pub fn row_stochastic(w: &Affinity) -> TransitionMatrix {
    let n = w.n;
    let mut values = w.values.clone();
    for (i, row) in values.chunks_exact_mut(n).enumerate() {
        let degree: f64 = row.iter().sum();
        assert!(degree > 0.0, "row {i} of the affinity matrix has zero degree");
        row.iter_mut().for_each(|v| *v /= degree);
    }
    TransitionMatrix {
        n,
        values,
        kind: TransitionKind::Stochastic,
    }
}

/// Keeps each row's `k_local` largest transition probabilities (ties by
/// ascending column) and zeroes the rest.
///
/// Largest probability is the same as smallest distance because the
/// affinity and degree normalization are monotone per row.
pub fn localize(p: &TransitionMatrix, k_local: usize, renormalize: bool) -> Result<TransitionMatrix> {
    let n = p.n;
    if k_local == 0 || k_local > n {
        return Err(Error::invalid(format!("local neighborhood k = {k_local} outside 1..={n}")));
    }
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, out)| {
            let row = p.row(i);
            let mut idx: Vec<usize> = (0..n).collect();
            let cmp = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
            if k_local < n {
                idx.select_nth_unstable_by(k_local - 1, cmp);
            }
            let keep = &idx[..k_local];
            let mass: f64 = if renormalize {
                let mut kept: Vec<usize> = keep.to_vec();
                kept.sort_unstable();
                kept.iter().map(|&j| row[j]).sum()
            } else {
                1.0
            };
            for &j in keep {
                out[j] = row[j] / mass;
            }
        });
    Ok(TransitionMatrix {
        n,
        values,
        kind: TransitionKind::Local {
            k_local,
            renormalized: renormalize,
        },
    })
}

/// Status of a multi-graph diffusion.
#[derive(Debug, Clone)]
pub struct DiffusionState {
    /// Status matrices, one per graph.
    status: Vec<Vec<f64>>,
    local: Vec<TransitionMatrix>,
    n: usize,
    step: usize,
}

impl DiffusionState {
    /// Starts a diffusion with each graph's status set to its full transition
    /// matrix.
    pub fn new(full: Vec<TransitionMatrix>, local: Vec<TransitionMatrix>) -> Result<Self> {
        if full.len() < 2 || full.len() != local.len() {
            return Err(Error::invalid(format!(
                "diffusion needs matching lists of at least 2 graphs, got {} and {}",
                full.len(),
                local.len()
            )));
        }
        let n = full[0].n;
        for m in full.iter().chain(&local) {
            if m.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.n });
            }
        }
        Ok(Self {
            status: full.into_iter().map(|m| m.values).collect(),
            local,
            n,
            step: 0,
        })
    }

    pub fn graphs(&self) -> usize {
        self.status.len()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Row-major status matrix of graph `s`.
    pub fn status(&self, s: usize) -> &[f64] {
        &self.status[s]
    }

    /// Entrywise mean of the status matrices.
    pub fn overall(&self) -> Vec<f64> {
        let s = self.graphs() as f64;
        (0..self.n * self.n)
            .map(|e| self.status.iter().map(|m| m[e]).sum::<f64>() / s)
            .collect()
    }
}

/// One synchronous diffusion step: every graph reads the previous
/// generation of the others.
pub fn diffuse(state: &DiffusionState) -> DiffusionState {
    let n = state.n;
    let graphs = state.graphs();
    let status: Vec<Vec<f64>> = (0..graphs)
        .into_par_iter()
        .map(|s| {
            let others = (graphs - 1) as f64;
            let mean: Vec<f64> = (0..n * n)
                .map(|e| {
                    let mut acc = 0.0;
                    for (t, m) in state.status.iter().enumerate() {
                        if t != s {
                            acc += m[e];
                        }
                    }
                    acc / others
                })
                .collect();
            conjugate(&state.local[s], &mean, n)
        })
        .collect();
    DiffusionState {
        status,
        local: state.local.clone(),
        n,
        step: state.step + 1,
    }
}

/// `L * A * L^T` exploiting the row sparsity of `L`.
fn conjugate(local: &TransitionMatrix, a: &[f64], n: usize) -> Vec<f64> {
    let sparse = local.sparse_rows();
    // left = L * A
    let mut left = vec![0.0; n * n];
    left.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        for &(m, w) in &sparse[i] {
            let arow = &a[m * n..(m + 1) * n];
            for (o, &v) in out.iter_mut().zip(arow) {
                *o += w * v;
            }
        }
    });
    // out(i, j) = sum_b left(i, b) * L(j, b)
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let lrow = &left[i * n..(i + 1) * n];
        for (j, o) in row.iter_mut().enumerate() {
            *o = sparse[j].iter().map(|&(b, w)| lrow[b] * w).sum();
        }
    });
    out
}

/// Fuses `S` metrics over the same points into one distance matrix.
pub fn fuse(metrics: &[DistanceMatrix], cfg: &DffConfig) -> Result<DistanceMatrix> {
    if metrics.len() != cfg.subfeatures {
        return Err(Error::invalid(format!(
            "configured for {} sub-features but got {} metrics",
            cfg.subfeatures,
            metrics.len()
        )));
    }
    let n = metrics.first().map_or(0, DistanceMatrix::order);
    cfg.validate(n)?;
    if let Some(m) = metrics.iter().find(|m| m.order() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: m.order() });
    }
    let k_local = cfg.k_local_or_default();
    let mut full = Vec::with_capacity(metrics.len());
    let mut local = Vec::with_capacity(metrics.len());
    for m in metrics {
        let p = row_stochastic(&affinity(m));
        local.push(localize(&p, k_local, cfg.renormalize_local)?);
        full.push(p);
    }
    let mut state = DiffusionState::new(full, local)?;
    for _ in 0..cfg.iterations {
        state = diffuse(&state);
    }
    let overall = state.overall();
    let values = overall.iter().map(|&p| 1.0 / p.max(cfg.epsilon)).collect();
    DistanceMatrix::from_raw(n, values, DistanceKind::Fused)
}
