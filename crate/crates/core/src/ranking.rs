//! One round of k-reciprocal contextual re-ranking.
//!
//! A round turns a distance matrix into rank lists, keeps the neighbors that
//! appear in each other's top-k lists, measures how much two points'
//! reciprocal sets overlap (Jaccard distance) and adds that to the
//! min-max normalized input metric.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DistanceKind, DistanceMatrix};

/// Orders candidates by distance, then by index.
#[inline]
pub(crate) fn by_distance(row: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b))
}

/// Every point's candidates sorted by ascending distance, ties by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankList {
    n: usize,
    order: Vec<usize>,
}

impl RankList {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.order[i * self.n..(i + 1) * self.n]
    }
}

pub fn rank_lists(d: &DistanceMatrix) -> RankList {
    let n = d.order();
    let mut order: Vec<usize> = Vec::with_capacity(n * n);
    for _ in 0..n {
        order.extend(0..n);
    }
    order
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, row)| row.sort_unstable_by(by_distance(d.row(i))));
    RankList { n, order }
}

/// The `k` nearest points of `i`, always including `i` itself, in rank order.
///
/// When the diagonal is the strict row minimum this is exactly the first `k`
/// entries of the rank list.
fn top_k_row(row: &[f64], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    let take = k - 1;
    let cmp = by_distance(row);
    if take < others.len() && take > 0 {
        others.select_nth_unstable_by(take - 1, &cmp);
        others.truncate(take);
    } else {
        others.truncate(take);
    }
    others.sort_unstable_by(&cmp);
    let mut out = Vec::with_capacity(k);
    // self sits first unless some other point is strictly closer
    let pos = others.partition_point(|&j| cmp(&j, &i) == Ordering::Less);
    out.extend_from_slice(&others[..pos]);
    out.push(i);
    out.extend_from_slice(&others[pos..]);
    out
}

/// Each point's top-k list (self included), in rank order.
pub fn top_k_lists(d: &DistanceMatrix, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = d.order();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "neighborhood size k = {k} outside 1..={n}"
        )));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| top_k_row(d.row(i), i, k))
        .collect())
}

/// k-reciprocal neighbor sets `R(i) = { j : j in top_k(i) and i in top_k(j) }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocalNeighborhood {
    k: usize,
    sets: Vec<Vec<usize>>,
}

impl ReciprocalNeighborhood {
    /// Builds a neighborhood from explicit sets, checking symmetry, self
    /// membership and the size bound.
    pub fn from_sets(k: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        for (i, s) in sets.iter().enumerate() {
            if s.binary_search(&i).is_err() {
                return Err(Error::InvalidData(format!("R({i}) does not contain {i}")));
            }
            if s.len() > k {
                return Err(Error::InvalidData(format!("|R({i})| = {} exceeds k = {k}", s.len())));
            }
            for &j in s {
                if j >= n || sets[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidData(format!("membership of {j} in R({i}) is not mutual")));
                }
            }
        }
        Ok(Self { k, sets })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `R(i)`, sorted ascending.
    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.sets[i].binary_search(&j).is_ok()
    }
}

pub fn reciprocal_sets(d: &DistanceMatrix, k: usize) -> Result<ReciprocalNeighborhood> {
    let n = d.order();
    let tops = top_k_lists(d, k)?;
    let mut member = vec![false; n * n];
    for (i, top) in tops.iter().enumerate() {
        for &j in top {
            member[i * n + j] = true;
        }
    }
    let sets = tops
        .par_iter()
        .enumerate()
        .map(|(i, top)| {
            let mut s: Vec<usize> = top.iter().copied().filter(|&j| member[j * n + i]).collect();
            s.sort_unstable();
            s
        })
        .collect();
    Ok(ReciprocalNeighborhood { k, sets })
}

/// `1 - |R(i) ∩ R(j)| / |R(i) ∪ R(j)|` for every pair.
pub fn jaccard_distances(r: &ReciprocalNeighborhood) -> DistanceMatrix {
    let n = r.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            // j shares m with i iff m ∈ R(i) and j ∈ R(m), by symmetry
            let mut shared = vec![0u32; n];
            for &m in r.set(i) {
                for &j in r.set(m) {
                    shared[j] += 1;
                }
            }
            let size_i = r.set(i).len();
            (0..n)
                .map(|j| {
                    let inter = shared[j] as usize;
                    if inter == 0 {
                        return 1.0;
                    }
                    let union = size_i + r.set(j).len() - inter;
                    1.0 - inter as f64 / union as f64
                })
                .collect()
        })
        .collect();
    DistanceMatrix::from_raw(n, rows.concat(), DistanceKind::Jaccard).expect("square")
}

/// `normalize(base) + jaccard`, with `base` min-max rescaled onto `[0, 1]`.
///
/// A constant `base` normalizes to zeros; that case is reported through the
/// `log` warning channel rather than as an error.
pub fn combine_final(base: &DistanceMatrix, jaccard: &DistanceMatrix) -> Result<DistanceMatrix> {
    if base.order() != jaccard.order() {
        return Err(Error::DimensionMismatch {
            expected: base.order(),
            found: jaccard.order(),
        });
    }
    let (norm, scale) = base.min_max_normalized();
    if scale.is_none() {
        log::warn!("base metric is constant; its normalized contribution is zero");
    }
    let values = norm
        .values()
        .iter()
        .zip(jaccard.values())
        .map(|(a, b)| a + b)
        .collect();
    DistanceMatrix::from_raw(base.order(), values, DistanceKind::Final)
}

/// One full contextual re-ranking round with neighborhood size `k`.
pub fn rerank_once(d: &DistanceMatrix, k: usize) -> Result<DistanceMatrix> {
    let r = reciprocal_sets(d, k)?;
    combine_final(d, &jaccard_distances(&r))
}
