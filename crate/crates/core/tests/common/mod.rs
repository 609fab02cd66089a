//! Naive reference implementations and fixtures shared by the integration
//! tests. Nothing here calls into the library's algorithms; only its data
//! types are used to feed inputs in and read outputs back.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use reid_rerank::{DistanceKind, DistanceMatrix, FeatureSet, Label, Role};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[m - 1] + xs[m]) / 2.0
    } else {
        xs[m]
    }
}

/// Random points in `[0, 1)^dim` with random labels.
pub fn random_features(rng: &mut impl Rng, n: usize, dim: usize, ids: i64, cams: i64) -> FeatureSet {
    let vectors = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    let labels = (0..n)
        .map(|i| Label {
            person: rng.random_range(0..ids),
            camera: rng.random_range(1..=cams),
            role: if i % 3 == 0 { Role::Probe } else { Role::Gallery },
        })
        .collect();
    FeatureSet::new(dim, vectors, labels).unwrap()
}

pub fn naive_euclidean(fs: &FeatureSet) -> Vec<Vec<f64>> {
    let n = fs.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for c in 0..fs.dim() {
                let diff = fs.row(i)[c] - fs.row(j)[c];
                s += diff * diff;
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn to_matrix(rows: &[Vec<f64>], kind: DistanceKind) -> DistanceMatrix {
    DistanceMatrix::from_rows(rows, kind).unwrap()
}

/// Indices of `row` sorted ascending by value, ties by index.
pub fn reference_order(row: &[f64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize)> = row.iter().copied().zip(0..).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    pairs.into_iter().map(|p| p.1).collect()
}

/// First `k` entries of each full reference rank list.
pub fn naive_top_k(d: &[Vec<f64>], k: usize) -> Vec<HashSet<usize>> {
    d.iter()
        .map(|row| reference_order(row).into_iter().take(k).collect())
        .collect()
}

pub fn naive_reciprocal(d: &[Vec<f64>], k: usize) -> Vec<HashSet<usize>> {
    let top = naive_top_k(d, k);
    (0..d.len())
        .map(|i| {
            (0..d.len())
                .filter(|&j| top[i].contains(&j) && top[j].contains(&i))
                .collect()
        })
        .collect()
}

pub fn naive_jaccard(sets: &[HashSet<usize>]) -> Vec<Vec<f64>> {
    sets.iter()
        .map(|a| {
            sets.iter()
                .map(|b| {
                    let inter = a.intersection(b).count();
                    let union = a.union(b).count();
                    1.0 - inter as f64 / union as f64
                })
                .collect()
        })
        .collect()
}

/// CMC (length `max_rank`), mAP and valid-query count, computed directly
/// from the labels.
pub fn naive_evaluate(d: &[Vec<f64>], labels: &[Label], max_rank: usize) -> Option<(Vec<f64>, f64, usize)> {
    let mut cmc = vec![0.0; max_rank];
    let mut ap_sum = 0.0;
    let mut valid = 0;
    for (q, probe) in labels.iter().enumerate() {
        if probe.role != Role::Probe {
            continue;
        }
        let mut ranked: Vec<(f64, usize)> = Vec::new();
        for (g, cand) in labels.iter().enumerate() {
            let junk = cand.person == probe.person && cand.camera == probe.camera;
            if cand.role == Role::Gallery && !junk {
                ranked.push((d[q][g], g));
            }
        }
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut hits = 0;
        let mut precision_sum = 0.0;
        let mut first_hit = None;
        for (pos, &(_, g)) in ranked.iter().enumerate() {
            if probe.person >= 0 && labels[g].person == probe.person {
                hits += 1;
                precision_sum += hits as f64 / (pos + 1) as f64;
                first_hit.get_or_insert(pos);
            }
        }
        let Some(first) = first_hit else { continue };
        valid += 1;
        ap_sum += precision_sum / hits as f64;
        for c in cmc.iter_mut().skip(first) {
            *c += 1.0;
        }
    }
    if valid == 0 {
        return None;
    }
    Some((cmc.iter().map(|c| c / valid as f64).collect(), ap_sum / valid as f64, valid))
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                out[i][j] += a[i][m] * b[m][j];
            }
        }
    }
    out
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect()
}

/// Dense straight-line multi-graph diffusion. The local kernel keeps the
/// `k_local` nearest points by *distance* (ties by index).
pub fn naive_fuse(
    metrics: &[Vec<Vec<f64>>],
    k_local: usize,
    iterations: usize,
    epsilon: f64,
    renormalize: bool,
) -> Vec<Vec<f64>> {
    let s_count = metrics.len();
    let n = metrics[0].len();
    let mut full = Vec::new();
    let mut local = Vec::new();
    for d in metrics {
        let w: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|v| (-v).exp()).collect()).collect();
        let p: Vec<Vec<f64>> = w
            .iter()
            .map(|r| {
                let deg: f64 = r.iter().sum();
                r.iter().map(|v| v / deg).collect()
            })
            .collect();
        let mut lp = vec![vec![0.0; n]; n];
        for i in 0..n {
            let keep: Vec<usize> = reference_order(&d[i]).into_iter().take(k_local).collect();
            let mut mass = 0.0;
            for &j in &keep {
                lp[i][j] = p[i][j];
                mass += p[i][j];
            }
            if renormalize {
                for &j in &keep {
                    lp[i][j] /= mass;
                }
            }
        }
        full.push(p);
        local.push(lp);
    }
    let mut status = full;
    for _ in 0..iterations {
        let mut next = Vec::new();
        for s in 0..s_count {
            let mut avg = vec![vec![0.0; n]; n];
            for (t, m) in status.iter().enumerate() {
                if t == s {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        avg[i][j] += m[i][j];
                    }
                }
            }
            for row in avg.iter_mut() {
                for v in row.iter_mut() {
                    *v /= (s_count - 1) as f64;
                }
            }
            next.push(matmul(&matmul(&local[s], &avg), &transpose(&local[s])));
        }
        status = next;
    }
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p: f64 = status.iter().map(|m| m[i][j]).sum::<f64>() / s_count as f64;
            out[i][j] = 1.0 / p.max(epsilon);
        }
    }
    out
}

pub fn rows(d: &DistanceMatrix) -> Vec<Vec<f64>> {
    d.rows().map(<[f64]>::to_vec).collect()
}
