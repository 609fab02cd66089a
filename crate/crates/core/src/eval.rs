//! Single-query CMC / mAP under the cross-camera protocol, and intra/inter
//! identity distance histograms.
//!
//! For each probe the gallery is ranked by the probe's row of the distance
//! matrix (ties by index). Gallery entries that share both identity and
//! camera with the probe are removed from the ranking. Entries with a
//! negative identity are distractors: they are ranked but never count as a
//! match.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{FeatureSet, Label, Role};
use crate::matrix::DistanceMatrix;
use crate::ranking::by_distance;

pub const DEFAULT_MAX_RANK: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramPair {
    /// Shared range of the binned distances.
    pub range: (f64, f64),
    /// Probability mass per bin of same-identity distances.
    pub intra: Vec<f64>,
    /// Probability mass per bin of different-identity distances.
    pub inter: Vec<f64>,
}

impl HistogramPair {
    pub fn bins(&self) -> usize {
        self.intra.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.range.1 - self.range.0) / self.bins() as f64
    }

    /// Per-bin densities; these integrate to one over the range. A zero-width
    /// range is treated as unit width.
    pub fn densities(&self) -> (Vec<f64>, Vec<f64>) {
        let w = self.bin_width();
        let w = if w > 0.0 { w } else { 1.0 / self.bins() as f64 };
        (
            self.intra.iter().map(|m| m / w).collect(),
            self.inter.iter().map(|m| m / w).collect(),
        )
    }

    /// Overlap coefficient `sum_b min(intra_b, inter_b)` in `[0, 1]`.
    pub fn overlap(&self) -> f64 {
        self.intra
            .iter()
            .zip(&self.inter)
            .map(|(a, b)| a.min(*b))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `cmc[r - 1]` is the fraction of valid queries with a match in the top `r`.
    pub cmc: Vec<f64>,
    pub map_score: f64,
    /// Average precision of each valid query, in probe order.
    pub per_query_ap: Vec<f64>,
    pub num_valid_queries: usize,
    /// Probes without any valid gallery match.
    pub num_skipped_queries: usize,
    pub histograms: Option<HistogramPair>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    rank1: f64,
    #[serde(rename = "mAP")]
    map: f64,
    cmc: &'a [f64],
    num_valid_queries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    histograms: Option<&'a HistogramPair>,
}

impl EvalReport {
    pub fn rank1(&self) -> f64 {
        self.cmc[0]
    }

    pub fn to_json(&self) -> String {
        let body = ReportJson {
            rank1: self.rank1(),
            map: self.map_score,
            cmc: &self.cmc,
            num_valid_queries: self.num_valid_queries,
            histograms: self.histograms.as_ref(),
        };
        serde_json::to_string_pretty(&body).expect("report serializes")
    }
}

fn is_match(probe: &Label, cand: &Label) -> bool {
    probe.person >= 0 && cand.person == probe.person
}

fn is_excluded(probe: &Label, cand: &Label) -> bool {
    cand.person == probe.person && cand.camera == probe.camera
}

fn check_order(d: &DistanceMatrix, fs: &FeatureSet) -> Result<()> {
    if d.order() != fs.len() {
        return Err(Error::OrderMismatch {
            features: fs.len(),
            distances: d.order(),
        });
    }
    Ok(())
}

/// Ranks of the true matches (1-based, ascending) for one probe, or `None`
/// when the probe has no valid match.
fn match_ranks(d: &DistanceMatrix, labels: &[Label], gallery: &[usize], q: usize) -> Option<Vec<usize>> {
    let probe = &labels[q];
    let mut cands: Vec<usize> = gallery
        .iter()
        .copied()
        .filter(|&g| !is_excluded(probe, &labels[g]))
        .collect();
    cands.sort_unstable_by(by_distance(d.row(q)));
    let ranks: Vec<usize> = cands
        .iter()
        .enumerate()
        .filter(|(_, &g)| is_match(probe, &labels[g]))
        .map(|(pos, _)| pos + 1)
        .collect();
    (!ranks.is_empty()).then_some(ranks)
}

pub fn evaluate(d: &DistanceMatrix, fs: &FeatureSet, max_rank: usize) -> Result<EvalReport> {
    check_order(d, fs)?;
    if max_rank == 0 {
        return Err(Error::invalid("maximum CMC rank must be at least 1"));
    }
    let labels = fs.labels();
    let gallery: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i].role == Role::Gallery)
        .collect();
    let probes: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i].role == Role::Probe)
        .collect();

    let per_probe: Vec<Option<Vec<usize>>> = probes
        .par_iter()
        .map(|&q| match_ranks(d, labels, &gallery, q))
        .collect();

    let mut cmc_hits = vec![0usize; max_rank];
    let mut per_query_ap = Vec::new();
    for ranks in per_probe.iter().flatten() {
        let ap = ranks
            .iter()
            .enumerate()
            .map(|(m, &r)| (m + 1) as f64 / r as f64)
            .sum::<f64>()
            / ranks.len() as f64;
        per_query_ap.push(ap);
        let first = ranks[0];
        if first <= max_rank {
            cmc_hits[first - 1] += 1;
        }
    }
    let valid = per_query_ap.len();
    if valid == 0 {
        return Err(Error::NoValidQueries);
    }
    let mut cumulative = 0;
    let cmc = cmc_hits
        .iter()
        .map(|&h| {
            cumulative += h;
            cumulative as f64 / valid as f64
        })
        .collect();
    Ok(EvalReport {
        cmc,
        map_score: per_query_ap.iter().sum::<f64>() / valid as f64,
        per_query_ap,
        num_valid_queries: valid,
        num_skipped_queries: probes.len() - valid,
        histograms: None,
    })
}

/// Histograms of probe-to-gallery distances across cameras, split into
/// same-identity and different-identity pairs over a shared min-max range.
pub fn distance_histograms(d: &DistanceMatrix, fs: &FeatureSet, bins: usize) -> Result<HistogramPair> {
    check_order(d, fs)?;
    if bins < 2 {
        return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
    }
    let labels = fs.labels();
    let mut intra = Vec::new();
    let mut inter = Vec::new();
    for (q, probe) in labels.iter().enumerate() {
        if probe.role != Role::Probe {
            continue;
        }
        for (g, cand) in labels.iter().enumerate() {
            if cand.role != Role::Gallery || cand.camera == probe.camera {
                continue;
            }
            if is_match(probe, cand) {
                intra.push(d.get(q, g));
            } else {
                inter.push(d.get(q, g));
            }
        }
    }
    if intra.is_empty() {
        return Err(Error::EmptyPopulation("intra-identity"));
    }
    if inter.is_empty() {
        return Err(Error::EmptyPopulation("inter-identity"));
    }
    let (lo, hi) = intra
        .iter()
        .chain(&inter)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let bin_of = |v: f64| {
        if hi > lo {
            (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
        } else {
            0
        }
    };
    let masses = |vals: &[f64]| {
        let mut counts = vec![0usize; bins];
        for &v in vals {
            counts[bin_of(v)] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / vals.len() as f64)
            .collect::<Vec<_>>()
    };
    Ok(HistogramPair {
        range: (lo, hi),
        intra: masses(&intra),
        inter: masses(&inter),
    })
}
