//! Composition of re-ranking and fusion, and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::arr::{adaptive_rerank, ArrConfig};
use crate::dff::{fuse, DffConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, DEFAULT_MAX_RANK};
use crate::features::{euclidean_distances, split_features, FeatureSet};
use crate::matrix::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Squared Euclidean distance on the full feature.
    Baseline,
    /// Adaptive re-ranking of the full-feature metric.
    ArrOnly,
    /// Fusion of the sub-feature metrics.
    DffOnly,
    /// Fuse the sub-feature metrics, then re-rank the fused metric.
    DffArr,
    /// Re-rank each sub-feature metric, then fuse.
    ArrDff,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Baseline,
        Strategy::ArrOnly,
        Strategy::DffOnly,
        Strategy::DffArr,
        Strategy::ArrDff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::ArrOnly => "arr_only",
            Strategy::DffOnly => "dff_only",
            Strategy::DffArr => "dff_arr",
            Strategy::ArrDff => "arr_dff",
        }
    }

    pub fn uses_fusion(self) -> bool {
        matches!(self, Strategy::DffOnly | Strategy::DffArr | Strategy::ArrDff)
    }

    pub fn uses_rerank(self) -> bool {
        matches!(self, Strategy::ArrOnly | Strategy::DffArr | Strategy::ArrDff)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSpec {
    pub strategy: Strategy,
    pub arr: ArrConfig,
    pub dff: DffConfig,
}

impl PipelineSpec {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            arr: ArrConfig::default(),
            dff: DffConfig::default(),
        }
    }

    /// Fusion settings with the local kernel size resolved: unless set
    /// explicitly it follows the re-ranking `k0`.
    pub fn resolved_dff(&self) -> DffConfig {
        DffConfig {
            k_local: Some(self.dff.k_local.unwrap_or(self.arr.k0)),
            ..self.dff
        }
    }

    pub fn validate(&self, fs: &FeatureSet) -> Result<()> {
        let n = fs.len();
        if self.strategy.uses_rerank() {
            self.arr.validate(n)?;
        }
        if self.strategy.uses_fusion() {
            self.resolved_dff().validate(n)?;
            crate::features::split_offsets(fs.dim(), self.dff.subfeatures)?;
        }
        Ok(())
    }
}

fn sub_metrics(fs: &FeatureSet, parts: usize) -> Result<Vec<DistanceMatrix>> {
    let split = split_features(fs, parts)?;
    Ok(split.parts().iter().map(euclidean_distances).collect())
}

pub fn run_pipeline(fs: &FeatureSet, spec: &PipelineSpec) -> Result<DistanceMatrix> {
    spec.validate(fs)?;
    let dff = spec.resolved_dff();
    match spec.strategy {
        Strategy::Baseline => Ok(euclidean_distances(fs)),
        Strategy::ArrOnly => adaptive_rerank(&euclidean_distances(fs), &spec.arr),
        Strategy::DffOnly => fuse(&sub_metrics(fs, dff.subfeatures)?, &dff),
        Strategy::DffArr => {
            let fused = fuse(&sub_metrics(fs, dff.subfeatures)?, &dff)?;
            adaptive_rerank(&fused, &spec.arr)
        }
        Strategy::ArrDff => {
            let reranked = sub_metrics(fs, dff.subfeatures)?
                .iter()
                .map(|d| adaptive_rerank(d, &spec.arr))
                .collect::<Result<Vec<_>>>()?;
            fuse(&reranked, &dff)
        }
    }
}

/// Runs the pipeline and evaluates the result.
pub fn run_and_evaluate(fs: &FeatureSet, spec: &PipelineSpec, max_rank: usize) -> Result<EvalReport> {
    evaluate(&run_pipeline(fs, spec)?, fs, max_rank)
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub spec: PipelineSpec,
    pub seed: Option<u64>,
    pub outcome: std::result::Result<EvalReport, String>,
}

pub const DEFAULT_SWEEP_S: [usize; 5] = [2, 4, 6, 8, 10];
pub const DEFAULT_SWEEP_K: [usize; 6] = [1, 5, 10, 15, 20, 25];

/// Evaluates every `(S, k)` combination of `base`; `k` sets the re-ranking
/// `k0` (and the fusion kernel size when that follows `k0`). Failing cells
/// are kept as error rows.
pub fn sweep(
    fs: &FeatureSet,
    base: &PipelineSpec,
    s_values: &[usize],
    k_values: &[usize],
    seed: Option<u64>,
) -> Vec<SweepRow> {
    let cells: Vec<PipelineSpec> = s_values
        .iter()
        .flat_map(|&s| {
            k_values.iter().map(move |&k| {
                let mut spec = *base;
                spec.dff.subfeatures = s;
                spec.arr.k0 = k;
                spec
            })
        })
        .collect();
    cells
        .into_par_iter()
        .map(|spec| SweepRow {
            spec,
            seed,
            outcome: run_and_evaluate(fs, &spec, DEFAULT_MAX_RANK).map_err(|e| e.to_string()),
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "strategy,S,k,c,iters,rank1,mAP,seed";

/// CSV rendering of a sweep. Error rows leave `rank1` and `mAP` empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let (rank1, map) = match &row.outcome {
            Ok(r) => (r.rank1().to_string(), r.map_score.to_string()),
            Err(_) => (String::new(), String::new()),
        };
        let seed = row.seed.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.spec.strategy,
            row.spec.dff.subfeatures,
            row.spec.arr.k0,
            row.spec.arr.increment,
            row.spec.arr.iterations,
            rank1,
            map,
            seed
        ));
    }
    out
}
