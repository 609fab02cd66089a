//! Contextual re-ranking and sub-feature fusion for person re-identification
//! distance matrices.
//!
//! - [`ranking`]: k-reciprocal neighbor sets, Jaccard distance, one
//!   re-ranking round.
//! - [`arr`]: iterated re-ranking with a growing neighborhood.
//! - [`dff`]: fusion of sub-feature metrics by multi-graph diffusion.
//! - [`pipeline`]: the composition strategies and parameter sweeps.
//! - [`eval`]: CMC / mAP and distance histograms.
//! - [`synth`]: a seeded synthetic benchmark.
//! - [`io`]: text formats for features and distance matrices.

pub mod arr;
pub mod dff;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod ranking;
pub mod synth;

pub use arr::{adaptive_rerank, arr_schedule, vanilla_rerank, ArrConfig};
pub use dff::{affinity, diffuse, fuse, localize, row_stochastic, DffConfig, DiffusionState, TransitionMatrix};
pub use error::{Error, Result};
pub use eval::{distance_histograms, evaluate, EvalReport, HistogramPair};
pub use features::{euclidean_distances, split_features, FeatureSet, Label, Role, SubFeatureSplit};
pub use io::{load_distances, load_features, write_distances, write_features, Format};
pub use matrix::{DistanceKind, DistanceMatrix};
pub use pipeline::{run_pipeline, sweep, PipelineSpec, Strategy};
pub use ranking::{combine_final, jaccard_distances, rank_lists, reciprocal_sets, rerank_once, RankList, ReciprocalNeighborhood};
pub use synth::{generate, SynthSpec};
