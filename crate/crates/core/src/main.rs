//! Command-line front end: synthesize features, re-rank, fuse, run
//! composition pipelines, evaluate and sweep.
//!
//! Exit status: 0 on success, 1 on invalid input or arguments, 2 on I/O
//! failure. `RERANK_THREADS` caps the worker thread count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reid_rerank::arr::{ArrConfig, DEFAULT_INCREMENT, DEFAULT_ITERATIONS, DEFAULT_K0};
use reid_rerank::dff::{DffConfig, DEFAULT_DIFFUSION_ITERS, DEFAULT_EPSILON, DEFAULT_SUBFEATURES};
use reid_rerank::eval::DEFAULT_MAX_RANK;
use reid_rerank::io::{render_distances, render_features};
use reid_rerank::pipeline::{sweep_csv, DEFAULT_SWEEP_K, DEFAULT_SWEEP_S};
use reid_rerank::synth::{BENCHMARK_CAM_SHIFT_SIGMA, BENCHMARK_INTRA_SIGMA};
use reid_rerank::{
    distance_histograms, evaluate, generate, load_distances, load_features, run_pipeline, sweep, Error,
    FeatureSet, Format, PipelineSpec, Strategy, SynthSpec,
};

#[derive(Parser, Debug)]
#[command(name = "reid-rerank", version, about = "Re-ranking and fusion of re-identification distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic feature file
    Synth(SynthArgs),
    /// Adaptive re-ranking of the Euclidean metric
    Rerank(RerankArgs),
    /// Fuse sub-feature metrics by diffusion
    Fuse(FuseArgs),
    /// Run a composition strategy
    Pipeline(PipelineArgs),
    /// CMC / mAP of a distance matrix
    Eval(EvalArgs),
    /// Evaluate a grid of S and k values
    Sweep(SweepArgs),
    /// Intra/inter identity distance histograms
    Hist(HistArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Feature file (reid-features v1)
    #[arg(long = "in")]
    input: PathBuf,
    /// Scale each feature row to unit L2 norm before computing distances
    #[arg(long)]
    l2_normalize: bool,
}

#[derive(Args, Debug)]
struct ArrArgs {
    /// Initial neighborhood size
    #[arg(long = "k", visible_alias = "neighbors", default_value_t = DEFAULT_K0)]
    k: usize,
    /// Neighborhood growth per iteration
    #[arg(long = "c", visible_alias = "increment", default_value_t = DEFAULT_INCREMENT)]
    c: usize,
    /// Number of re-ranking iterations
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iters: usize,
    /// Do not rescale intermediate iterates to [0, 1]
    #[arg(long)]
    no_renormalize: bool,
}

impl ArrArgs {
    fn config(&self) -> ArrConfig {
        ArrConfig {
            k0: self.k,
            increment: self.c,
            iterations: self.iters,
            renormalize: !self.no_renormalize,
        }
    }
}

#[derive(Args, Debug)]
struct DffArgs {
    /// Number of sub-features
    #[arg(long = "S", visible_alias = "subfeatures", default_value_t = DEFAULT_SUBFEATURES)]
    s: usize,
    /// Diffusion iterations
    #[arg(long = "t", visible_alias = "diffusion-iters", default_value_t = DEFAULT_DIFFUSION_ITERS)]
    t: usize,
    /// Local transition neighborhood (defaults to --k)
    #[arg(long)]
    k_local: Option<usize>,
    /// Probability floor used when inverting the fused status matrix
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Keep truncated transition rows unnormalized
    #[arg(long)]
    literal_local: bool,
}

impl DffArgs {
    fn config(&self) -> DffConfig {
        DffConfig {
            subfeatures: self.s,
            k_local: self.k_local,
            iterations: self.t,
            epsilon: self.epsilon,
            renormalize_local: !self.literal_local,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 40)]
    ids: usize,
    #[arg(long, default_value_t = 2)]
    cams: usize,
    /// Images per identity per camera
    #[arg(long, default_value_t = 5)]
    per_cam: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = BENCHMARK_INTRA_SIGMA)]
    intra_sigma: f64,
    #[arg(long, default_value_t = BENCHMARK_CAM_SHIFT_SIGMA)]
    cam_shift_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RerankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    arr: ArrArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FuseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    dff: DffArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// baseline, arr_only, dff_only, dff_arr or arr_dff
    #[arg(long, default_value = "arr_dff")]
    strategy: String,
    #[command(flatten)]
    arr: ArrArgs,
    #[command(flatten)]
    dff: DffArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Feature file providing labels and roles
    #[arg(long)]
    features: PathBuf,
    /// Distance file (reid-dist v1)
    #[arg(long)]
    dist: PathBuf,
    /// Longest CMC rank reported
    #[arg(long, default_value_t = DEFAULT_MAX_RANK)]
    rmax: usize,
    /// Also report distance histograms with this many bins
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "arr_dff")]
    strategy: String,
    #[command(flatten)]
    arr: ArrArgs,
    #[command(flatten)]
    dff: DffArgs,
    /// Comma-separated sub-feature counts
    #[arg(long = "S-values", value_delimiter = ',', default_values_t = DEFAULT_SWEEP_S)]
    s_values: Vec<usize>,
    /// Comma-separated initial neighborhood sizes
    #[arg(long = "k-values", value_delimiter = ',', default_values_t = DEFAULT_SWEEP_K)]
    k_values: Vec<usize>,
    /// Seed recorded in the seed column
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HistArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_features(args: &InputArgs) -> Result<FeatureSet, Error> {
    let fs = load_features(&args.input, Format::TextV1)?;
    Ok(if args.l2_normalize { fs.l2_normalized() } else { fs })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pipeline_spec(strategy: &str, arr: &ArrArgs, dff: &DffArgs) -> Result<PipelineSpec, Error> {
    Ok(PipelineSpec {
        strategy: strategy.parse()?,
        arr: arr.config(),
        dff: dff.config(),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth(a) => {
            let fs = generate(&SynthSpec {
                num_identities: a.ids,
                cams: a.cams,
                per_cam: a.per_cam,
                dim: a.dim,
                intra_sigma: a.intra_sigma,
                cam_shift_sigma: a.cam_shift_sigma,
                seed: a.seed,
            })?;
            emit(a.out.as_deref(), &render_features(&fs))
        }
        Command::Rerank(a) => {
            let fs = read_features(&a.input)?;
            let spec = PipelineSpec {
                arr: a.arr.config(),
                ..PipelineSpec::new(Strategy::ArrOnly)
            };
            let d = run_pipeline(&fs, &spec)?;
            emit(a.out.as_deref(), &render_distances(&d))
        }
        Command::Fuse(a) => {
            let fs = read_features(&a.input)?;
            let spec = PipelineSpec {
                dff: a.dff.config(),
                ..PipelineSpec::new(Strategy::DffOnly)
            };
            let d = run_pipeline(&fs, &spec)?;
            emit(a.out.as_deref(), &render_distances(&d))
        }
        Command::Pipeline(a) => {
            let fs = read_features(&a.input)?;
            let d = run_pipeline(&fs, &pipeline_spec(&a.strategy, &a.arr, &a.dff)?)?;
            emit(a.out.as_deref(), &render_distances(&d))
        }
        Command::Eval(a) => {
            let fs = load_features(&a.features, Format::TextV1)?;
            let d = load_distances(&a.dist, Format::TextV1)?;
            let mut report = evaluate(&d, &fs, a.rmax)?;
            if let Some(bins) = a.bins {
                report.histograms = Some(distance_histograms(&d, &fs, bins)?);
            }
            let mut json = report.to_json();
            json.push('\n');
            emit(a.out.as_deref(), &json)
        }
        Command::Sweep(a) => {
            let fs = read_features(&a.input)?;
            let base = pipeline_spec(&a.strategy, &a.arr, &a.dff)?;
            let rows = sweep(&fs, &base, &a.s_values, &a.k_values, a.seed);
            for row in &rows {
                if let Err(e) = &row.outcome {
                    log::error!(
                        "cell S={} k={} failed: {e}",
                        row.spec.dff.subfeatures,
                        row.spec.arr.k0
                    );
                }
            }
            emit(a.out.as_deref(), &sweep_csv(&rows))
        }
        Command::Hist(a) => {
            let fs = load_features(&a.features, Format::TextV1)?;
            let d = load_distances(&a.dist, Format::TextV1)?;
            let h = distance_histograms(&d, &fs, a.bins)?;
            let mut json = serde_json::json!({
                "range": [h.range.0, h.range.1],
                "intra": h.intra,
                "inter": h.inter,
                "overlap": h.overlap(),
            })
            .to_string();
            json.push('\n');
            emit(a.out.as_deref(), &json)
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("RERANK_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("RERANK_THREADS={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}
