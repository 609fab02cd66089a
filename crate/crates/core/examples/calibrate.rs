//! Locates the within-identity noise level of the synthetic benchmark by
//! bisection on the median baseline mAP, then reports every strategy at the
//! chosen setting.
//!
//! ```text
//! cargo run --release --example calibrate -- [target_map] [cam_shift_sigma] [seeds]
//! ```

use reid_rerank::eval::DEFAULT_MAX_RANK;
use reid_rerank::pipeline::run_and_evaluate;
use reid_rerank::{distance_histograms, euclidean_distances, generate, run_pipeline, ArrConfig, PipelineSpec, Strategy, SynthSpec};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[m - 1] + xs[m]) / 2.0
    } else {
        xs[m]
    }
}

fn features(sigma: f64, shift: f64, seed: u64) -> reid_rerank::FeatureSet {
    generate(&spec(sigma, shift, seed)).unwrap()
}

fn spec(sigma: f64, shift: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        intra_sigma: sigma,
        cam_shift_sigma: shift,
        ..SynthSpec::benchmark(seed)
    }
}

fn median_map(sigma: f64, shift: f64, seeds: u64, pipeline: &PipelineSpec) -> f64 {
    median(
        (0..seeds)
            .map(|seed| {
                let fs = features(sigma, shift, seed);
                run_and_evaluate(&fs, pipeline, DEFAULT_MAX_RANK).unwrap().map_score
            })
            .collect(),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let target: f64 = args.first().map_or(0.65, |s| s.parse().unwrap());
    let shift: f64 = args.get(1).map_or(0.3, |s| s.parse().unwrap());
    let seeds: u64 = args.get(2).map_or(20, |s| s.parse().unwrap());

    let baseline = PipelineSpec::new(Strategy::Baseline);
    let (mut lo, mut hi) = (0.05, 3.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        // mAP falls as the noise grows
        if median_map(mid, shift, seeds, &baseline) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    println!("intra_sigma = {sigma:.4} (cam_shift_sigma = {shift}, target median mAP {target})");

    let sigma = (sigma * 100.0).round() / 100.0;
    let mut rows = vec![("baseline".to_string(), baseline)];
    for (k0, c, iters) in [(10, 1, 3), (5, 1, 10), (5, 0, 10), (1, 1, 3), (15, 1, 3)] {
        rows.push((
            format!("arr k0={k0} c={c} iters={iters}"),
            PipelineSpec { arr: ArrConfig::new(k0, c, iters), ..PipelineSpec::new(Strategy::ArrOnly) },
        ));
    }
    for strategy in [Strategy::DffOnly, Strategy::DffArr, Strategy::ArrDff] {
        rows.push((strategy.to_string(), PipelineSpec::new(strategy)));
    }
    for (name, p) in &rows {
        println!("{name:>28}: median mAP {:.4}", median_map(sigma, shift, seeds, p));
    }

    let overlaps = |strategy| {
        median(
            (0..seeds.min(10))
                .map(|seed| {
                    let fs = features(sigma, shift, seed);
                    let d = if strategy == Strategy::Baseline {
                        euclidean_distances(&fs)
                    } else {
                        run_pipeline(&fs, &PipelineSpec::new(strategy)).unwrap()
                    };
                    distance_histograms(&d, &fs, 20).unwrap().overlap()
                })
                .collect(),
        )
    };
    println!(
        "histogram overlap (20 bins): baseline {:.4}, dff {:.4}",
        overlaps(Strategy::Baseline),
        overlaps(Strategy::DffOnly)
    );
}
