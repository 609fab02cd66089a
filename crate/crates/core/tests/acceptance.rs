//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Run with
//! `cargo test -p reid-rerank --test acceptance`.

#![allow(clippy::needless_range_loop)]

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use reid_rerank::eval::DEFAULT_MAX_RANK;
use reid_rerank::pipeline::{run_and_evaluate, DEFAULT_SWEEP_K, DEFAULT_SWEEP_S};
use reid_rerank::{
    affinity, distance_histograms, euclidean_distances, evaluate, fuse, generate, jaccard_distances, localize,
    rank_lists, reciprocal_sets, row_stochastic, run_pipeline, split_features, sweep, ArrConfig, DffConfig,
    DistanceMatrix, FeatureSet, PipelineSpec, Strategy, SynthSpec,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn benchmark(seed: u64) -> FeatureSet {
    generate(&SynthSpec::benchmark(seed)).unwrap()
}

fn median_map(seeds: u64, spec: &PipelineSpec) -> Result<f64, String> {
    let mut maps = Vec::new();
    for seed in 0..seeds {
        let report = run_and_evaluate(&benchmark(seed), spec, DEFAULT_MAX_RANK)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        maps.push(report.map_score);
    }
    Ok(median(maps))
}

fn arr_spec(k0: usize, increment: usize, iterations: usize) -> PipelineSpec {
    PipelineSpec {
        arr: ArrConfig::new(k0, increment, iterations),
        ..PipelineSpec::new(Strategy::ArrOnly)
    }
}

fn jaccard_oracle() -> Outcome {
    let mut r = rng(1001);
    for case in 0..100 {
        let n = r.random_range(2..=50);
        let k = r.random_range(1..=n.min(10));
        let dim = r.random_range(1..=6);
        let fs = random_features(&mut r, n, dim, 5, 2);
        let d = euclidean_distances(&fs);
        let got = rows(&jaccard_distances(&reciprocal_sets(&d, k).unwrap()));
        let expect = naive_jaccard(&naive_reciprocal(&rows(&d), k));
        if got != expect {
            return Err(format!("case {case} (N={n}, k={k}) differs"));
        }
    }
    Ok("100 instances identical".into())
}

fn evaluate_oracle() -> Outcome {
    let mut r = rng(1002);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for case in 0..100 {
        let n = r.random_range(4..=60);
        let fs = random_features(&mut r, n, 3, (n / 4).max(2) as i64, 3);
        let rmax = r.random_range(1..=20);
        let d = euclidean_distances(&fs);
        match (evaluate(&d, &fs, rmax), naive_evaluate(&rows(&d), fs.labels(), rmax)) {
            (Ok(rep), Some((cmc, map, valid))) => {
                if rep.num_valid_queries != valid {
                    return Err(format!("case {case}: {} valid queries, expected {valid}", rep.num_valid_queries));
                }
                worst = worst.max((rep.map_score - map).abs());
                for (a, b) in rep.cmc.iter().zip(&cmc) {
                    worst = worst.max((a - b).abs());
                }
                checked += 1;
            }
            (Err(_), None) => {}
            (got, expect) => return Err(format!("case {case}: library {got:?}, reference {expect:?}")),
        }
    }
    ensure(worst <= 1e-12, format!("100 instances ({checked} with valid queries), max deviation {worst:.2e}"))
}

fn fuse_oracle() -> Outcome {
    let mut r = rng(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(3..=10);
        let s = r.random_range(2..=3);
        let t = r.random_range(1..=2);
        let k_local = r.random_range(1..=n);
        let renormalize = r.random_bool(0.5);
        let fs = random_features(&mut r, n, 6, 3, 2);
        let metrics: Vec<DistanceMatrix> =
            split_features(&fs, s).unwrap().parts().iter().map(euclidean_distances).collect();
        let cfg = DffConfig {
            subfeatures: s,
            k_local: Some(k_local),
            iterations: t,
            renormalize_local: renormalize,
            ..DffConfig::default()
        };
        let got = fuse(&metrics, &cfg).map_err(|e| e.to_string())?;
        let raw: Vec<_> = metrics.iter().map(rows).collect();
        let expect = naive_fuse(&raw, k_local, t, cfg.epsilon, renormalize);
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((got.get(i, j) - expect[i][j]).abs());
            }
        }
    }
    ensure(worst <= 1e-9, format!("20 instances, max deviation {worst:.2e}"))
}

fn invariants() -> Outcome {
    const CASES: usize = 200;
    let mut r = rng(1004);
    for case in 0..CASES {
        let n = r.random_range(2..=40);
        let k = r.random_range(1..=n.min(12));
        let fs = random_features(&mut r, n, 4, (n / 3).max(2) as i64, 3);
        let d = euclidean_distances(&fs);

        let p = row_stochastic(&affinity(&d));
        let local = localize(&p, k, true).unwrap();
        for i in 0..n {
            for m in [&p, &local] {
                let s: f64 = m.row(i).iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(format!("row sums: case {case}, row {i} sums to {s}"));
                }
            }
        }

        let sets = reciprocal_sets(&d, k).unwrap();
        let dj = jaccard_distances(&sets);
        for i in 0..n {
            if dj.get(i, i) != 0.0 || dj.row(i).iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(format!("Jaccard bounds: case {case}, row {i}"));
            }
            if sets.set(i).iter().any(|&j| !sets.contains(j, i)) {
                return Err(format!("reciprocal symmetry: case {case}, row {i}"));
            }
        }

        if let Ok(rep) = evaluate(&d, &fs, 20) {
            if rep.cmc.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("CMC monotonicity: case {case}"));
            }
        }

        let renormalize = case % 2 == 0;
        let once = localize(&p, k, renormalize).unwrap();
        let twice = localize(&once, k, renormalize).unwrap();
        if once.values().iter().zip(twice.values()).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(format!("localize idempotence: case {case}"));
        }

        let t = d.map(|v| 2.0 * v.sqrt() + 1.0);
        if rank_lists(&t) != rank_lists(&d) || reciprocal_sets(&t, k).unwrap() != sets {
            return Err(format!("monotone transform: case {case}"));
        }
    }
    Ok(format!("6 invariants x {CASES} cases hold"))
}

fn arr_beats_baseline() -> Outcome {
    let base = median_map(20, &PipelineSpec::new(Strategy::Baseline))?;
    let arr = median_map(20, &arr_spec(10, 1, 3))?;
    ensure(arr >= base + 0.02, format!("median mAP arr {arr:.4} vs baseline {base:.4} (+0.02 required)"))
}

fn adaptive_beats_vanilla() -> Outcome {
    let adaptive = median_map(20, &arr_spec(5, 1, 10))?;
    let vanilla = median_map(20, &arr_spec(5, 0, 10))?;
    ensure(adaptive >= vanilla, format!("median mAP c=1 {adaptive:.4} vs c=0 {vanilla:.4}"))
}

fn dff_improves_separation() -> Outcome {
    let dff = PipelineSpec {
        dff: DffConfig { subfeatures: 4, iterations: 1, ..DffConfig::default() },
        ..PipelineSpec::new(Strategy::DffOnly)
    };
    let (mut base_maps, mut dff_maps, mut base_ov, mut dff_ov) = (vec![], vec![], vec![], vec![]);
    for seed in 0..10 {
        let fs = benchmark(seed);
        let d0 = euclidean_distances(&fs);
        let d1 = run_pipeline(&fs, &dff).map_err(|e| e.to_string())?;
        for (d, maps, ov) in [(&d0, &mut base_maps, &mut base_ov), (&d1, &mut dff_maps, &mut dff_ov)] {
            maps.push(evaluate(d, &fs, DEFAULT_MAX_RANK).map_err(|e| e.to_string())?.map_score);
            ov.push(distance_histograms(d, &fs, 20).map_err(|e| e.to_string())?.overlap());
        }
    }
    let (bm, dm, bo, dov) = (median(base_maps), median(dff_maps), median(base_ov), median(dff_ov));
    ensure(
        dm >= bm && dov < bo,
        format!("median mAP dff {dm:.4} vs baseline {bm:.4}; median overlap dff {dov:.4} vs baseline {bo:.4}"),
    )
}

fn arr_dff_beats_dff_arr() -> Outcome {
    let n = benchmark(0).len();
    let arr_dff = median_map(20, &PipelineSpec::new(Strategy::ArrDff))?;
    let dff_arr = median_map(20, &PipelineSpec::new(Strategy::DffArr))?;
    ensure(
        arr_dff >= dff_arr,
        format!("N={n}: median mAP arr_dff {arr_dff:.4} vs dff_arr {dff_arr:.4}"),
    )
}

fn k1_matches_baseline() -> Outcome {
    let fs = benchmark(0);
    let base = evaluate(&euclidean_distances(&fs), &fs, DEFAULT_MAX_RANK).unwrap().map_score;
    let rows = sweep(&fs, &PipelineSpec::new(Strategy::ArrOnly), &DEFAULT_SWEEP_S, &DEFAULT_SWEEP_K, Some(0));
    let mut worst: f64 = 0.0;
    for row in rows.iter().filter(|r| r.spec.arr.k0 == 1) {
        let report = row.outcome.as_ref().map_err(Clone::clone)?;
        worst = worst.max((report.map_score - base).abs());
    }
    ensure(worst <= 0.02, format!("k=1 cells within {worst:.2e} of baseline mAP {base:.4}"))
}

fn cli_is_deterministic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let feats = path("features.txt");
    let dist = path("dist.txt");
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(env!("CARGO_BIN_EXE_reid-rerank"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.success() {
            Ok(())
        } else {
            Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
        }
    };
    run(&["synth", "--ids", "12", "--seed", "9", "--out", &feats])?;
    run(&["pipeline", "--in", &feats, "--strategy", "arr_only", "--k", "5", "--out", &dist])?;

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("synth", vec!["synth", "--ids", "12", "--seed", "9"]),
        ("rerank", vec!["rerank", "--in", &feats, "--k", "5"]),
        ("fuse", vec!["fuse", "--in", &feats, "--S", "4", "--t", "1"]),
        ("pipeline", vec!["pipeline", "--in", &feats, "--strategy", "arr_dff", "--k", "5"]),
        ("eval", vec!["eval", "--features", &feats, "--dist", &dist, "--bins", "10"]),
        ("sweep", vec!["sweep", "--in", &feats, "--S-values", "2,4", "--k-values", "1,5"]),
        ("hist", vec!["hist", "--features", &feats, "--dist", &dist]),
    ];
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let out = path(&format!("{name}-{attempt}.out"));
            let mut full = args.clone();
            full.extend(["--out", &out]);
            run(&full)?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("{name}: reruns differ"));
        }
    }
    Ok(format!("{} subcommands byte-identical on rerun", commands.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "Jaccard vs naive oracle", budget: Some(Duration::from_secs(5)), run: jaccard_oracle },
        Criterion { id: 2, name: "evaluate vs naive evaluator", budget: Some(Duration::from_secs(5)), run: evaluate_oracle },
        Criterion { id: 3, name: "fuse vs dense transcription", budget: Some(Duration::from_secs(5)), run: fuse_oracle },
        Criterion { id: 4, name: "randomized invariants", budget: None, run: invariants },
        Criterion { id: 5, name: "ARR over baseline", budget: Some(Duration::from_secs(60)), run: arr_beats_baseline },
        Criterion { id: 6, name: "adaptive vs vanilla re-ranking", budget: Some(Duration::from_secs(120)), run: adaptive_beats_vanilla },
        Criterion { id: 7, name: "DFF mAP and histogram separation", budget: Some(Duration::from_secs(60)), run: dff_improves_separation },
        Criterion { id: 8, name: "arr_dff vs dff_arr", budget: Some(Duration::from_secs(180)), run: arr_dff_beats_dff_arr },
        Criterion { id: 9, name: "k=1 sweep cell vs baseline", budget: None, run: k1_matches_baseline },
        Criterion { id: 10, name: "CLI determinism", budget: None, run: cli_is_deterministic },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(detail), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("{detail}; took {elapsed:.1?}, budget {budget:?}"));
            }
        }
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("ACCEPTANCE {} {verdict}: {} ({detail}) [{elapsed:.2?}]", c.id, c.name);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
