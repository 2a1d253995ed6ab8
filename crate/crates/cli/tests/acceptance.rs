//! Acceptance suite: thirteen criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the terminal:
//! `cargo test -p spix-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{oracle, random_image, random_map};
use spix_core::algorithms::SlicState;
use spix_core::color::{to_color_space, ColorSpace};
use spix_core::connectivity::enforce_connectivity;
use spix_core::metrics::{
    asa, boundary_recall, compactness, evaluate_entry, explained_variation, intra_cluster_variation,
    mean_distance_to_edge, undersegmentation_bergh, undersegmentation_levin, undersegmentation_np,
};
use spix_core::optimization::{grid_search, objective, ParameterGrid, SearchConfig};
use spix_core::robustness::{robustness_sweep, PerturbationKind};
use spix_core::summary::{average_under_curve, pearson, Curve, K_MAX, K_MIN};
use spix_core::synthetic::{generate_synthetic_set, SyntheticSpec};
use spix_core::tables::{parse_metrics, parse_rank};
use spix_core::{Algorithm, AlgorithmParams, Image, LabelMap, MetricConfig, SegmentationResult, Segmenter};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn spix(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_spix"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning spix: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "spix {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("UTF-8 temp path")
}

/// 100 random canonical maps, 8×8 to 32×32: every self-comparison is perfect.
fn metric_identities() -> Check {
    let start = Instant::now();
    for seed in 0..100u64 {
        let (w, h) = (8 + (seed as usize * 7) % 25, 8 + (seed as usize * 13) % 25);
        let g = random_map(seed, w, h).canonicalize();
        for r in 0..3 {
            ensure!(boundary_recall(&g, &g, r).unwrap() == 1.0, "rec != 1 for seed {seed}, r {r}");
        }
        ensure!(undersegmentation_np(&g, &g).unwrap() == 0.0, "ue_np != 0 for seed {seed}");
        ensure!(undersegmentation_levin(&g, &g).unwrap() == 0.0, "ue_levin != 0 for seed {seed}");
        ensure!(undersegmentation_bergh(&g, &g).unwrap() == 0.0, "ue_bergh != 0 for seed {seed}");
        ensure!(asa(&g, &g).unwrap() == 1.0, "asa != 1 for seed {seed}");
        ensure!(mean_distance_to_edge(&g, &g).unwrap() == 0.0, "mde != 0 for seed {seed}");
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("100 maps in {secs:.3} s"))
}

fn pairs() -> Vec<(LabelMap, LabelMap, Image)> {
    (0..200u64)
        .map(|i| {
            (
                random_map(2 * i + 1000, 16, 16),
                random_map(2 * i + 1001, 16, 16),
                random_image(i, 16, 16, if i % 2 == 0 { 3 } else { 1 }),
            )
        })
        .collect()
}

/// All nine metrics against the brute-force references on 200 pairs.
fn oracle_equivalence() -> Check {
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for (gt, sp, image) in pairs() {
        let mut diffs = vec![
            ("ue_np", undersegmentation_np(&gt, &sp).unwrap() - oracle::ue_np(&gt, &sp)),
            ("ue_levin", undersegmentation_levin(&gt, &sp).unwrap() - oracle::ue_levin(&gt, &sp)),
            ("ue_bergh", undersegmentation_bergh(&gt, &sp).unwrap() - oracle::ue_bergh(&gt, &sp)),
            ("asa", asa(&gt, &sp).unwrap() - oracle::asa(&gt, &sp)),
            ("ev", explained_variation(&image, &sp).unwrap() - oracle::ev(&image, &sp)),
            ("co", compactness(&sp) - oracle::co(&sp)),
            ("icv", intra_cluster_variation(&image, &sp).unwrap() - oracle::icv(&image, &sp)),
            ("mde", mean_distance_to_edge(&gt, &sp).unwrap() - oracle::mde(&gt, &sp)),
        ];
        for r in 0..3 {
            diffs.push(("rec", boundary_recall(&gt, &sp, r).unwrap() - oracle::recall(&gt, &sp, r)));
        }
        for (name, d) in diffs {
            let e = worst.entry(name).or_insert(0.0);
            *e = e.max(d.abs());
        }
    }
    let (name, max) = worst
        .iter()
        .map(|(n, v)| (*n, *v))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nine metrics");
    ensure!(worst.values().all(|&d| d <= 1e-12), "{name} differs by {max:e}");
    Ok(format!("200 pairs, max |diff| {max:.1e} ({name})"))
}

fn asa_bergh_identity() -> Check {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    for (gt, sp, _) in pairs() {
        let x = asa(&gt, &sp).unwrap();
        let y = undersegmentation_bergh(&gt, &sp).unwrap();
        worst = worst.max((x + y - 1.0).abs());
        a.push(x);
        b.push(y);
    }
    ensure!(worst <= 1e-12, "asa + ue_bergh deviates from 1 by {worst:e}");
    let r = pearson(&a, &b).map_err(|e| e.to_string())?;
    ensure!((r + 1.0).abs() <= 1e-9, "pearson = {r}");
    Ok(format!("max |asa+ue_bergh-1| {worst:.1e}, pearson {r:.12}"))
}

fn hand_example() -> Check {
    let gt = LabelMap::from_rows(&[[0, 0, 1, 1]; 4]).unwrap();
    let sp = LabelMap::from_rows(&[[0, 0, 0, 1]; 4]).unwrap();
    let got = [
        undersegmentation_np(&gt, &sp).unwrap(),
        undersegmentation_levin(&gt, &sp).unwrap(),
        undersegmentation_bergh(&gt, &sp).unwrap(),
        asa(&gt, &sp).unwrap(),
    ];
    let reference = [
        oracle::ue_np(&gt, &sp),
        oracle::ue_levin(&gt, &sp),
        oracle::ue_bergh(&gt, &sp),
        oracle::asa(&gt, &sp),
    ];
    let expected = [0.5, 0.75, 0.25, 0.75];
    ensure!(reference == expected, "brute force gives {reference:?}");
    ensure!(got == expected, "library gives {got:?}");
    Ok("ue_np 0.5, ue_levin 0.75, ue_bergh 0.25, asa 0.75".into())
}

fn summary_units() -> Check {
    let avg = |pts: &[(f64, f64)]| average_under_curve(&Curve::new(pts.to_vec()).unwrap(), K_MIN, K_MAX).unwrap();
    let cases = [
        ("constant", avg(&[(200.0, 0.1), (5200.0, 0.1)]), 0.1),
        ("single sample", avg(&[(1000.0, 0.37)]), 0.37),
        ("ramp", avg(&[(200.0, 0.2), (5200.0, 0.0)]), 0.1),
        ("flat extension", avg(&[(1000.0, 0.3), (2000.0, 0.1)]), 0.152),
    ];
    for (name, got, want) in cases {
        ensure!((got - want).abs() <= 1e-12, "{name}: {got} != {want}");
    }
    Ok("constant, single-sample, ramp 0.1, flat extension 0.152".into())
}

fn connectivity_postcondition() -> Check {
    for seed in 0..100u64 {
        let (w, h) = (4 + (seed as usize * 5) % 29, 4 + (seed as usize * 11) % 29);
        let map = random_map(seed + 5000, w, h);
        for min_size in [0, 4, 16] {
            let out = enforce_connectivity(&map, min_size);
            ensure!(oracle::every_label_connected(&out), "disconnected label, seed {seed}, min_size {min_size}");
            ensure!(
                enforce_connectivity(&out, min_size) == out,
                "not idempotent, seed {seed}, min_size {min_size}"
            );
        }
    }
    Ok("100 maps x min_size {0, 4, 16}".into())
}

fn slic_contract() -> Check {
    let image = Image::filled(8, 8, &[90, 140, 200]).unwrap();
    let blocks = LabelMap::from_fn(8, 8, |x, y| (x / 4 + 2 * (y / 4)) as u32).unwrap();
    let r = Algorithm::Slic.segment(&image, &Algorithm::Slic.default_params(4)).unwrap();
    ensure!(r.labels == blocks, "constant 8x8 is not split into 4x4 blocks: {:?}", r.labels.labels());

    let spec = SyntheticSpec {
        width: 32,
        height: 32,
        num_segments: 6,
        noise_sigma: 12.0,
        seed: 0,
        ..SyntheticSpec::default()
    };
    let entry = generate_synthetic_set(&spec, 1).unwrap().remove(0);
    let mut state = SlicState::new(to_color_space(&entry.image, ColorSpace::Lab).unwrap(), 16, 10.0).unwrap();
    state.assign();
    let mut trace = vec![state.objective()];
    for _ in 0..10 {
        state.update();
        trace.push(state.objective());
        state.assign();
        trace.push(state.objective());
    }
    let rises = trace.windows(2).filter(|p| p[1] > p[0] * (1.0 + 1e-12)).count();
    ensure!(rises == 0, "objective rose {rises} times: {trace:?}");
    Ok(format!(
        "exact blocks; objective {:.0} -> {:.0} over 20 steps",
        trace[0],
        trace[trace.len() - 1]
    ))
}

fn high_k_regime() -> Check {
    let start = Instant::now();
    let entries = generate_synthetic_set(&SyntheticSpec::default(), 10).unwrap();
    let config = MetricConfig::default();
    ensure!(config.radius(160, 120) == 1, "recall radius is not 1 at 160x120");
    let mut detail = Vec::new();
    for algo in [Algorithm::Slic, Algorithm::Watershed] {
        let params = algo.default_params(2400);
        let (mut rec, mut ue) = (0.0, 0.0);
        for e in &entries {
            let r = algo.segment(&e.image, &params).map_err(|e| e.to_string())?;
            let m = evaluate_entry(&e.image, &e.ground_truths, &r.labels, &config).unwrap();
            rec += m.rec;
            ue += m.ue_np;
        }
        let (rec, ue) = (rec / 10.0, ue / 10.0);
        ensure!(rec >= 0.99 && ue <= 0.04, "{algo}: Rec {rec:.4}, UE {ue:.4}");
        detail.push(format!("{algo} Rec {rec:.4} UE {ue:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("{} in {secs:.1} s", detail.join(", ")))
}

fn robustness_trends() -> Check {
    let entries = generate_synthetic_set(&SyntheticSpec::default(), 10).unwrap();
    let params = Algorithm::Slic.default_params(400);
    let config = MetricConfig::default();
    let rec = |kind, mags: &[f64]| -> Result<Vec<f64>, String> {
        let rows = robustness_sweep(&Algorithm::Slic, &params, &entries, kind, mags, 0, &config).map_err(|e| e.to_string())?;
        rows.iter()
            .map(|r| r.stats.as_ref().map(|s| s.rec.mean).ok_or_else(|| "all runs failed".to_string()))
            .collect()
    };
    let sp = rec(PerturbationKind::SaltPepper, &[0.0, 0.16])?;
    let blur = rec(PerturbationKind::BoxBlur, &[0.0, 17.0])?;
    ensure!((sp[1] - sp[0]).abs() <= 0.10, "salt-and-pepper drift {:.4}", (sp[1] - sp[0]).abs());
    ensure!(blur[1] < blur[0], "box blur 17 Rec {:.4} >= clean {:.4}", blur[1], blur[0]);
    Ok(format!(
        "salt_pepper Rec {:.4} -> {:.4}, box_blur Rec {:.4} -> {:.4}",
        sp[0], sp[1], blur[0], blur[1]
    ))
}

/// Quality depends only on the parameters, so each combination scores differently.
fn stub(image: &Image, p: &AlgorithmParams) -> spix_core::Result<SegmentationResult> {
    let (w, h) = image.dims();
    let cut_x = (p.compactness as usize).clamp(1, w - 1);
    let cut_y = p.iterations.clamp(1, h - 1);
    let labels = LabelMap::from_fn(w, h, |x, y| u32::from(x >= cut_x) + 2 * u32::from(y >= cut_y))?;
    Ok(SegmentationResult::from_labels(&labels, 1))
}

fn grid_exhaustiveness() -> Check {
    let train = generate_synthetic_set(
        &SyntheticSpec {
            width: 30,
            height: 20,
            num_segments: 4,
            ..SyntheticSpec::default()
        },
        3,
    )
    .unwrap();
    let grid: ParameterGrid = serde_json::from_str(r#"{"compactness": [4, 11, 23], "iterations": [3, 9, 15]}"#).unwrap();
    let config = SearchConfig {
        max_k_deviation: f64::INFINITY,
        ..SearchConfig::default()
    };
    let result = grid_search(&stub, &AlgorithmParams::default(), &grid, &train, 4, &config).map_err(|e| e.to_string())?;
    // Enumerate independently of the search's own trace.
    let mut objectives = Vec::new();
    for c in [4.0, 11.0, 23.0] {
        for it in [3, 9, 15] {
            let p = AlgorithmParams {
                compactness: c,
                iterations: it,
                ..AlgorithmParams::with_k(4)
            };
            let (mut rec, mut ue) = (0.0, 0.0);
            for e in &train {
                let r = stub(&e.image, &p).unwrap();
                let m = evaluate_entry(&e.image, &e.ground_truths, &r.labels, &MetricConfig::default()).unwrap();
                rec += m.rec;
                ue += m.ue_np;
            }
            objectives.push(objective(rec / train.len() as f64, ue / train.len() as f64));
        }
    }
    let min = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    ensure!(result.trace.len() == 9, "trace has {} entries", result.trace.len());
    ensure!(result.objective == min, "returned {} but minimum is {min}", result.objective);
    Ok(format!(
        "best compactness {} iterations {} objective {min:.6}",
        result.best.compactness, result.best.iterations
    ))
}

fn ranking_round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d1 = dir.path().join("d1.csv");
    let d2 = dir.path().join("d2.csv");
    fs::write(
        &d1,
        "algorithm,dataset,amr,aue,auv\nA,d1,0.100000,0.100000,0.1\nB,d1,0.150000,0.150000,0.1\nC,d1,0.200000,0.200000,0.1\n",
    )
    .unwrap();
    fs::write(
        &d2,
        "algorithm,dataset,amr,aue,auv\nA,d2,0.200000,0.200000,0.1\nB,d2,0.100000,0.100000,0.1\nC,d2,0.150000,0.150000,0.1\n",
    )
    .unwrap();
    let out = dir.path().join("rank");
    spix(&["rank", path_str(&d1), path_str(&d2), "--out", path_str(&out)])?;
    let table = parse_rank(&fs::read_to_string(out.join("rank.csv")).unwrap()).map_err(|e| e.to_string())?;
    let got: Vec<(String, f64)> = table.rows.iter().map(|r| (r.algorithm.clone(), r.average_rank)).collect();
    let want = vec![("B".to_string(), 1.5), ("A".to_string(), 2.0), ("C".to_string(), 2.5)];
    ensure!(got == want, "ranks {got:?}");
    Ok("B 1.5, A 2.0, C 2.5 via rank.csv".into())
}

fn sweep_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    spix(&["generate", "--out", path_str(&data), "--count", "4", "--seed", "11"])?;
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "0")] {
        let out = dir.path().join(run);
        spix(&[
            "sweep",
            "--dataset",
            path_str(&data),
            "--algo",
            "slic",
            "--no-timing",
            "--jobs",
            threads,
            "--out",
            path_str(&out),
        ])?;
        outputs.push([
            fs::read(out.join("metrics.csv")).unwrap(),
            fs::read(out.join("summary.csv")).unwrap(),
        ]);
    }
    ensure!(outputs[0][0] == outputs[1][0], "metrics.csv differs between runs");
    ensure!(outputs[0][1] == outputs[1][1], "summary.csv differs between runs");
    let rows = outputs[0][0].iter().filter(|&&b| b == b'\n').count() - 1;
    ensure!(rows == 18 * 4, "metrics.csv has {rows} rows");
    Ok(format!("{rows} metric rows identical across 1 and all threads"))
}

fn write_csv_map(path: &Path, map: &LabelMap) {
    let text: String = map
        .rows()
        .map(|row| row.iter().map(u32::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(path, text).unwrap();
}

/// Two images with one faithful and one deliberately mismatched ground truth.
fn multi_gt_directory() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("bsds");
    fs::create_dir_all(root.join("images")).unwrap();
    let (w, h) = (36, 24);
    type Paint = Box<dyn Fn(usize, usize) -> u32>;
    let scenes: [(&str, Paint, Paint); 2] = [
        ("img_a", Box::new(|x, _| u32::from(x >= 18)), Box::new(|x, y| u32::from(x + y >= 30))),
        (
            "img_b",
            Box::new(|x, y| u32::from(x >= 12) + 2 * u32::from(y >= 12)),
            Box::new(|x, y| u32::from(2 * x + y >= 40)),
        ),
    ];
    let palette = [[30u8, 40, 50], [220, 60, 40], [40, 200, 90], [250, 240, 30]];
    for (id, truth, mismatched) in &scenes {
        let image = Image::from_fn(w, h, 3, |x, y| palette[truth(x, y) as usize].to_vec()).unwrap();
        spix_core::io::write_image(&root.join("images").join(format!("{id}.png")), &image).unwrap();
        let gt_dir = root.join("gt").join(id);
        fs::create_dir_all(&gt_dir).unwrap();
        write_csv_map(&gt_dir.join("0.csv"), &LabelMap::from_fn(w, h, truth).unwrap());
        write_csv_map(&gt_dir.join("1.csv"), &LabelMap::from_fn(w, h, mismatched).unwrap());
    }

    let seg = dir.path().join("seg");
    let eval = dir.path().join("eval");
    let sweep = dir.path().join("sweep");
    spix(&["segment", "--dataset", path_str(&root), "--algo", "slic", "--k", "24", "--label-format", "csv", "--out", path_str(&seg)])?;
    spix(&["eval", "--dataset", path_str(&root), "--labels", path_str(&seg.join("labels")), "--algo", "slic", "--k", "24", "--out", path_str(&eval)])?;
    spix(&["sweep", "--dataset", path_str(&root), "--algo", "slic", "--k", "24,48", "--no-timing", "--out", path_str(&sweep)])?;

    let rows = parse_metrics(&fs::read_to_string(eval.join("metrics.csv")).unwrap()).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 2, "eval wrote {} rows", rows.len());
    let r = MetricConfig::default().radius(w, h);
    let mut detail = Vec::new();
    for row in &rows {
        let sp = spix_core::io::read_label_map(&seg.join("labels").join(format!("{}.csv", row.image_id))).unwrap();
        let gt_dir = root.join("gt").join(&row.image_id);
        let gts: Vec<LabelMap> = (0..2)
            .map(|k| spix_core::io::read_label_map(&gt_dir.join(format!("{k}.csv"))).unwrap())
            .collect();
        let rec: Vec<f64> = gts.iter().map(|g| oracle::recall(g, &sp, r)).collect();
        let ue: Vec<f64> = gts.iter().map(|g| oracle::ue_np(g, &sp)).collect();
        let (rec_min, ue_max) = (rec[0].min(rec[1]), ue[0].max(ue[1]));
        ensure!(rec[0] != rec[1] && ue[0] != ue[1], "{}: ground truths do not disagree", row.image_id);
        ensure!((row.values[0] - rec_min).abs() <= 5e-7, "{}: rec {} but min is {rec_min}", row.image_id, row.values[0]);
        ensure!((row.values[1] - ue_max).abs() <= 5e-7, "{}: ue_np {} but max is {ue_max}", row.image_id, row.values[1]);
        detail.push(format!(
            "{} Rec {:.3}/{:.3}->{:.3} UE {:.3}/{:.3}->{:.3}",
            row.image_id, rec[0], rec[1], row.values[0], ue[0], ue[1], row.values[1]
        ));
    }
    let swept = parse_metrics(&fs::read_to_string(sweep.join("metrics.csv")).unwrap()).map_err(|e| e.to_string())?;
    ensure!(swept.len() == 4 && swept.iter().all(|r| r.k_generated.is_some()), "sweep rows incomplete");
    Ok(detail.join("; "))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 13] = [
        ("metric identity suite", metric_identities),
        ("oracle equivalence", oracle_equivalence),
        ("ASA/UE_Bergh identity", asa_bergh_identity),
        ("worked hand example", hand_example),
        ("AMR/AUE/AUV unit checks", summary_units),
        ("connectivity postcondition", connectivity_postcondition),
        ("SLIC contract", slic_contract),
        ("high-K regime", high_k_regime),
        ("robustness trends", robustness_trends),
        ("grid search exhaustiveness", grid_exhaustiveness),
        ("ranking round trip", ranking_round_trip),
        ("sweep determinism", sweep_determinism),
        ("multi-ground-truth directory", multi_gt_directory),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
