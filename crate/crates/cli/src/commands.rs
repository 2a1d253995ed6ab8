use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use spix_core::algorithms::ParamValue;
use spix_core::io;
use spix_core::metrics::evaluate_entry;
use spix_core::optimization::{optimize, OptimizationOutcome, ParameterGrid, SearchConfig};
use spix_core::pipeline::{run_sweep, SweepConfig, SweepRecord, DEFAULT_K_LIST};
use spix_core::robustness::{robustness_sweep, PerturbationKind};
use spix_core::summary::rank_algorithms;
use spix_core::synthetic::{generate_synthetic_set, SyntheticSpec};
use spix_core::tables::{
    fmt6, parse_metrics, parse_summary, render_metrics, render_rank, render_robustness_rows, render_summary,
    summary_scores, SummaryRow, METRIC_NAMES, ROBUSTNESS_HEADER,
};
use spix_core::timing::ns_to_ms;
use spix_core::{Algorithm, AlgorithmParams, DatasetEntry, Error, MetricConfig, Segmenter};

use crate::args::*;
use crate::failure::{Classify, CliResult, Failure};
use crate::output::{ensure_dir, write_atomic, RunManifest, MANIFEST_FILE};

pub fn run(command: &Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Segment(a) => segment(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Robustness(a) => robustness(a),
        Command::Rank(a) => rank(a),
        Command::Report(a) => report(a),
    }
}

enum ParamSource {
    Defaults,
    Fixed(AlgorithmParams),
    Anchored(OptimizationOutcome),
}

/// Produces the parameters for any K: defaults, a fixed file, or an
/// interpolated optimization outcome, with flag overrides applied last.
struct ParamResolver {
    algo: Algorithm,
    source: ParamSource,
    overrides: Vec<(String, ParamValue)>,
}

impl ParamResolver {
    fn new(algo: Algorithm, args: &ParamArgs) -> CliResult<Self> {
        let source = match &args.params {
            Some(path) => load_params_file(path)?,
            None => ParamSource::Defaults,
        };
        let mut overrides = Vec::new();
        if let Some(c) = args.compactness {
            overrides.push(("compactness".to_string(), ParamValue::Number(c)));
        }
        if let Some(i) = args.iterations {
            overrides.push(("iterations".to_string(), ParamValue::Number(i as f64)));
        }
        if let Some(cs) = args.color_space {
            overrides.push(("color_space".to_string(), ParamValue::Token(cs.to_string())));
        }
        for item in &args.set {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("--set expects NAME=VALUE, got `{item}`")))?;
            let value: ParamValue = value.parse().expect("infallible");
            if name.trim() == "k" {
                return Err(Failure::usage("use --k to choose K"));
            }
            overrides.push((name.trim().to_string(), value));
        }
        let resolver = Self { algo, source, overrides };
        resolver.at(400).map_err(|e| match e {
            Error::InvalidParameter { .. } => Failure::classify(e),
            other => Failure::Data(other.into()),
        })?;
        Ok(resolver)
    }

    fn at(&self, k: usize) -> spix_core::Result<AlgorithmParams> {
        let mut p = match &self.source {
            ParamSource::Defaults => self.algo.default_params(k),
            ParamSource::Fixed(p) => p.clone(),
            ParamSource::Anchored(outcome) => spix_core::optimization::interpolate_params(outcome, k)?,
        };
        p.k_desired = k;
        for (name, value) in &self.overrides {
            p.set(name, value)?;
        }
        self.algo.validate_params(&p)?;
        Ok(p)
    }
}

/// Accepts an AlgorithmParams object (nested `extra` or flat `extra.<name>`
/// keys, `k` optional) or an `optimize` outcome.
fn load_params_file(path: &Path) -> CliResult<ParamSource> {
    let ctx = || format!("reading parameters {}", path.display());
    let text = fs::read_to_string(path).data(ctx())?;
    let mut value: Value = serde_json::from_str(&text).data(ctx())?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Failure::Data(anyhow::anyhow!("{}: expected a JSON object", path.display())))?;
    if obj.contains_key("anchors") {
        // Traces are audit output; infeasible objectives were written as null.
        obj.remove("traces");
        let outcome: OptimizationOutcome = serde_json::from_value(value).data(ctx())?;
        if outcome.anchors.is_empty() {
            return Err(Failure::Data(anyhow::anyhow!("{}: no anchors", path.display())));
        }
        return Ok(ParamSource::Anchored(outcome));
    }
    let flat: Vec<String> = obj.keys().filter(|k| k.starts_with("extra.")).cloned().collect();
    for key in flat {
        let v = obj.remove(&key).expect("listed key");
        let extra = obj.entry("extra").or_insert_with(|| json!({}));
        let extra = extra
            .as_object_mut()
            .ok_or_else(|| Failure::Data(anyhow::anyhow!("{}: `extra` must be an object", path.display())))?;
        extra.insert(key["extra.".len()..].to_string(), v);
    }
    obj.entry("k").or_insert(json!(400));
    let params: AlgorithmParams = serde_json::from_value(value).data(ctx())?;
    Ok(ParamSource::Fixed(params))
}

fn load_dataset(root: &Path) -> CliResult<Vec<DatasetEntry>> {
    io::load_dataset(root).data(format!("loading dataset {}", root.display()))
}

fn dataset_name(explicit: &Option<String>, root: &Path) -> String {
    explicit.clone().unwrap_or_else(|| {
        root.canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "dataset".to_string())
    })
}

fn finish(dir: &Path, command: &str, args: &impl serde::Serialize, inputs: &[&Path]) -> CliResult<()> {
    RunManifest::new(command, args, inputs)?.write(dir)
}

fn generate(a: &GenerateArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        width: a.width,
        height: a.height,
        num_segments: a.segments,
        color_contrast: a.contrast,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    let entries = generate_synthetic_set(&spec, a.count).map_err(|e| match e {
        Error::InvalidParameter { .. } | Error::InvalidDimensions { .. } => Failure::Usage(e.into()),
        other => Failure::classify(other),
    })?;

    let out = &a.out;
    if out.exists() {
        let replaceable = out.is_dir()
            && (out.join(MANIFEST_FILE).is_file()
                || fs::read_dir(out).systemic(format!("reading {}", out.display()))?.next().is_none());
        if !replaceable {
            return Err(Failure::Systemic(anyhow::anyhow!(
                "{} exists and is not a previous output; refusing to replace it",
                out.display()
            )));
        }
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    ensure_dir(&parent)?;
    let staging = tempfile::Builder::new()
        .prefix(".spix-generate-")
        .tempdir_in(&parent)
        .systemic(format!("staging in {}", parent.display()))?;
    io::save_dataset(staging.path(), &entries, a.label_format.into()).systemic("writing dataset")?;
    finish(staging.path(), "generate", a, &[])?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(staging.path(), fs::Permissions::from_mode(0o755)).systemic("setting permissions")?;
    }
    if out.exists() {
        fs::remove_dir_all(out).systemic(format!("removing {}", out.display()))?;
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, out) {
        let _ = fs::remove_dir_all(&staged);
        return Err(e).systemic(format!("moving dataset to {}", out.display()));
    }
    eprintln!("wrote {} entries to {}", entries.len(), out.display());
    Ok(())
}

fn segment(a: &SegmentArgs) -> CliResult<()> {
    let entries = load_dataset(&a.dataset)?;
    let params = ParamResolver::new(a.algo, &a.params)?.at(a.k)?;
    let labels_dir = a.out.join("labels");
    ensure_dir(&labels_dir)?;
    let format: io::LabelFormat = a.label_format.into();
    let mut table = String::from("image_id,k_desired,k_generated,k_raw,runtime_ms\n");
    let mut failures = 0;
    // Sequential on purpose: runtimes must not compete for cores.
    for entry in &entries {
        match a.algo.segment(&entry.image, &params) {
            Ok(r) => {
                let path = labels_dir.join(format!("{}.{}", entry.id, format.extension()));
                io::write_label_map(&path, &r.labels, format).systemic(format!("writing {}", path.display()))?;
                writeln!(
                    table,
                    "{},{},{},{},{:.3}",
                    entry.id,
                    a.k,
                    r.k_generated,
                    r.k_raw,
                    ns_to_ms(r.runtime_ns)
                )
                .expect("write to string");
            }
            Err(e) => {
                failures += 1;
                eprintln!("{}: {e}", entry.id);
                writeln!(table, "{},{},,,", entry.id, a.k).expect("write to string");
            }
        }
    }
    if !entries.is_empty() && failures == entries.len() {
        return Err(Failure::Systemic(anyhow::anyhow!("every segmentation failed")));
    }
    write_atomic(&a.out.join("segments.csv"), table.as_bytes())?;
    finish(&a.out, "segment", a, &[&a.dataset])
}

fn find_label_file(dir: &Path, id: &str) -> CliResult<PathBuf> {
    ["png", "csv"]
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| Failure::Data(anyhow::anyhow!("no label map for `{id}` in {}", dir.display())))
}

fn eval(a: &EvalArgs) -> CliResult<()> {
    let entries = load_dataset(&a.dataset)?;
    let config = MetricConfig::default();
    let mut records = Vec::with_capacity(entries.len());
    for entry in &entries {
        let path = find_label_file(&a.labels, &entry.id)?;
        let labels = io::read_label_map(&path).data(format!("reading {}", path.display()))?;
        let m = evaluate_entry(&entry.image, &entry.ground_truths, &labels, &config)
            .data(format!("evaluating {}", entry.id))?;
        records.push(SweepRecord {
            image_id: entry.id.clone(),
            k_desired: a.k.unwrap_or(m.k_generated),
            record: Some(m),
            error: None,
        });
    }
    let table = render_metrics(&dataset_name(&a.dataset_name, &a.dataset), &a.algo, &records)?;
    ensure_dir(&a.out)?;
    write_atomic(&a.out.join("metrics.csv"), table.as_bytes())?;
    finish(&a.out, "eval", a, &[&a.dataset, &a.labels])
}

fn sweep(a: &SweepArgs) -> CliResult<()> {
    let entries = load_dataset(&a.dataset)?;
    let resolver = ParamResolver::new(a.algo, &a.params)?;
    let config = SweepConfig {
        k_list: if a.k.is_empty() { DEFAULT_K_LIST.to_vec() } else { a.k.clone() },
        metric: MetricConfig::default(),
        timing: !a.no_timing,
    };
    let out = run_sweep(&a.algo, |k| resolver.at(k), &entries, &config)?;
    let failed = out.records.iter().filter(|r| r.record.is_none()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see the nan rows", out.records.len());
    }
    let name = dataset_name(&a.dataset_name, &a.dataset);
    let metrics = render_metrics(&name, a.algo.id(), &out.records)?;
    let summary = render_summary(&[SummaryRow {
        algorithm: a.algo.id().to_string(),
        dataset: name,
        amr: out.summary.amr,
        aue: out.summary.aue,
        auv: out.summary.auv,
    }])?;
    ensure_dir(&a.out)?;
    write_atomic(&a.out.join("metrics.csv"), metrics.as_bytes())?;
    write_atomic(&a.out.join("summary.csv"), summary.as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&a.dataset];
    inputs.extend(a.params.params.as_deref());
    finish(&a.out, "sweep", a, &inputs)
}

fn optimize_cmd(a: &OptimizeArgs) -> CliResult<()> {
    let ctx = || format!("reading grid {}", a.grid.display());
    let grid: ParameterGrid = serde_json::from_str(&fs::read_to_string(&a.grid).data(ctx())?).data(ctx())?;
    grid.validate().data(ctx())?;
    let train = load_dataset(&a.train)?;
    let resolver = ParamResolver::new(a.algo, &a.params)?;
    if matches!(resolver.source, ParamSource::Anchored(_)) {
        return Err(Failure::usage("--params for optimize must hold a single parameter object"));
    }
    if a.k.is_empty() || a.k.contains(&0) {
        return Err(Failure::usage("--k needs positive anchor values"));
    }
    let base = resolver.at(a.k[0])?;
    let config = SearchConfig {
        metric: MetricConfig::default(),
        max_k_deviation: a.max_k_deviation,
    };
    let outcome = optimize(&a.algo, &base, &grid, &train, &a.k, &config)?;
    for (k, anchor) in &outcome.anchors {
        eprintln!("K={k}: objective {}", fmt6(anchor.objective));
    }
    let mut text = serde_json::to_string_pretty(&outcome).systemic("serializing outcome")?;
    text.push('\n');
    ensure_dir(&a.out)?;
    write_atomic(&a.out.join(format!("params_{}.json", a.algo.id())), text.as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&a.grid, &a.train];
    inputs.extend(a.params.params.as_deref());
    finish(&a.out, "optimize", a, &inputs)
}

fn default_magnitudes(kind: PerturbationKind) -> Vec<f64> {
    match kind {
        PerturbationKind::SaltPepper => vec![0.0, 0.04, 0.08, 0.12, 0.16],
        PerturbationKind::BoxBlur => vec![0.0, 5.0, 9.0, 13.0, 17.0],
        PerturbationKind::GaussianNoise => vec![0.0, 10.0, 20.0, 30.0, 40.0],
        PerturbationKind::GaussianBlur => vec![0.0, 1.0, 2.0, 3.0, 4.0],
        PerturbationKind::Affine => vec![0.0, 5.0, 10.0, 15.0, 20.0],
    }
}

fn robustness(a: &RobustnessArgs) -> CliResult<()> {
    let kinds = if a.perturbation.is_empty() {
        vec![PerturbationKind::SaltPepper, PerturbationKind::BoxBlur]
    } else {
        a.perturbation.clone()
    };
    if !a.magnitudes.is_empty() && kinds.len() != 1 {
        return Err(Failure::usage("--magnitudes needs exactly one --perturbation"));
    }
    let entries = load_dataset(&a.dataset)?;
    if entries.is_empty() {
        return Err(Error::Empty("dataset").into());
    }
    let params = ParamResolver::new(a.algo, &a.params)?.at(a.k)?;
    let mut table = format!("{ROBUSTNESS_HEADER}\n");
    let mut any_ok = false;
    for kind in kinds {
        let magnitudes = if a.magnitudes.is_empty() { default_magnitudes(kind) } else { a.magnitudes.clone() };
        let rows = robustness_sweep(&a.algo, &params, &entries, kind, &magnitudes, a.seed, &MetricConfig::default())?;
        any_ok |= rows.iter().any(|r| r.stats.is_some());
        table.push_str(&render_robustness_rows(a.algo.id(), kind.id(), &rows)?);
    }
    if !any_ok {
        return Err(Failure::Systemic(anyhow::anyhow!("every segmentation failed")));
    }
    ensure_dir(&a.out)?;
    write_atomic(&a.out.join("robustness.csv"), table.as_bytes())?;
    finish(&a.out, "robustness", a, &[&a.dataset])
}

fn rank(a: &RankArgs) -> CliResult<()> {
    let mut rows = Vec::new();
    for path in &a.summaries {
        let ctx = || format!("reading {}", path.display());
        rows.extend(parse_summary(&fs::read_to_string(path).data(ctx())?).data(ctx())?);
    }
    let scores = summary_scores(&rows).data("pooling summaries")?;
    let table = rank_algorithms(&scores).data("ranking")?;
    let text = render_rank(&table)?;
    ensure_dir(&a.out)?;
    write_atomic(&a.out.join("rank.csv"), text.as_bytes())?;
    let inputs: Vec<&Path> = a.summaries.iter().map(PathBuf::as_path).collect();
    finish(&a.out, "rank", a, &inputs)
}

/// Writes `plot_<metric>.csv` per metric: one (x = mean generated K,
/// y = mean value) point per algorithm, dataset and requested K.
fn report(a: &ReportArgs) -> CliResult<()> {
    let mut rows = Vec::new();
    for path in &a.metrics {
        let ctx = || format!("reading {}", path.display());
        rows.extend(parse_metrics(&fs::read_to_string(path).data(ctx())?).data(ctx())?);
    }
    let mut groups: BTreeMap<(&str, &str, usize), Vec<&spix_core::tables::MetricsRow>> = BTreeMap::new();
    for r in &rows {
        if r.k_generated.is_some() {
            groups
                .entry((r.algorithm.as_str(), r.dataset.as_str(), r.k_desired))
                .or_default()
                .push(r);
        }
    }
    type Extract = Box<dyn Fn(&spix_core::tables::MetricsRow) -> Option<f64>>;
    let mut series: Vec<(String, Extract)> = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let f: Extract = Box::new(move |r| Some(r.values[i]));
            (name.to_string(), f)
        })
        .collect();
    series.push(("runtime_ms".to_string(), Box::new(|r| r.runtime_ms)));

    ensure_dir(&a.out)?;
    for (name, value) in &series {
        let mut text = String::from("algorithm,dataset,k_desired,x,y\n");
        for ((algo, dataset, k), members) in &groups {
            let points: Vec<(f64, f64)> = members
                .iter()
                .filter_map(|r| Some((r.k_generated? as f64, value(r)?)))
                .filter(|(_, y)| y.is_finite())
                .collect();
            if points.is_empty() {
                continue;
            }
            let n = points.len() as f64;
            let x = points.iter().map(|p| p.0).sum::<f64>() / n;
            let y = points.iter().map(|p| p.1).sum::<f64>() / n;
            writeln!(text, "{algo},{dataset},{k},{},{}", fmt6(x), fmt6(y)).expect("write to string");
        }
        write_atomic(&a.out.join(format!("plot_{name}.csv")), text.as_bytes())?;
    }
    let inputs: Vec<&Path> = a.metrics.iter().map(PathBuf::as_path).collect();
    finish(&a.out, "report", a, &inputs)
}
