use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spix_core::color::ColorSpace;
use spix_core::robustness::PerturbationKind;
use spix_core::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "spix", version, about = "Superpixel benchmark driver")]
pub struct Cli {
    /// Worker threads for per-image work; 0 or unset uses all cores.
    #[arg(long, global = true, env = "SPIX_BENCH_THREADS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset with exact ground truth.
    Generate(GenerateArgs),
    /// Segment every dataset image at one K and write the label maps.
    Segment(SegmentArgs),
    /// Score existing label maps against a dataset.
    Eval(EvalArgs),
    /// Segment, evaluate and summarize over a list of K values.
    Sweep(SweepArgs),
    /// Grid-search parameters at anchor K values on a training set.
    Optimize(OptimizeArgs),
    /// Measure metric drift under image perturbations.
    Robustness(RobustnessArgs),
    /// Rank algorithms from summary.csv files.
    Rank(RankArgs),
    /// Turn metrics.csv files into per-metric plot series.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelFileFormat {
    Png,
    Csv,
}

impl From<LabelFileFormat> for spix_core::io::LabelFormat {
    fn from(f: LabelFileFormat) -> Self {
        match f {
            LabelFileFormat::Png => spix_core::io::LabelFormat::Png16,
            LabelFileFormat::Csv => spix_core::io::LabelFormat::Csv,
        }
    }
}

/// Algorithm parameters: a JSON file plus per-flag overrides.
#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct ParamArgs {
    /// JSON with an AlgorithmParams object, or an `optimize` outcome whose
    /// anchors are interpolated per K.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub compactness: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub color_space: Option<ColorSpace>,
    /// Algorithm-specific parameter, repeatable (e.g. `--set fh_k=300`).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 160)]
    pub width: usize,
    #[arg(long, default_value_t = 120)]
    pub height: usize,
    /// Ground-truth regions per image.
    #[arg(long, default_value_t = 24)]
    pub segments: usize,
    /// Minimum color distance between adjacent regions.
    #[arg(long, default_value_t = 48.0)]
    pub contrast: f64,
    /// Standard deviation of the additive Gaussian pixel noise.
    #[arg(long, default_value_t = 4.0)]
    pub noise: f64,
    /// Ground-truth file format.
    #[arg(long, value_enum, default_value_t = LabelFileFormat::Png)]
    pub label_format: LabelFileFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct SegmentArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 400)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = LabelFileFormat::Png)]
    pub label_format: LabelFileFormat,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory holding `<image_id>.png` or `<image_id>.csv` label maps.
    #[arg(long)]
    pub labels: PathBuf,
    /// Name written to the algorithm column; need not be a built-in.
    #[arg(long)]
    pub algo: String,
    /// Requested K to record; defaults to each map's segment count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dataset column value; defaults to the dataset directory name.
    #[arg(long)]
    pub dataset_name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Comma-separated K list; defaults to 18 values from 200 to 5200.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Leave runtime_ms empty so the tables are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub dataset_name: Option<String>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub algo: Algorithm,
    /// JSON object mapping parameter name to an array of candidates.
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, alias = "dataset")]
    pub train: PathBuf,
    /// Anchor K values.
    #[arg(long, value_delimiter = ',', default_values_t = [400, 1200, 3600])]
    pub k: Vec<usize>,
    /// Base parameters the grid is applied on top of.
    #[command(flatten)]
    pub params: ParamArgs,
    /// Largest tolerated relative deviation of the mean generated K.
    #[arg(long, default_value_t = 0.5)]
    pub max_k_deviation: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RobustnessArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub algo: Algorithm,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 400)]
    pub k: usize,
    /// Perturbations to run; defaults to salt_pepper and box_blur.
    #[arg(long, value_delimiter = ',')]
    pub perturbation: Vec<PerturbationKind>,
    /// Magnitudes for a single perturbation; each kind has its own default.
    #[arg(long, value_delimiter = ',')]
    pub magnitudes: Vec<f64>,
    /// Base seed; image `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    /// summary.csv files; rows are pooled across files.
    #[arg(required = true)]
    pub summaries: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub metrics: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
}
