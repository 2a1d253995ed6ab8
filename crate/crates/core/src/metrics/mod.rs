//! Evaluation metrics for superpixel segmentations.
//!
//! Ground-truth dependent metrics (boundary recall, the undersegmentation
//! errors, ASA, MDE) live in [`boundary`] and [`overlap`]; ground-truth free
//! ones (EV, ICV, CO) in [`variation`]. [`evaluate_entry`] computes all of them
//! for one image and applies the worst case over multiple ground truths.

pub mod boundary;
pub mod overlap;
pub mod variation;

use serde::{Deserialize, Serialize};

pub use boundary::{boundary_mask, boundary_recall, mean_distance_to_edge, recall_radius, RadiusRounding};
pub use overlap::{asa, undersegmentation_bergh, undersegmentation_levin, undersegmentation_np, Overlap};
pub use variation::{
    compactness, explained_variation, explained_variation_raster, intra_cluster_variation,
    intra_cluster_variation_raster,
};

use crate::error::{Error, Result};
use crate::raster::{check_dims, Image, LabelMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub recall_radius_factor: f64,
    pub radius_rounding: RadiusRounding,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            recall_radius_factor: 0.0025,
            radius_rounding: RadiusRounding::Nearest,
        }
    }
}

impl MetricConfig {
    pub fn radius(&self, width: usize, height: usize) -> usize {
        recall_radius(width, height, self.recall_radius_factor, self.radius_rounding)
    }
}

/// All per-image metric values for one segmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub rec: f64,
    pub ue_np: f64,
    pub ue_levin: f64,
    pub ue_bergh: f64,
    pub asa: f64,
    pub ev: f64,
    pub co: f64,
    pub icv: f64,
    pub mde: f64,
    pub k_generated: usize,
    pub runtime_ns: Option<u64>,
}

/// Evaluates `sp` against every ground truth and keeps the worst value per
/// metric: minimum for Rec and ASA, maximum for the UE variants and MDE.
/// EV, CO and ICV do not depend on ground truth and are computed once.
pub fn evaluate_entry(
    image: &Image,
    ground_truths: &[LabelMap],
    sp: &LabelMap,
    config: &MetricConfig,
) -> Result<MetricRecord> {
    if ground_truths.is_empty() {
        return Err(Error::Empty("ground-truth list"));
    }
    check_dims(image.dims(), sp.dims())?;
    for gt in ground_truths {
        check_dims(image.dims(), gt.dims())?;
    }
    if config.recall_radius_factor.is_nan() || config.recall_radius_factor <= 0.0 {
        return Err(Error::param("recall_radius_factor", "must be positive"));
    }
    let r = config.radius(image.width(), image.height());

    let mut record = MetricRecord {
        rec: f64::INFINITY,
        ue_np: f64::NEG_INFINITY,
        ue_levin: f64::NEG_INFINITY,
        ue_bergh: f64::NEG_INFINITY,
        asa: f64::INFINITY,
        ev: explained_variation(image, sp)?,
        co: compactness(sp),
        icv: intra_cluster_variation(image, sp)?,
        mde: f64::NEG_INFINITY,
        k_generated: sp.label_count(),
        runtime_ns: None,
    };
    for gt in ground_truths {
        let overlap = Overlap::new(gt, sp)?;
        record.rec = record.rec.min(boundary_recall(gt, sp, r)?);
        record.asa = record.asa.min(overlap.asa());
        record.ue_np = record.ue_np.max(overlap.ue_np());
        record.ue_levin = record.ue_levin.max(overlap.ue_levin());
        record.ue_bergh = record.ue_bergh.max(overlap.ue_bergh());
        record.mde = record.mde.max(mean_distance_to_edge(gt, sp)?);
    }
    Ok(record)
}

/// Mean, extremes and population standard deviation of one quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Stat {
            // Guard the mean against rounding outside [min, max].
            mean: mean.clamp(min, max),
            min,
            max,
            std: var.sqrt(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub count: usize,
    pub rec: Stat,
    pub ue_np: Stat,
    pub ue_levin: Stat,
    pub ue_bergh: Stat,
    pub asa: Stat,
    pub ev: Stat,
    pub co: Stat,
    pub icv: Stat,
    pub mde: Stat,
    pub k_mean: f64,
    pub k_std: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// Present only when every record carries a runtime.
    pub runtime_ms: Option<Stat>,
}

pub fn aggregate(records: &[MetricRecord]) -> Result<AggregateStats> {
    if records.is_empty() {
        return Err(Error::Empty("metric record list"));
    }
    let stat = |f: fn(&MetricRecord) -> f64| {
        let values: Vec<f64> = records.iter().map(f).collect();
        Stat::from_values(&values).expect("non-empty")
    };
    let k = stat(|r| r.k_generated as f64);
    let runtimes: Option<Vec<f64>> = records
        .iter()
        .map(|r| r.runtime_ns.map(|ns| ns as f64 / 1e6))
        .collect();
    Ok(AggregateStats {
        count: records.len(),
        rec: stat(|r| r.rec),
        ue_np: stat(|r| r.ue_np),
        ue_levin: stat(|r| r.ue_levin),
        ue_bergh: stat(|r| r.ue_bergh),
        asa: stat(|r| r.asa),
        ev: stat(|r| r.ev),
        co: stat(|r| r.co),
        icv: stat(|r| r.icv),
        mde: stat(|r| r.mde),
        k_mean: k.mean,
        k_std: k.std,
        k_min: k.min as usize,
        k_max: k.max as usize,
        runtime_ms: runtimes.and_then(|v| Stat::from_values(&v)),
    })
}
