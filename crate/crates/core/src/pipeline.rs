//! The K sweep: segment every image at every K, evaluate, aggregate per K and
//! summarize the resulting curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmParams, Segmenter};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, evaluate_entry, AggregateStats, MetricConfig, MetricRecord};
use crate::raster::DatasetEntry;
use crate::summary::{amr_aue_auv, Curve, SummaryScores};

pub const DEFAULT_K_LIST: [usize; 18] = [
    200, 300, 400, 600, 800, 1000, 1200, 1400, 1600, 1800, 2000, 2400, 2800, 3200, 3600, 4000, 4600, 5200,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_list: Vec<usize>,
    pub metric: MetricConfig,
    /// Record runtimes. Timed runs execute one segmentation at a time.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_list: DEFAULT_K_LIST.to_vec(),
            metric: MetricConfig::default(),
            timing: true,
        }
    }
}

/// One (image, K) evaluation; `record` is `None` for a failed run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub image_id: String,
    pub k_desired: usize,
    pub record: Option<MetricRecord>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KAggregate {
    pub k_desired: usize,
    /// `None` when every image failed at this K.
    pub stats: Option<AggregateStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    /// Ordered by image id, then K ascending.
    pub records: Vec<SweepRecord>,
    /// Ordered by K ascending.
    pub per_k: Vec<KAggregate>,
    pub summary: SummaryScores,
}

fn run_one<S: Segmenter + ?Sized>(
    segmenter: &S,
    entry: &DatasetEntry,
    params: &AlgorithmParams,
    config: &SweepConfig,
) -> SweepRecord {
    let outcome = segmenter.segment(&entry.image, params).and_then(|r| {
        let mut m = evaluate_entry(&entry.image, &entry.ground_truths, &r.labels, &config.metric)?;
        m.runtime_ns = config.timing.then_some(r.runtime_ns);
        Ok(m)
    });
    let (record, error) = match outcome {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRecord {
        image_id: entry.id.clone(),
        k_desired: params.k_desired,
        record,
        error,
    }
}

/// Runs the sweep. `params_for(k)` supplies the parameters for each K.
/// Per-image failures become records without metrics; the sweep itself fails
/// only if no run succeeds or parameters cannot be produced.
pub fn run_sweep<S, P>(segmenter: &S, params_for: P, entries: &[DatasetEntry], config: &SweepConfig) -> Result<SweepOutput>
where
    S: Segmenter + ?Sized,
    P: Fn(usize) -> Result<AlgorithmParams>,
{
    if entries.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if config.k_list.is_empty() {
        return Err(Error::Empty("K list"));
    }
    let mut ks = config.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let params: Vec<AlgorithmParams> = ks
        .iter()
        .map(|&k| {
            let mut p = params_for(k)?;
            p.k_desired = k;
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<&DatasetEntry> = entries.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let tasks: Vec<(&DatasetEntry, &AlgorithmParams)> = order
        .iter()
        .flat_map(|&e| params.iter().map(move |p| (e, p)))
        .collect();
    let records: Vec<SweepRecord> = if config.timing {
        tasks.iter().map(|(e, p)| run_one(segmenter, e, p, config)).collect()
    } else {
        tasks.par_iter().map(|(e, p)| run_one(segmenter, e, p, config)).collect()
    };

    if records.iter().all(|r| r.record.is_none()) {
        let first = records.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::AllFailed(first));
    }

    let mut per_k = Vec::with_capacity(ks.len());
    let (mut rec, mut ue, mut ev) = (Vec::new(), Vec::new(), Vec::new());
    for &k in &ks {
        let ok: Vec<MetricRecord> = records
            .iter()
            .filter(|r| r.k_desired == k)
            .filter_map(|r| r.record.clone())
            .collect();
        let stats = if ok.is_empty() { None } else { Some(aggregate(&ok)?) };
        if let Some(s) = &stats {
            rec.push((s.k_mean, s.rec.mean));
            ue.push((s.k_mean, s.ue_np.mean));
            ev.push((s.k_mean, s.ev.mean));
        }
        per_k.push(KAggregate { k_desired: k, stats });
    }
    let summary = amr_aue_auv(&Curve::from_points(&rec)?, &Curve::from_points(&ue)?, &Curve::from_points(&ev)?)?;
    Ok(SweepOutput {
        records,
        per_k,
        summary,
    })
}
