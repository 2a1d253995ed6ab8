//! Exhaustive grid search minimizing `(1 − Rec) + UE` on training entries,
//! run per anchor K and interpolated linearly in between.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmParams, ParamValue, Segmenter};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_entry, MetricConfig};
use crate::raster::DatasetEntry;

pub const DEFAULT_ANCHORS: [usize; 3] = [400, 1200, 3600];

/// Additive objective; lower is better.
pub fn objective(rec_mean: f64, ue_mean: f64) -> f64 {
    (1.0 - rec_mean) + ue_mean
}

/// Parameter name -> ordered candidates. Serialized as a plain JSON object.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterGrid {
    pub axes: BTreeMap<String, Vec<ParamValue>>,
}

impl ParameterGrid {
    pub fn validate(&self) -> Result<()> {
        if let Some((name, _)) = self.axes.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::param(name.clone(), "grid axis has no candidates"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.values().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All combinations, axes in name order, the last axis varying fastest.
    pub fn combinations(&self) -> Vec<Vec<(&str, &ParamValue)>> {
        let axes: Vec<(&String, &Vec<ParamValue>)> = self.axes.iter().collect();
        let mut index = vec![0usize; axes.len()];
        let mut out = Vec::with_capacity(self.len());
        if self.is_empty() {
            return out;
        }
        loop {
            out.push(
                axes.iter()
                    .zip(&index)
                    .map(|((name, values), &i)| (name.as_str(), &values[i]))
                    .collect(),
            );
            let mut axis = axes.len();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < axes[axis].1.len() {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub metric: MetricConfig,
    /// Combinations whose mean generated K deviates from the target by more
    /// than this fraction are infeasible.
    pub max_k_deviation: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            metric: MetricConfig::default(),
            max_k_deviation: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub params: AlgorithmParams,
    pub rec_mean: f64,
    pub ue_mean: f64,
    pub k_mean: f64,
    /// `(k_mean − K) / K`.
    pub k_deviation: f64,
    /// `+inf` for infeasible combinations.
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: AlgorithmParams,
    pub objective: f64,
    pub trace: Vec<TraceEntry>,
}

fn evaluate_combination<S: Segmenter + ?Sized>(
    segmenter: &S,
    params: AlgorithmParams,
    train: &[DatasetEntry],
    k_target: usize,
    config: &SearchConfig,
) -> TraceEntry {
    let mut rec = 0.0;
    let mut ue = 0.0;
    let mut k = 0.0;
    let mut failure = None;
    for entry in train {
        let outcome = segmenter
            .segment(&entry.image, &params)
            .and_then(|r| evaluate_entry(&entry.image, &entry.ground_truths, &r.labels, &config.metric));
        match outcome {
            Ok(m) => {
                rec += m.rec;
                ue += m.ue_np;
                k += m.k_generated as f64;
            }
            Err(e) => {
                failure = Some(format!("{}: {e}", entry.id));
                break;
            }
        }
    }
    let n = train.len() as f64;
    let (rec_mean, ue_mean, k_mean) = if failure.is_some() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (rec / n, ue / n, k / n)
    };
    let k_deviation = (k_mean - k_target as f64) / k_target as f64;
    if failure.is_none() && k_deviation.abs() > config.max_k_deviation {
        failure = Some(format!("mean K {k_mean:.1} deviates {:.1}% from {k_target}", 100.0 * k_deviation));
    }
    TraceEntry {
        objective: if failure.is_some() { f64::INFINITY } else { objective(rec_mean, ue_mean) },
        params,
        rec_mean,
        ue_mean,
        k_mean,
        k_deviation,
        infeasible: failure,
    }
}

/// Evaluates every combination of `grid` applied on top of `base` (with
/// `k_desired = k_target`) and returns the first combination, in enumeration
/// order, attaining the minimum objective.
pub fn grid_search<S: Segmenter + ?Sized>(
    segmenter: &S,
    base: &AlgorithmParams,
    grid: &ParameterGrid,
    train: &[DatasetEntry],
    k_target: usize,
    config: &SearchConfig,
) -> Result<SearchResult> {
    grid.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let candidates = grid
        .combinations()
        .into_iter()
        .map(|combo| {
            let mut p = base.clone();
            p.k_desired = k_target;
            for (name, value) in combo {
                p.set(name, value)?;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let trace: Vec<TraceEntry> = candidates
        .into_par_iter()
        .map(|p| evaluate_combination(segmenter, p, train, k_target, config))
        .collect();
    let mut best: Option<usize> = None;
    for (i, t) in trace.iter().enumerate() {
        if t.objective.is_finite() && best.is_none_or(|b| t.objective < trace[b].objective) {
            best = Some(i);
        }
    }
    let best = best.ok_or(Error::NoFeasibleCombination { k: k_target })?;
    Ok(SearchResult {
        best: trace[best].params.clone(),
        objective: trace[best].objective,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub params: AlgorithmParams,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub anchors: BTreeMap<usize, Anchor>,
    #[serde(default)]
    pub traces: BTreeMap<usize, Vec<TraceEntry>>,
}

/// Runs [`grid_search`] once per anchor K.
pub fn optimize<S: Segmenter + ?Sized>(
    segmenter: &S,
    base: &AlgorithmParams,
    grid: &ParameterGrid,
    train: &[DatasetEntry],
    anchors: &[usize],
    config: &SearchConfig,
) -> Result<OptimizationOutcome> {
    if anchors.is_empty() {
        return Err(Error::Empty("anchor list"));
    }
    let mut outcome = OptimizationOutcome {
        anchors: BTreeMap::new(),
        traces: BTreeMap::new(),
    };
    for &k in anchors {
        let r = grid_search(segmenter, base, grid, train, k, config)?;
        outcome.anchors.insert(
            k,
            Anchor {
                params: r.best,
                objective: r.objective,
            },
        );
        outcome.traces.insert(k, r.trace);
    }
    Ok(outcome)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Parameters for an arbitrary `k`: clamped to [200, 5200], linear between
/// the bracketing anchors, constant beyond the outermost ones. Integer-valued
/// parameters are rounded half-up; categorical ones come from the nearer
/// anchor (ties: lower K). `k_desired` is set to `k`.
pub fn interpolate_params(outcome: &OptimizationOutcome, k: usize) -> Result<AlgorithmParams> {
    let (&first_k, first) = outcome.anchors.iter().next().ok_or(Error::Empty("anchor list"))?;
    let (&last_k, last) = outcome.anchors.iter().next_back().expect("non-empty");
    let kc = k.clamp(200, 5200);
    let mut out = if kc <= first_k {
        first.params.clone()
    } else if kc >= last_k {
        last.params.clone()
    } else {
        let (&k0, lo) = outcome.anchors.range(..=kc).next_back().expect("kc > first anchor");
        let (&k1, hi) = outcome.anchors.range(kc..).next().expect("kc < last anchor");
        if k0 == k1 {
            lo.params.clone()
        } else {
            let (a, b) = (&lo.params, &hi.params);
            let t = (kc - k0) as f64 / (k1 - k0) as f64;
            let nearer = if kc - k0 <= k1 - kc { a } else { b };
            let mut p = nearer.clone();
            p.compactness = lerp(a.compactness, b.compactness, t);
            p.iterations = round_half_up(lerp(a.iterations as f64, b.iterations as f64, t)) as usize;
            for (key, &va) in &a.extra {
                if let Some(&vb) = b.extra.get(key) {
                    let v = lerp(va, vb, t);
                    let integral = va.fract() == 0.0 && vb.fract() == 0.0;
                    p.extra.insert(key.clone(), if integral { round_half_up(v) } else { v });
                }
            }
            p
        }
    };
    out.k_desired = k;
    Ok(out)
}
