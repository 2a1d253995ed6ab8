//! K-independent summaries (AMR, AUE, AUV), ranking and Pearson correlation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const K_MIN: f64 = 200.0;
pub const K_MAX: f64 = 5200.0;

/// Samples `(k, value)` with strictly increasing, finite `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    samples: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("curve"));
        }
        if samples.iter().any(|(k, v)| !k.is_finite() || !v.is_finite()) {
            return Err(Error::param("curve", "samples must be finite"));
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::param("curve", "k must be strictly increasing"));
        }
        Ok(Self { samples })
    }

    /// Sorts arbitrary points by `k` and averages the values of equal `k`.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64, usize)> = Vec::with_capacity(sorted.len());
        for (k, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == k => {
                    last.1 += v;
                    last.2 += 1;
                }
                _ => merged.push((k, v, 1)),
            }
        }
        Self::new(merged.into_iter().map(|(k, v, n)| (k, v / n as f64)).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Curve {
        Curve {
            samples: self.samples.iter().map(|&(k, v)| (k, f(v))).collect(),
        }
    }

    /// Piecewise-linear between samples, flat beyond the outermost ones.
    pub fn value_at(&self, k: f64) -> f64 {
        let s = &self.samples;
        if k <= s[0].0 {
            return s[0].1;
        }
        if k >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let i = s.partition_point(|&(sk, _)| sk <= k);
        let (k0, v0) = s[i - 1];
        let (k1, v1) = s[i];
        v0 + (v1 - v0) * (k - k0) / (k1 - k0)
    }
}

/// Interval average of the curve over `[k_min, k_max]` by the trapezoid rule,
/// exact for the piecewise-linear interpolant with flat extension.
pub fn average_under_curve(curve: &Curve, k_min: f64, k_max: f64) -> Result<f64> {
    if k_min.partial_cmp(&k_max) != Some(std::cmp::Ordering::Less) {
        return Err(Error::param("k_max", "must exceed k_min"));
    }
    let mut knots = vec![k_min];
    knots.extend(
        curve
            .samples()
            .iter()
            .map(|&(k, _)| k)
            .filter(|&k| k > k_min && k < k_max),
    );
    knots.push(k_max);
    let area: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (curve.value_at(w[0]) + curve.value_at(w[1])))
        .sum();
    Ok(area / (k_max - k_min))
}

/// Interval averages of (1 − Rec), UE and (1 − EV), as fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryScores {
    pub amr: f64,
    pub aue: f64,
    pub auv: f64,
}

pub fn amr_aue_auv(rec: &Curve, ue: &Curve, ev: &Curve) -> Result<SummaryScores> {
    Ok(SummaryScores {
        amr: average_under_curve(&rec.map(|v| 1.0 - v), K_MIN, K_MAX)?,
        aue: average_under_curve(ue, K_MIN, K_MAX)?,
        auv: average_under_curve(&ev.map(|v| 1.0 - v), K_MIN, K_MAX)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub algorithm: String,
    pub average_rank: f64,
    pub mean_amr: f64,
    pub mean_aue: f64,
    /// rank -> number of datasets on which it was attained.
    pub rank_distribution: BTreeMap<usize, usize>,
}

/// Rows ordered by average rank, then algorithm id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub rows: Vec<RankRow>,
}

/// dataset -> algorithm -> (amr, aue).
pub type ScoreTable = BTreeMap<String, BTreeMap<String, (f64, f64)>>;

/// Ranks algorithms per dataset by `amr + aue` (ties: algorithm id) and
/// averages over the datasets each algorithm was evaluated on.
pub fn rank_algorithms(scores: &ScoreTable) -> Result<RankTable> {
    if scores.is_empty() {
        return Err(Error::Empty("score table"));
    }
    #[derive(Default)]
    struct Acc {
        ranks: Vec<usize>,
        amr: Vec<f64>,
        aue: Vec<f64>,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    for algos in scores.values() {
        if algos.is_empty() {
            return Err(Error::Empty("dataset score list"));
        }
        let mut order: Vec<(&String, &(f64, f64))> = algos.iter().collect();
        order.sort_by(|a, b| (a.1 .0 + a.1 .1).total_cmp(&(b.1 .0 + b.1 .1)).then_with(|| a.0.cmp(b.0)));
        for (rank, (name, &(amr, aue))) in order.into_iter().enumerate() {
            let e = acc.entry(name.as_str()).or_default();
            e.ranks.push(rank + 1);
            e.amr.push(amr);
            e.aue.push(aue);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut rows: Vec<RankRow> = acc
        .into_iter()
        .map(|(name, a)| {
            let mut dist = BTreeMap::new();
            for &r in &a.ranks {
                *dist.entry(r).or_insert(0) += 1;
            }
            RankRow {
                algorithm: name.to_string(),
                average_rank: a.ranks.iter().sum::<usize>() as f64 / a.ranks.len() as f64,
                mean_amr: mean(&a.amr),
                mean_aue: mean(&a.aue),
                rank_distribution: dist,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.average_rank
            .total_cmp(&b.average_rank)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
    Ok(RankTable { rows })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::param("ys", format!("length {} differs from {}", ys.len(), xs.len())));
    }
    if xs.len() < 2 {
        return Err(Error::param("xs", "needs at least two samples"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("ys"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
