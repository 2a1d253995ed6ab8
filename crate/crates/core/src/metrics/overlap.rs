//! Overlap-based metrics built on the ground-truth/superpixel contingency
//! table: the three undersegmentation errors and achievable segmentation
//! accuracy.

use std::collections::HashMap;

use crate::error::Result;
use crate::raster::LabelMap;

/// Sparse contingency table between a ground truth and a superpixel map.
/// Segment ids are dense first-appearance ids of each map.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub pixels: usize,
    pub gt_sizes: Vec<usize>,
    pub sp_sizes: Vec<usize>,
    /// `(gt, sp, |G_gt ∩ S_sp|)`, sorted by `(gt, sp)`, counts > 0.
    pub entries: Vec<(u32, u32, usize)>,
}

impl Overlap {
    pub fn new(gt: &LabelMap, sp: &LabelMap) -> Result<Self> {
        gt.check_same_dims(sp)?;
        let (g, ng) = gt.dense_labels();
        let (s, ns) = sp.dense_labels();
        let mut gt_sizes = vec![0usize; ng];
        let mut sp_sizes = vec![0usize; ns];
        let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
        for (&a, &b) in g.iter().zip(s.iter()) {
            gt_sizes[a as usize] += 1;
            sp_sizes[b as usize] += 1;
            *counts.entry((a, b)).or_insert(0) += 1;
        }
        let mut entries: Vec<(u32, u32, usize)> =
            counts.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        entries.sort_unstable();
        Ok(Self {
            pixels: g.len(),
            gt_sizes,
            sp_sizes,
            entries,
        })
    }

    /// Σ_j max_i |S_j ∩ G_i|.
    fn best_overlap_sum(&self) -> usize {
        let mut best = vec![0usize; self.sp_sizes.len()];
        for &(_, s, c) in &self.entries {
            let b = &mut best[s as usize];
            *b = (*b).max(c);
        }
        best.iter().sum()
    }

    pub fn ue_np(&self) -> f64 {
        let sum: usize = self
            .entries
            .iter()
            .map(|&(_, s, c)| c.min(self.sp_sizes[s as usize] - c))
            .sum();
        sum as f64 / self.pixels as f64
    }

    pub fn ue_levin(&self) -> f64 {
        let mut leak = vec![0usize; self.gt_sizes.len()];
        for &(g, s, _) in &self.entries {
            leak[g as usize] += self.sp_sizes[s as usize];
        }
        let total: f64 = leak
            .iter()
            .zip(self.gt_sizes.iter())
            .map(|(&covered, &size)| (covered - size) as f64 / size as f64)
            .sum();
        total / self.gt_sizes.len() as f64
    }

    pub fn ue_bergh(&self) -> f64 {
        (self.pixels - self.best_overlap_sum()) as f64 / self.pixels as f64
    }

    pub fn asa(&self) -> f64 {
        self.best_overlap_sum() as f64 / self.pixels as f64
    }
}

pub fn undersegmentation_np(gt: &LabelMap, sp: &LabelMap) -> Result<f64> {
    Ok(Overlap::new(gt, sp)?.ue_np())
}

pub fn undersegmentation_levin(gt: &LabelMap, sp: &LabelMap) -> Result<f64> {
    Ok(Overlap::new(gt, sp)?.ue_levin())
}

pub fn undersegmentation_bergh(gt: &LabelMap, sp: &LabelMap) -> Result<f64> {
    Ok(Overlap::new(gt, sp)?.ue_bergh())
}

pub fn asa(gt: &LabelMap, sp: &LabelMap) -> Result<f64> {
    Ok(Overlap::new(gt, sp)?.asa())
}
