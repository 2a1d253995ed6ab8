//! Graph-based reference algorithm: greedy merging on the 4-neighbor pixel
//! graph with an adaptive per-component threshold.

use super::{finish, AlgorithmParams, SegmentationResult};
use crate::color::{to_color_space, ColorSpace};
use crate::connectivity::default_min_size;
use crate::error::{Error, Result};
use crate::filter::gaussian_blur_raster;
use crate::raster::{FloatRaster, Image, LabelMap};
use crate::timing::measure_runtime;

/// Disjoint sets with component size and largest internal merged weight.
struct Forest {
    parent: Vec<usize>,
    size: Vec<usize>,
    internal: Vec<f64>,
}

impl Forest {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Joins two roots; the larger one (ties: lower index) stays root.
    fn union(&mut self, a: usize, b: usize, weight: f64) -> usize {
        let (root, child) = if self.size[a] > self.size[b] || (self.size[a] == self.size[b] && a < b) {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[child] = root;
        self.size[root] += self.size[child];
        self.internal[root] = self.internal[root].max(self.internal[child]).max(weight);
        root
    }
}

/// Edges in raster order (right neighbor, then lower neighbor), stably sorted
/// by Euclidean color distance.
fn sorted_edges(raster: &FloatRaster) -> Vec<(f64, usize, usize)> {
    let (w, h) = (raster.width(), raster.height());
    let mut edges = Vec::with_capacity(2 * w * h);
    let weight = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                edges.push((weight(raster.pixel(x, y), raster.pixel(x + 1, y)), i, i + 1));
            }
            if y + 1 < h {
                edges.push((weight(raster.pixel(x, y), raster.pixel(x, y + 1)), i, i + w));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Merges across an edge of weight `w` when `w <= min(Int(C) + k / |C|)` over
/// both components; then joins components below `min_size` along the lightest
/// remaining edges.
pub fn fh_labels(raster: &FloatRaster, k: f64, min_size: usize) -> LabelMap {
    let (w, h) = (raster.width(), raster.height());
    let edges = sorted_edges(raster);
    let mut forest = Forest::new(w * h);
    for &(weight, a, b) in &edges {
        let (ra, rb) = (forest.find(a), forest.find(b));
        if ra == rb {
            continue;
        }
        let ta = forest.internal[ra] + k / forest.size[ra] as f64;
        let tb = forest.internal[rb] + k / forest.size[rb] as f64;
        if weight <= ta.min(tb) {
            forest.union(ra, rb, weight);
        }
    }
    if min_size > 1 {
        for &(weight, a, b) in &edges {
            let (ra, rb) = (forest.find(a), forest.find(b));
            if ra != rb && (forest.size[ra] < min_size || forest.size[rb] < min_size) {
                forest.union(ra, rb, weight);
            }
        }
    }
    let labels = (0..w * h).map(|i| forest.find(i) as u32).collect();
    LabelMap::new(w, h, labels)
        .expect("dimensions match the raster")
        .canonicalize()
}

/// FH settings read from `extra`: `fh_k` is required and positive,
/// `fh_sigma` and `fh_min_size` default to 0 and must be non-negative.
pub(crate) struct FhSettings {
    k: f64,
    sigma: f64,
    min_size: usize,
}

impl FhSettings {
    pub(crate) fn from_params(params: &AlgorithmParams) -> Result<Self> {
        let k = params
            .extra("fh_k")
            .ok_or_else(|| Error::param("extra.fh_k", "required by fh"))?;
        if k <= 0.0 {
            return Err(Error::param("extra.fh_k", "must be positive"));
        }
        let sigma = params.extra("fh_sigma").unwrap_or(0.0);
        if sigma < 0.0 {
            return Err(Error::param("extra.fh_sigma", "must be non-negative"));
        }
        let min_size = params.extra("fh_min_size").unwrap_or(0.0);
        if min_size < 0.0 {
            return Err(Error::param("extra.fh_min_size", "must be non-negative"));
        }
        Ok(FhSettings {
            k,
            sigma,
            min_size: min_size.round() as usize,
        })
    }
}

/// Raw FH labels; see [`FhSettings`] for the `extra` keys it reads.
pub fn fh_raw(image: &Image, params: &AlgorithmParams) -> Result<LabelMap> {
    let settings = FhSettings::from_params(params)?;
    let space = params.color_space.unwrap_or(ColorSpace::Rgb);
    let raster = gaussian_blur_raster(&to_color_space(image, space)?, settings.sigma);
    Ok(fh_labels(&raster, settings.k, settings.min_size))
}

pub fn fh_segment(image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
    params.validate()?;
    let (raw, ns) = measure_runtime(|| fh_raw(image, params));
    let min_size = default_min_size(image.width(), image.height(), params.k_desired);
    Ok(finish(raw?, min_size, ns))
}
