//! Ground-truth independent metrics: explained variation, intra-cluster
//! variation and compactness.

use std::f64::consts::PI;

use crate::error::Result;
use crate::raster::{check_dims, FloatRaster, Image, LabelMap};

/// Per-superpixel pixel counts and channel sums over dense label ids.
struct SegmentMoments {
    dense: Vec<u32>,
    sizes: Vec<usize>,
    means: Vec<f64>,
    channels: usize,
}

impl SegmentMoments {
    fn new(image: &FloatRaster, sp: &LabelMap) -> Self {
        let (dense, k) = sp.dense_labels();
        let c = image.channels();
        let mut sizes = vec![0usize; k];
        let mut means = vec![0.0f64; k * c];
        for (i, &l) in dense.iter().enumerate() {
            let l = l as usize;
            sizes[l] += 1;
            for (m, v) in means[l * c..(l + 1) * c].iter_mut().zip(image.at(i)) {
                *m += v;
            }
        }
        for (l, &n) in sizes.iter().enumerate() {
            for m in &mut means[l * c..(l + 1) * c] {
                *m /= n as f64;
            }
        }
        Self {
            dense,
            sizes,
            means,
            channels: c,
        }
    }

    fn mean(&self, l: usize) -> &[f64] {
        &self.means[l * self.channels..(l + 1) * self.channels]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Explained variation on the raw channels of `image`.
pub fn explained_variation(image: &Image, sp: &LabelMap) -> Result<f64> {
    explained_variation_raster(&image.to_float(), sp)
}

/// Explained variation in an arbitrary working color space. Squared
/// differences are summed over channels; a constant image gives 1.
pub fn explained_variation_raster(image: &FloatRaster, sp: &LabelMap) -> Result<f64> {
    check_dims((image.width(), image.height()), sp.dims())?;
    let c = image.channels();
    let n = sp.len();
    let mut global = vec![0.0; c];
    for i in 0..n {
        for (g, v) in global.iter_mut().zip(image.at(i)) {
            *g += v;
        }
    }
    for g in &mut global {
        *g /= n as f64;
    }
    let denom: f64 = (0..n).map(|i| sq_dist(image.at(i), &global)).sum();
    if denom == 0.0 {
        return Ok(1.0);
    }
    let moments = SegmentMoments::new(image, sp);
    let numer: f64 = moments
        .sizes
        .iter()
        .enumerate()
        .map(|(l, &size)| size as f64 * sq_dist(moments.mean(l), &global))
        .sum();
    Ok((numer / denom).clamp(0.0, 1.0))
}

pub fn intra_cluster_variation(image: &Image, sp: &LabelMap) -> Result<f64> {
    intra_cluster_variation_raster(&image.to_float(), sp)
}

/// Mean over superpixels of sqrt(Σ‖I(x) − μ(S_j)‖²) / |S_j|.
pub fn intra_cluster_variation_raster(image: &FloatRaster, sp: &LabelMap) -> Result<f64> {
    check_dims((image.width(), image.height()), sp.dims())?;
    let moments = SegmentMoments::new(image, sp);
    let mut spread = vec![0.0f64; moments.sizes.len()];
    for (i, &l) in moments.dense.iter().enumerate() {
        spread[l as usize] += sq_dist(image.at(i), moments.mean(l as usize));
    }
    let total: f64 = spread
        .iter()
        .zip(moments.sizes.iter())
        .map(|(&s, &n)| s.sqrt() / n as f64)
        .sum();
    Ok(total / moments.sizes.len() as f64)
}

/// Size-weighted isoperimetric quotient 4πA/P². The perimeter counts pixel
/// edges facing a different label or the image border.
pub fn compactness(sp: &LabelMap) -> f64 {
    let (w, h) = sp.dims();
    let (dense, k) = sp.dense_labels();
    let mut area = vec![0usize; k];
    let mut perimeter = vec![0usize; k];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let l = dense[i] as usize;
            area[l] += 1;
            let edges = [
                x == 0 || dense[i - 1] as usize != l,
                x + 1 == w || dense[i + 1] as usize != l,
                y == 0 || dense[i - w] as usize != l,
                y + 1 == h || dense[i + w] as usize != l,
            ];
            perimeter[l] += edges.iter().filter(|&&e| e).count();
        }
    }
    let total: f64 = area
        .iter()
        .zip(perimeter.iter())
        .map(|(&a, &p)| {
            let a = a as f64;
            let q = 4.0 * PI * a / (p * p) as f64;
            a * q.min(1.0)
        })
        .sum();
    total / sp.len() as f64
}
