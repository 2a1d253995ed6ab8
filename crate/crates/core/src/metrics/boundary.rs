//! Boundary-based metrics: boundary recall and mean distance to edge.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::LabelMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusRounding {
    /// Half-up rounding to the nearest integer.
    #[default]
    Nearest,
    Ceil,
}

/// Pixel is a boundary pixel iff one of its 4-neighbors carries a different
/// label. The image border alone does not make a boundary.
pub fn boundary_mask(map: &LabelMap) -> Vec<bool> {
    let (w, h) = map.dims();
    let l = map.labels();
    let mut mask = vec![false; l.len()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if y + 1 < h && l[i] != l[i + w] {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    mask
}

/// Matching tolerance: `factor` times the image diagonal, rounded.
pub fn recall_radius(width: usize, height: usize, factor: f64, rounding: RadiusRounding) -> usize {
    let diag = ((width * width + height * height) as f64).sqrt();
    let r = factor * diag;
    match rounding {
        RadiusRounding::Nearest => (r + 0.5).floor() as usize,
        RadiusRounding::Ceil => r.ceil() as usize,
    }
}

/// Summed-area table over a boolean mask, `(w + 1) * (h + 1)` entries.
struct SummedArea {
    stride: usize,
    sums: Vec<u32>,
}

impl SummedArea {
    fn new(mask: &[bool], w: usize, h: usize) -> Self {
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += u32::from(mask[y * w + x]);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    /// Count over the inclusive rectangle [x0, x1] x [y0, y1].
    fn count(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u32 {
        let s = self.stride;
        self.sums[(y1 + 1) * s + x1 + 1] + self.sums[y0 * s + x0]
            - self.sums[y0 * s + x1 + 1]
            - self.sums[(y1 + 1) * s + x0]
    }
}

/// Fraction of ground-truth boundary pixels with a superpixel boundary pixel
/// inside the (2r+1)x(2r+1) window around them. 1 if the ground truth has no
/// boundary.
pub fn boundary_recall(gt: &LabelMap, sp: &LabelMap, r: usize) -> Result<f64> {
    gt.check_same_dims(sp)?;
    let (w, h) = gt.dims();
    let gt_mask = boundary_mask(gt);
    let sp_sat = SummedArea::new(&boundary_mask(sp), w, h);
    let mut tp = 0usize;
    let mut total = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !gt_mask[y * w + x] {
                continue;
            }
            total += 1;
            let hit = sp_sat.count(
                x.saturating_sub(r),
                y.saturating_sub(r),
                (x + r).min(w - 1),
                (y + r).min(h - 1),
            ) > 0;
            tp += usize::from(hit);
        }
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(tp as f64 / total as f64)
}

const FAR: f64 = 1e20;

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            // z[0] is -inf, so k never drops below zero.
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance to the nearest `true` pixel.
pub(crate) fn squared_distance_transform(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { FAR }).collect();
    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        edt_1d(&f[..h], &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        edt_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

/// Mean over all N pixels of the distance from each ground-truth boundary
/// pixel to the nearest superpixel boundary pixel. A superpixel map without
/// boundary contributes the largest in-image distance per boundary pixel.
pub fn mean_distance_to_edge(gt: &LabelMap, sp: &LabelMap) -> Result<f64> {
    gt.check_same_dims(sp)?;
    let (w, h) = gt.dims();
    let gt_mask = boundary_mask(gt);
    let sp_mask = boundary_mask(sp);
    let n = gt.len() as f64;
    let gt_count = gt_mask.iter().filter(|&&b| b).count();
    if gt_count == 0 {
        return Ok(0.0);
    }
    if !sp_mask.iter().any(|&b| b) {
        return Ok(gt_count as f64 * max_pixel_distance(w, h) / n);
    }
    let dist2 = squared_distance_transform(&sp_mask, w, h);
    let total: f64 = gt_mask
        .iter()
        .zip(dist2.iter())
        .filter(|(&b, _)| b)
        .map(|(_, &d)| d.sqrt())
        .sum();
    Ok(total / n)
}

/// Distance between opposite corner pixels.
pub fn max_pixel_distance(w: usize, h: usize) -> f64 {
    let (dx, dy) = ((w - 1) as f64, (h - 1) as f64);
    (dx * dx + dy * dy).sqrt()
}
