//! Clustering-based reference algorithm: simple linear iterative clustering.
//!
//! Centers live in (x, y, color) space. Each iteration assigns every pixel
//! within a 2S x 2S window of a center to the center minimizing
//! `D² = d_c² + (m / S)² d_s²` and then moves each center to the mean of its
//! pixels.

use super::seeds::GridLayout;
use super::{finish, AlgorithmParams, SegmentationResult};
use crate::color::{to_color_space, ColorSpace};
use crate::connectivity::default_min_size;
use crate::error::Result;
use crate::raster::{FloatRaster, Image, LabelMap};
use crate::timing::measure_runtime;

const UNASSIGNED: u32 = u32::MAX;

/// Mutable k-means state. Exposed so the objective can be audited between
/// the assignment and update steps.
#[derive(Clone, Debug)]
pub struct SlicState {
    raster: FloatRaster,
    /// Grid interval S.
    step: f64,
    /// `(m / S)²`.
    spatial_weight: f64,
    /// Per center: x, y, then one value per channel.
    centers: Vec<f64>,
    labels: Vec<u32>,
    dist: Vec<f64>,
}

impl SlicState {
    /// Places one center per grid cell. A center starts at the continuous
    /// cell center with the color of the cell's seed pixel, unless a pixel in
    /// the 3x3 neighborhood of the seed has a strictly lower gradient, in
    /// which case it starts on that pixel.
    pub fn new(raster: FloatRaster, k_desired: usize, compactness: f64) -> Result<Self> {
        let (w, h) = (raster.width(), raster.height());
        let layout = GridLayout::new(w, h, k_desired)?;
        let step = ((w * h) as f64 / k_desired as f64).sqrt();
        let c = raster.channels();
        let grad = gradient(&raster);
        let mut centers = Vec::with_capacity(layout.len() * (2 + c));
        for (&(cx, cy), &(sx, sy)) in layout.centers().iter().zip(layout.seeds().iter()) {
            let mut best = (grad[sy * w + sx], sx, sy);
            for ny in sy.saturating_sub(1)..=(sy + 1).min(h - 1) {
                for nx in sx.saturating_sub(1)..=(sx + 1).min(w - 1) {
                    let g = grad[ny * w + nx];
                    if g < best.0 {
                        best = (g, nx, ny);
                    }
                }
            }
            let (_, px, py) = best;
            if (px, py) == (sx, sy) {
                centers.extend_from_slice(&[cx, cy]);
            } else {
                centers.extend_from_slice(&[px as f64, py as f64]);
            }
            centers.extend_from_slice(raster.pixel(px, py));
        }
        Ok(Self {
            step,
            spatial_weight: (compactness / step).powi(2),
            centers,
            labels: vec![UNASSIGNED; w * h],
            dist: vec![f64::INFINITY; w * h],
            raster,
        })
    }

    pub fn num_centers(&self) -> usize {
        self.centers.len() / self.stride()
    }

    fn stride(&self) -> usize {
        2 + self.raster.channels()
    }

    fn center(&self, j: usize) -> &[f64] {
        let s = self.stride();
        &self.centers[j * s..(j + 1) * s]
    }

    /// Center positions as (x, y).
    pub fn positions(&self) -> Vec<(f64, f64)> {
        (0..self.num_centers())
            .map(|j| {
                let c = self.center(j);
                (c[0], c[1])
            })
            .collect()
    }

    fn distance2(&self, center: &[f64], x: usize, y: usize) -> f64 {
        let dx = x as f64 - center[0];
        let dy = y as f64 - center[1];
        let dc: f64 = center[2..]
            .iter()
            .zip(self.raster.pixel(x, y))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        dc + self.spatial_weight * (dx * dx + dy * dy)
    }

    /// Assignment step. A pixel's current center stays the incumbent and is
    /// replaced only by a strictly closer center whose window covers the
    /// pixel, so the objective never increases for fixed centers. Pixels
    /// without any candidate go to the spatially nearest center. Remaining
    /// ties go to the lower center index.
    pub fn assign(&mut self) {
        let (w, h) = (self.raster.width(), self.raster.height());
        for i in 0..w * h {
            self.dist[i] = match self.labels[i] {
                UNASSIGNED => f64::INFINITY,
                l => self.distance2(self.center(l as usize), i % w, i / w),
            };
        }
        let s = self.step;
        for j in 0..self.num_centers() {
            let stride = self.stride();
            let center = self.centers[j * stride..(j + 1) * stride].to_vec();
            let x0 = (center[0] - s).ceil().max(0.0) as usize;
            let y0 = (center[1] - s).ceil().max(0.0) as usize;
            let x1 = ((center[0] + s).floor() as isize).min(w as isize - 1);
            let y1 = ((center[1] + s).floor() as isize).min(h as isize - 1);
            if x1 < x0 as isize || y1 < y0 as isize {
                continue;
            }
            for y in y0..=y1 as usize {
                for x in x0..=x1 as usize {
                    let d = self.distance2(&center, x, y);
                    let i = y * w + x;
                    if d < self.dist[i] {
                        self.dist[i] = d;
                        self.labels[i] = j as u32;
                    }
                }
            }
        }
        for i in 0..w * h {
            if self.labels[i] != UNASSIGNED {
                continue;
            }
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let mut best = (f64::INFINITY, 0usize);
            for j in 0..self.num_centers() {
                let c = self.center(j);
                let d = (x - c[0]).powi(2) + (y - c[1]).powi(2);
                if d < best.0 {
                    best = (d, j);
                }
            }
            self.labels[i] = best.1 as u32;
            self.dist[i] = self.distance2(self.center(best.1), i % w, i / w);
        }
    }

    /// Update step: every center moves to the mean of its assigned pixels.
    /// Centers without pixels keep their previous position and color.
    pub fn update(&mut self) {
        let w = self.raster.width();
        let stride = self.stride();
        let mut sums = vec![0.0f64; self.centers.len()];
        let mut counts = vec![0usize; self.num_centers()];
        for (i, &l) in self.labels.iter().enumerate() {
            if l == UNASSIGNED {
                continue;
            }
            let l = l as usize;
            counts[l] += 1;
            let acc = &mut sums[l * stride..(l + 1) * stride];
            acc[0] += (i % w) as f64;
            acc[1] += (i / w) as f64;
            for (a, v) in acc[2..].iter_mut().zip(self.raster.at(i)) {
                *a += v;
            }
        }
        for (j, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            for (c, s) in self.centers[j * stride..(j + 1) * stride]
                .iter_mut()
                .zip(&sums[j * stride..(j + 1) * stride])
            {
                *c = s / n as f64;
            }
        }
    }

    /// Σ D² of every pixel to its assigned center under the current centers.
    pub fn objective(&self) -> f64 {
        let w = self.raster.width();
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != UNASSIGNED)
            .map(|(i, &l)| self.distance2(self.center(l as usize), i % w, i / w))
            .sum()
    }

    /// Current assignment as a label map (center indices).
    pub fn labels(&self) -> LabelMap {
        LabelMap::new(self.raster.width(), self.raster.height(), self.labels.clone())
            .expect("dimensions match the raster")
    }
}

/// `‖I(x+1,y) − I(x−1,y)‖² + ‖I(x,y+1) − I(x,y−1)‖²` with clamped borders.
fn gradient(raster: &FloatRaster) -> Vec<f64> {
    let (w, h) = (raster.width(), raster.height());
    let mut g = vec![0.0; w * h];
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    for y in 0..h {
        for x in 0..w {
            let gx = d2(raster.pixel((x + 1).min(w - 1), y), raster.pixel(x.saturating_sub(1), y));
            let gy = d2(raster.pixel(x, (y + 1).min(h - 1)), raster.pixel(x, y.saturating_sub(1)));
            g[y * w + x] = gx + gy;
        }
    }
    g
}

/// Raw SLIC labels before connectivity enforcement.
pub fn slic_raw(image: &Image, params: &AlgorithmParams) -> Result<LabelMap> {
    let space = params.color_space.unwrap_or(ColorSpace::Lab);
    let raster = to_color_space(image, space)?;
    let mut state = SlicState::new(raster, params.k_desired, params.compactness)?;
    for _ in 0..params.iterations {
        state.assign();
        state.update();
    }
    Ok(state.labels())
}

pub fn slic_segment(image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
    params.validate()?;
    let (raw, ns) = measure_runtime(|| slic_raw(image, params));
    let min_size = default_min_size(image.width(), image.height(), params.k_desired);
    Ok(finish(raw?, min_size, ns))
}
