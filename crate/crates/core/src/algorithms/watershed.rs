//! Watershed-based reference algorithm: marker-controlled priority flood with
//! an optional compactness term (λ = 0 gives the classic watershed).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::seeds::GridLayout;
use super::{finish, AlgorithmParams, SegmentationResult};
use crate::color::{to_color_space, ColorSpace};
use crate::error::Result;
use crate::raster::{FloatRaster, Image, LabelMap};
use crate::timing::measure_runtime;

const UNLABELED: u32 = u32::MAX;

/// Heap entry ordered so that `BinaryHeap` pops the lowest priority first and,
/// among equal priorities, the earliest push.
#[derive(Clone, Copy, Debug)]
struct Entry {
    priority: f64,
    order: u64,
    pixel: usize,
    label: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Maximum absolute channel difference to any 4-neighbor.
pub fn gradient_magnitude(raster: &FloatRaster) -> Vec<f64> {
    let (w, h) = (raster.width(), raster.height());
    let mut g = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = raster.pixel(x, y);
            let mut best = 0.0f64;
            let mut visit = |nx: usize, ny: usize| {
                for (a, b) in p.iter().zip(raster.pixel(nx, ny)) {
                    best = best.max((a - b).abs());
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
            g[y * w + x] = best;
        }
    }
    g
}

/// Floods from `markers` (pixel positions). The compactness term measures the
/// distance from a pixel to `anchors[label]`. Every pixel is claimed by the
/// first entry popped for it, which always comes from a labeled 4-neighbor,
/// so each flood is 4-connected and never empty.
pub fn flood(
    raster: &FloatRaster,
    markers: &[(usize, usize)],
    anchors: &[(f64, f64)],
    compactness: f64,
) -> LabelMap {
    flood_on(raster, &gradient_magnitude(raster), markers, anchors, compactness)
}

fn flood_on(
    raster: &FloatRaster,
    grad: &[f64],
    markers: &[(usize, usize)],
    anchors: &[(f64, f64)],
    compactness: f64,
) -> LabelMap {
    let (w, h) = (raster.width(), raster.height());
    let mut labels = vec![UNLABELED; w * h];
    let mut heap = BinaryHeap::new();
    let mut order = 0u64;
    for (l, &(x, y)) in markers.iter().enumerate() {
        labels[y * w + x] = l as u32;
    }
    let mut push_neighbors = |heap: &mut BinaryHeap<Entry>, labels: &[u32], i: usize, label: u32| {
        let (x, y) = (i % w, i / w);
        let (ax, ay) = anchors[label as usize];
        let neighbors = [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ];
        for j in neighbors.into_iter().flatten() {
            if labels[j] != UNLABELED {
                continue;
            }
            let dx = (j % w) as f64 - ax;
            let dy = (j / w) as f64 - ay;
            heap.push(Entry {
                priority: grad[j] + compactness * (dx * dx + dy * dy).sqrt(),
                order,
                pixel: j,
                label,
            });
            order += 1;
        }
    };
    for (l, &(x, y)) in markers.iter().enumerate() {
        push_neighbors(&mut heap, &labels, y * w + x, l as u32);
    }
    while let Some(e) = heap.pop() {
        if labels[e.pixel] != UNLABELED {
            continue;
        }
        labels[e.pixel] = e.label;
        push_neighbors(&mut heap, &labels, e.pixel, e.label);
    }
    LabelMap::new(w, h, labels).expect("dimensions match the raster")
}

/// Moves every marker to the lowest-gradient pixel of its 3x3 neighborhood
/// (first in raster order; ties keep the seed) unless that pixel is already
/// taken by an earlier marker.
fn settle_markers(grad: &[f64], w: usize, h: usize, seeds: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let taken: HashSet<(usize, usize)> = seeds.iter().copied().collect();
    let mut placed = HashSet::new();
    seeds
        .iter()
        .map(|&(sx, sy)| {
            let mut best = (grad[sy * w + sx], sx, sy);
            for ny in sy.saturating_sub(1)..=(sy + 1).min(h - 1) {
                for nx in sx.saturating_sub(1)..=(sx + 1).min(w - 1) {
                    let g = grad[ny * w + nx];
                    if g < best.0 && !taken.contains(&(nx, ny)) && !placed.contains(&(nx, ny)) {
                        best = (g, nx, ny);
                    }
                }
            }
            placed.insert((best.1, best.2));
            (best.1, best.2)
        })
        .collect()
}

/// Raw watershed labels on the standardized grid markers.
pub fn watershed_raw(image: &Image, params: &AlgorithmParams) -> Result<LabelMap> {
    let space = params.color_space.unwrap_or(ColorSpace::Gray);
    let raster = to_color_space(image, space)?;
    let layout = GridLayout::new(image.width(), image.height(), params.k_desired)?;
    let grad = gradient_magnitude(&raster);
    let markers = settle_markers(&grad, raster.width(), raster.height(), &layout.seeds());
    Ok(flood_on(&raster, &grad, &markers, &layout.centers(), params.compactness))
}

pub fn watershed_segment(image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
    params.validate()?;
    let (raw, ns) = measure_runtime(|| watershed_raw(image, params));
    let raw = raw?;
    let markers = raw.label_count();
    let result = finish(raw, 0, ns);
    assert_eq!(result.k_generated, markers, "watershed floods are connected");
    Ok(result)
}
