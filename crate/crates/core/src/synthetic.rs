//! Deterministic synthetic dataset entries with known ground truth.
//!
//! The ground truth is a Voronoi partition of random sites grown over the
//! 4-neighbor grid, so every cell is 4-connected by construction. Each cell
//! gets a flat random color that differs from all adjacent cells by at least
//! `color_contrast` in some channel, and Gaussian pixel noise is added on top.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{DatasetEntry, Image, LabelMap};

const COLOR_ATTEMPTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub num_segments: usize,
    pub color_contrast: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            num_segments: 24,
            color_contrast: 48.0,
            noise_sigma: 4.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidDimensions {
                width: self.width,
                height: self.height,
                reason: "synthetic images must be at least 2x2",
            });
        }
        if self.num_segments < 2 {
            return Err(Error::param("num_segments", "must be at least 2"));
        }
        if self.num_segments > self.width * self.height {
            return Err(Error::param("num_segments", "exceeds the number of pixels"));
        }
        if !(0.0..=255.0).contains(&self.color_contrast) {
            return Err(Error::param("color_contrast", "must lie in [0, 255]"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise_sigma", "must be finite and non-negative"));
        }
        Ok(())
    }
}

fn sample_sites(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut taken = BTreeSet::new();
    let mut sites = Vec::with_capacity(spec.num_segments);
    while sites.len() < spec.num_segments {
        let x = rng.random_range(0..spec.width);
        let y = rng.random_range(0..spec.height);
        if taken.insert((x, y)) {
            sites.push((x, y));
        }
    }
    sites
}

/// Grows cells outward from the sites in order of (squared distance to the
/// owning site, site index). A pixel is claimed by the first entry popped for
/// it, which always comes from an already-claimed 4-neighbor.
fn grow_voronoi(width: usize, height: usize, sites: &[(usize, usize)]) -> Vec<u32> {
    let mut labels = vec![u32::MAX; width * height];
    let mut heap = BinaryHeap::new();
    let dist2 = |x: usize, y: usize, s: usize| {
        let (sx, sy) = sites[s];
        let dx = x as i64 - sx as i64;
        let dy = y as i64 - sy as i64;
        (dx * dx + dy * dy) as u64
    };
    for (s, &(x, y)) in sites.iter().enumerate() {
        heap.push(Reverse((0u64, s, y * width + x)));
    }
    while let Some(Reverse((_, s, i))) = heap.pop() {
        if labels[i] != u32::MAX {
            continue;
        }
        labels[i] = s as u32;
        let (x, y) = (i % width, i / width);
        let mut push = |nx: usize, ny: usize| {
            let j = ny * width + nx;
            if labels[j] == u32::MAX {
                heap.push(Reverse((dist2(nx, ny, s), s, j)));
            }
        };
        if x > 0 {
            push(x - 1, y);
        }
        if x + 1 < width {
            push(x + 1, y);
        }
        if y > 0 {
            push(x, y - 1);
        }
        if y + 1 < height {
            push(x, y + 1);
        }
    }
    labels
}

fn adjacency(width: usize, height: usize, labels: &[u32], n: usize) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let a = labels[i] as usize;
            for j in [(x + 1 < width).then(|| i + 1), (y + 1 < height).then(|| i + width)]
                .into_iter()
                .flatten()
            {
                let b = labels[j] as usize;
                if a != b {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
    }
    adj
}

fn separated(a: [u8; 3], b: [u8; 3], contrast: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .any(|(&p, &q)| f64::from(p.abs_diff(q)) >= contrast)
}

fn assign_colors(
    adj: &[BTreeSet<usize>],
    contrast: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[u8; 3]>> {
    let mut colors: Vec<Option<[u8; 3]>> = vec![None; adj.len()];
    for seg in 0..adj.len() {
        let ok = |c: [u8; 3], colors: &[Option<[u8; 3]>]| {
            adj[seg]
                .iter()
                .filter_map(|&n| colors[n])
                .all(|nc| separated(c, nc, contrast))
        };
        let mut chosen = None;
        for _ in 0..COLOR_ATTEMPTS {
            // Above half the range a channel pair can only be separated at
            // the extremes, so sample cube corners.
            let c = if contrast > 128.0 {
                [0; 3].map(|_: u8| if rng.random::<bool>() { 255 } else { 0 })
            } else {
                [rng.random(), rng.random(), rng.random()]
            };
            if ok(c, &colors) {
                chosen = Some(c);
                break;
            }
        }
        if chosen.is_none() {
            // Extreme corners of the RGB cube are maximally separated.
            chosen = (0..8u8)
                .map(|bits| [0, 1, 2].map(|ch| if bits >> ch & 1 == 1 { 255 } else { 0 }))
                .find(|&c| ok(c, &colors));
        }
        colors[seg] = Some(chosen.ok_or_else(|| {
            Error::param("color_contrast", "cannot separate adjacent segment colors")
        })?);
    }
    Ok(colors.into_iter().map(|c| c.expect("assigned")).collect())
}

/// Generates one entry; identical specs give bit-identical output.
pub fn generate_synthetic_entry(spec: &SyntheticSpec) -> Result<DatasetEntry> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sites = sample_sites(spec, &mut rng);
    let labels = grow_voronoi(spec.width, spec.height, &sites);
    let adj = adjacency(spec.width, spec.height, &labels, sites.len());
    let colors = assign_colors(&adj, spec.color_contrast, &mut rng)?;

    let mut data = Vec::with_capacity(labels.len() * 3);
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::param("noise_sigma", e.to_string()))?;
        for &l in &labels {
            for &c in &colors[l as usize] {
                let v = f64::from(c) + normal.sample(&mut rng);
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    } else {
        for &l in &labels {
            data.extend_from_slice(&colors[l as usize]);
        }
    }
    let image = Image::new(spec.width, spec.height, 3, data)?;
    let gt = LabelMap::new(spec.width, spec.height, labels)?;
    DatasetEntry::new(format!("syn_{:016x}", spec.seed), image, vec![gt])
}

/// `count` entries with seeds `base.seed + i`, ids `syn_0000`, `syn_0001`, ...
pub fn generate_synthetic_set(base: &SyntheticSpec, count: usize) -> Result<Vec<DatasetEntry>> {
    (0..count)
        .map(|i| {
            let spec = SyntheticSpec {
                seed: base.seed.wrapping_add(i as u64),
                ..base.clone()
            };
            let mut entry = generate_synthetic_entry(&spec)?;
            entry.id = format!("syn_{i:04}");
            Ok(entry)
        })
        .collect()
}
