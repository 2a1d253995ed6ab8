#![allow(dead_code)]

pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spix_core::{Image, LabelMap};

/// A random label map mixing three textures: pixel noise over a small
/// alphabet, axis-aligned blocks, and nearest-site cells.
pub fn random_map(seed: u64, w: usize, h: usize) -> LabelMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u32> = match rng.random_range(0..3) {
        0 => {
            let k = rng.random_range(1..6);
            (0..w * h).map(|_| rng.random_range(0..k)).collect()
        }
        1 => {
            let (bw, bh) = (rng.random_range(1..=w), rng.random_range(1..=h));
            let stride = w.div_ceil(bw) as u32;
            let base: u32 = rng.random_range(0..100);
            (0..w * h)
                .map(|i| base + ((i / w) / bh) as u32 * stride + ((i % w) / bw) as u32)
                .collect()
        }
        _ => {
            let sites: Vec<(usize, usize, u32)> = (0..rng.random_range(1..12))
                .map(|_| (rng.random_range(0..w), rng.random_range(0..h), rng.random_range(0..1000)))
                .collect();
            (0..w * h)
                .map(|i| {
                    let (x, y) = (i % w, i / w);
                    sites
                        .iter()
                        .min_by_key(|(sx, sy, _)| x.abs_diff(*sx).pow(2) + y.abs_diff(*sy).pow(2))
                        .map(|s| s.2)
                        .expect("at least one site")
                })
                .collect()
        }
    };
    LabelMap::new(w, h, labels).expect("valid dimensions")
}

pub fn random_image(seed: u64, w: usize, h: usize, channels: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let data = (0..w * h * channels).map(|_| rng.random()).collect();
    Image::new(w, h, channels, data).expect("valid dimensions")
}
