//! Image perturbations and the perturbation sweep harness.
//!
//! Noise and blur keep the image geometry, so results are scored against the
//! unperturbed ground truth. Affine transforms move the ground truth along
//! with the image using nearest-neighbor label resampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmParams, Segmenter};
use crate::error::{Error, Result};
use crate::filter::gaussian_blur_raster;
use crate::metrics::{aggregate, evaluate_entry, AggregateStats, MetricConfig, Stat};
use crate::raster::{DatasetEntry, Image, LabelMap};

/// Replaces each pixel with probability `p` by black or white (all channels
/// jointly, equal odds).
pub fn salt_pepper(image: &Image, p: f64, seed: u64) -> Result<Image> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", "must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = image.channels();
    let mut data = image.data().to_vec();
    for px in data.chunks_exact_mut(c) {
        if rng.random::<f64>() < p {
            px.fill(if rng.random::<bool>() { 255 } else { 0 });
        }
    }
    Image::new(image.width(), image.height(), c, data)
}

/// Adds N(0, sigma²) to every channel value, then rounds and clamps.
pub fn gaussian_noise(image: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "must be finite and non-negative"));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = image
        .data()
        .iter()
        .map(|&v| (f64::from(v) + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
        .collect();
    Image::new(image.width(), image.height(), image.channels(), data)
}

/// k x k mean filter with edge replication, rounded half-up. `k` of 0 or 1 is
/// the identity; other even sizes are rejected.
pub fn box_blur(image: &Image, k: usize) -> Result<Image> {
    if k <= 1 {
        return Ok(image.clone());
    }
    if k.is_multiple_of(2) {
        return Err(Error::param("k", "box filter size must be odd"));
    }
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let r = (k / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let src = image.data();
    let mut rows = vec![0u32; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for dx in -r..=r {
                let sx = clamp(x as isize + dx, w);
                for ch in 0..c {
                    rows[(y * w + x) * c + ch] += u32::from(src[(y * w + sx) * c + ch]);
                }
            }
        }
    }
    let n = (k * k) as u32;
    let mut data = vec![0u8; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut sum = 0u32;
                for dy in -r..=r {
                    let sy = clamp(y as isize + dy, h);
                    sum += rows[(sy * w + x) * c + ch];
                }
                data[(y * w + x) * c + ch] = ((2 * sum + n) / (2 * n)) as u8;
            }
        }
    }
    Image::new(w, h, c, data)
}

/// Separable Gaussian blur, radius `ceil(3 sigma)`, edge replication, rounded.
pub fn gaussian_blur(image: &Image, sigma: f64) -> Result<Image> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "must be finite and non-negative"));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    gaussian_blur_raster(&image.to_float(), sigma).to_image()
}

/// Forward map `p' = A (p − c) + c + t` with `A = R(rotation) · Shear · scale`
/// about the image center `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub scale: f64,
    pub rotation_deg: f64,
    pub shear: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for AffineParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            rotation_deg: 0.0,
            shear: 0.0,
            tx: 0.0,
            ty: 0.0,
        }
    }
}

impl AffineParams {
    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param("scale", "must be positive"));
        }
        let finite = [self.rotation_deg, self.shear, self.tx, self.ty];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("affine", "parameters must be finite"));
        }
        Ok(())
    }

    /// Returns a closure mapping output coordinates to source coordinates.
    fn inverse(&self, width: usize, height: usize) -> impl Fn(f64, f64) -> (f64, f64) {
        let (sin, cos) = self.rotation_deg.to_radians().sin_cos();
        let s = self.scale;
        // A = R · [[1, shear], [0, 1]] · s
        let a = [[cos * s, (cos * self.shear - sin) * s], [sin * s, (sin * self.shear + cos) * s]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
        let (tx, ty) = (self.tx, self.ty);
        move |x, y| {
            let (u, v) = (x - cx - tx, y - cy - ty);
            (inv[0][0] * u + inv[0][1] * v + cx, inv[1][0] * u + inv[1][1] * v + cy)
        }
    }
}

/// Inverse-mapped bilinear resampling; samples outside the image take the
/// nearest edge pixel. Dimensions are unchanged.
pub fn affine_transform(image: &Image, params: &AffineParams) -> Result<Image> {
    params.validate()?;
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let map = params.inverse(w, h);
    let src = image.data();
    let mut data = Vec::with_capacity(w * h * c);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map(x as f64, y as f64);
            let sx = sx.clamp(0.0, (w - 1) as f64);
            let sy = sy.clamp(0.0, (h - 1) as f64);
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            for ch in 0..c {
                let at = |xx: usize, yy: usize| f64::from(src[(yy * w + xx) * c + ch]);
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                data.push((top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(w, h, c, data)
}

/// The same geometric transform on labels, nearest-neighbor sampled.
pub fn affine_transform_labels(map: &LabelMap, params: &AffineParams) -> Result<LabelMap> {
    params.validate()?;
    let (w, h) = map.dims();
    let inverse = params.inverse(w, h);
    LabelMap::from_fn(w, h, |x, y| {
        let (sx, sy) = inverse(x as f64, y as f64);
        let sx = (sx + 0.5).floor().clamp(0.0, (w - 1) as f64) as usize;
        let sy = (sy + 0.5).floor().clamp(0.0, (h - 1) as f64) as usize;
        map.get(sx, sy)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    SaltPepper,
    GaussianNoise,
    BoxBlur,
    GaussianBlur,
    Affine,
}

impl PerturbationKind {
    pub fn id(self) -> &'static str {
        match self {
            PerturbationKind::SaltPepper => "salt_pepper",
            PerturbationKind::GaussianNoise => "gaussian_noise",
            PerturbationKind::BoxBlur => "box_blur",
            PerturbationKind::GaussianBlur => "gaussian_blur",
            PerturbationKind::Affine => "affine",
        }
    }

    /// Builds the perturbation for a scalar magnitude: probability, sigma,
    /// filter size, or rotation in degrees for `affine`.
    pub fn with_magnitude(self, magnitude: f64) -> Result<Perturbation> {
        Ok(match self {
            PerturbationKind::SaltPepper => Perturbation::SaltPepper { p: magnitude },
            PerturbationKind::GaussianNoise => Perturbation::GaussianNoise { sigma: magnitude },
            PerturbationKind::BoxBlur => {
                if magnitude < 0.0 || magnitude.fract() != 0.0 {
                    return Err(Error::param("k", "box filter size must be a non-negative integer"));
                }
                Perturbation::BoxBlur { k: magnitude as usize }
            }
            PerturbationKind::GaussianBlur => Perturbation::GaussianBlur { sigma: magnitude },
            PerturbationKind::Affine => Perturbation::Affine(AffineParams {
                rotation_deg: magnitude,
                ..AffineParams::default()
            }),
        })
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "salt_pepper" => PerturbationKind::SaltPepper,
            "gaussian_noise" => PerturbationKind::GaussianNoise,
            "box_blur" => PerturbationKind::BoxBlur,
            "gaussian_blur" => PerturbationKind::GaussianBlur,
            "affine" => PerturbationKind::Affine,
            other => return Err(Error::param("perturbation", format!("unknown kind `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    SaltPepper { p: f64 },
    GaussianNoise { sigma: f64 },
    BoxBlur { k: usize },
    GaussianBlur { sigma: f64 },
    Affine(AffineParams),
}

impl Perturbation {
    /// `seed` is used by the stochastic kinds only.
    pub fn apply(&self, image: &Image, seed: u64) -> Result<Image> {
        match *self {
            Perturbation::SaltPepper { p } => salt_pepper(image, p, seed),
            Perturbation::GaussianNoise { sigma } => gaussian_noise(image, sigma, seed),
            Perturbation::BoxBlur { k } => box_blur(image, k),
            Perturbation::GaussianBlur { sigma } => gaussian_blur(image, sigma),
            Perturbation::Affine(a) => affine_transform(image, &a),
        }
    }

    /// Ground truth matching the perturbed image.
    pub fn apply_to_ground_truth(&self, gt: &LabelMap) -> Result<LabelMap> {
        match self {
            Perturbation::Affine(a) => affine_transform_labels(gt, a),
            _ => Ok(gt.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub magnitude: f64,
    /// `None` when every image failed.
    pub stats: Option<AggregateStats>,
    /// Superpixel count before connectivity enforcement.
    pub k_raw: Option<Stat>,
    pub failures: usize,
}

/// One row per magnitude, in the given order. Image `i` is perturbed with
/// seed `seed + i`. Per-image failures are counted, not propagated.
#[allow(clippy::too_many_arguments)]
pub fn robustness_sweep<S: Segmenter + ?Sized>(
    segmenter: &S,
    params: &AlgorithmParams,
    entries: &[DatasetEntry],
    kind: PerturbationKind,
    magnitudes: &[f64],
    seed: u64,
    config: &MetricConfig,
) -> Result<Vec<SweepRow>> {
    if magnitudes.is_empty() {
        return Err(Error::Empty("magnitude list"));
    }
    magnitudes
        .iter()
        .map(|&magnitude| {
            let perturbation = kind.with_magnitude(magnitude)?;
            let outcomes: Vec<Result<(crate::metrics::MetricRecord, usize)>> = entries
                .par_iter()
                .enumerate()
                .map(|(i, entry)| {
                    let image = perturbation.apply(&entry.image, seed.wrapping_add(i as u64))?;
                    let gts = entry
                        .ground_truths
                        .iter()
                        .map(|gt| perturbation.apply_to_ground_truth(gt))
                        .collect::<Result<Vec<_>>>()?;
                    let result = segmenter.segment(&image, params)?;
                    let mut record = evaluate_entry(&image, &gts, &result.labels, config)?;
                    record.runtime_ns = Some(result.runtime_ns);
                    Ok((record, result.k_raw))
                })
                .collect();
            let mut records = Vec::new();
            let mut raw = Vec::new();
            let mut failures = 0;
            for outcome in outcomes {
                match outcome {
                    Ok((record, k_raw)) => {
                        records.push(record);
                        raw.push(k_raw as f64);
                    }
                    Err(_) => failures += 1,
                }
            }
            Ok(SweepRow {
                magnitude,
                stats: if records.is_empty() { None } else { Some(aggregate(&records)?) },
                k_raw: Stat::from_values(&raw),
                failures,
            })
        })
        .collect()
}
