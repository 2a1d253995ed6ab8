//! Raster types shared by every stage of the benchmark.
//!
//! [`Image`] holds 8-bit intensities, [`LabelMap`] holds a partition of the
//! pixel grid and [`FloatRaster`] is the working representation for color
//! conversions and metric arithmetic. All rasters are row-major; multi-channel
//! data is interleaved.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// 8-bit raster with 1 or 3 interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "image must not be empty",
            });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch {
                expected: 3,
                found: channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "data length does not match width * height * channels",
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        Self::new(width, height, pixel.len(), data)
    }

    pub fn from_fn<F>(width: usize, height: usize, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<u8>,
    {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                if px.len() != channels {
                    return Err(Error::ChannelMismatch {
                        expected: channels,
                        found: px.len(),
                    });
                }
                data.extend_from_slice(&px);
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Float view in [0, 255], same channel layout.
    pub fn to_float(&self) -> FloatRaster {
        FloatRaster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

/// Floating-point raster used for color-space working copies.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatRaster {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) channels: usize,
    pub(crate) data: Vec<f64>,
}

impl FloatRaster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 || data.len() != width * height * channels {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "float raster data length does not match dimensions",
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub(crate) fn at(&self, index: usize) -> &[f64] {
        &self.data[index * self.channels..(index + 1) * self.channels]
    }

    /// Rounds and clamps back to 8 bits.
    pub fn to_image(&self) -> Result<Image> {
        Image::new(
            self.width,
            self.height,
            self.channels,
            self.data
                .iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        )
    }
}

/// Partition of the pixel grid into (not necessarily contiguous) integer labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "label map must not be empty",
            });
        }
        if labels.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "label count does not match width * height",
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Builds a map from nested rows; convenient for hand-written fixtures.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "ragged rows",
            });
        }
        Self::new(
            width,
            height,
            rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect(),
        )
    }

    pub fn constant(width: usize, height: usize, label: u32) -> Result<Self> {
        Self::new(width, height, vec![label; width * height])
    }

    pub fn from_fn<F: FnMut(usize, usize) -> u32>(
        width: usize,
        height: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.labels.chunks(self.width)
    }

    /// Number of distinct labels.
    pub fn label_count(&self) -> usize {
        let mut seen: Vec<u32> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Relabels to `0..K` in raster order of first appearance.
    pub fn canonicalize(&self) -> LabelMap {
        let (labels, _) = self.dense_labels();
        LabelMap {
            width: self.width,
            height: self.height,
            labels,
        }
    }

    pub fn is_canonical(&self) -> bool {
        let mut next = 0u32;
        let mut seen = HashSet::new();
        for &l in &self.labels {
            if seen.insert(l) {
                if l != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    /// Dense relabeling (first-appearance order) and the number of labels.
    pub(crate) fn dense_labels(&self) -> (Vec<u32>, usize) {
        let mut mapping: HashMap<u32, u32> = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let next = mapping.len() as u32;
                *mapping.entry(l).or_insert(next)
            })
            .collect();
        (labels, mapping.len())
    }

    pub(crate) fn check_same_dims(&self, other: &LabelMap) -> Result<()> {
        check_dims(self.dims(), other.dims())
    }
}

pub(crate) fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// One image with its ground-truth segmentations.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetEntry {
    pub id: String,
    pub image: Image,
    pub ground_truths: Vec<LabelMap>,
}

impl DatasetEntry {
    pub fn new(id: impl Into<String>, image: Image, ground_truths: Vec<LabelMap>) -> Result<Self> {
        if ground_truths.is_empty() {
            return Err(Error::Empty("ground-truth list"));
        }
        if image.width() < 2 || image.height() < 2 {
            return Err(Error::InvalidDimensions {
                width: image.width(),
                height: image.height(),
                reason: "dataset images must be at least 2x2",
            });
        }
        for gt in &ground_truths {
            check_dims(image.dims(), gt.dims())?;
        }
        Ok(Self {
            id: id.into(),
            image,
            ground_truths,
        })
    }
}
