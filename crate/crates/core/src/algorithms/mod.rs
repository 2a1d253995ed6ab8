//! Reference superpixel algorithms behind one segmentation contract.
//!
//! * [`slic`]: clustering-based (k-means in color-spatial space);
//! * [`watershed`]: marker-controlled priority flood with a compactness term;
//! * [`fh`]: graph-based greedy merging.
//!
//! Every algorithm returns a [`SegmentationResult`] whose labels are
//! canonical and 4-connected. The recorded runtime covers color conversion
//! and the raw algorithm but not connectivity enforcement.

pub mod fh;
pub mod params;
pub mod seeds;
pub mod slic;
pub mod watershed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fh::fh_segment;
pub use params::{AlgorithmParams, ParamValue};
pub use seeds::{grid_seeds, GridLayout};
pub use slic::{slic_segment, SlicState};
pub use watershed::watershed_segment;

use crate::connectivity::{connected_components, enforce_connectivity};
use crate::error::{Error, Result};
use crate::raster::{Image, LabelMap};

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult {
    /// Canonical, 4-connected labels after connectivity enforcement.
    pub labels: LabelMap,
    pub k_generated: usize,
    /// Number of 4-connected components of the raw output, before merging.
    pub k_raw: usize,
    pub runtime_ns: u64,
}

impl SegmentationResult {
    /// Wraps an arbitrary label map: components become superpixels, nothing
    /// is merged. `k_raw` counts those components.
    pub fn from_labels(labels: &LabelMap, runtime_ns: u64) -> Self {
        finish(labels.clone(), 0, runtime_ns)
    }
}

pub(crate) fn finish(raw: LabelMap, min_size: usize, runtime_ns: u64) -> SegmentationResult {
    let (_, k_raw) = connected_components(&raw);
    let labels = enforce_connectivity(&raw, min_size);
    SegmentationResult {
        k_generated: labels.label_count(),
        labels,
        k_raw,
        runtime_ns,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Slic,
    Watershed,
    Fh,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Slic, Algorithm::Watershed, Algorithm::Fh];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Slic => "slic",
            Algorithm::Watershed => "watershed",
            Algorithm::Fh => "fh",
        }
    }

    /// Baseline parameters: SLIC with m = 10 and 10 iterations, the classic
    /// watershed (λ = 0), and FH with `fh_k = 100`.
    pub fn default_params(self, k_desired: usize) -> AlgorithmParams {
        let mut p = AlgorithmParams::with_k(k_desired);
        match self {
            Algorithm::Slic => {}
            Algorithm::Watershed => p.compactness = 0.0,
            Algorithm::Fh => {
                p.extra.insert("fh_k".to_string(), 100.0);
            }
        }
        p
    }

    /// Checks everything an algorithm would reject before touching pixels,
    /// so callers can tell a bad configuration from a bad image.
    pub fn validate_params(self, params: &AlgorithmParams) -> Result<()> {
        params.validate()?;
        if self == Algorithm::Fh {
            fh::FhSettings::from_params(params)?;
        }
        Ok(())
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slic" => Ok(Algorithm::Slic),
            "watershed" => Ok(Algorithm::Watershed),
            "fh" => Ok(Algorithm::Fh),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Anything that maps an image and parameters to superpixels. Implemented by
/// [`Algorithm`] and by closures, so harnesses can run test stubs.
pub trait Segmenter: Sync {
    fn segment(&self, image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult>;
}

impl Segmenter for Algorithm {
    fn segment(&self, image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
        match self {
            Algorithm::Slic => slic_segment(image, params),
            Algorithm::Watershed => watershed_segment(image, params),
            Algorithm::Fh => fh_segment(image, params),
        }
    }
}

impl<F> Segmenter for F
where
    F: Fn(&Image, &AlgorithmParams) -> Result<SegmentationResult> + Sync,
{
    fn segment(&self, image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
        self(image, params)
    }
}

/// Dispatches on an algorithm id (`slic`, `watershed` or `fh`).
pub fn segment(algorithm_id: &str, image: &Image, params: &AlgorithmParams) -> Result<SegmentationResult> {
    algorithm_id.parse::<Algorithm>()?.segment(image, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::is_connected;

    fn textured() -> Image {
        Image::from_fn(30, 20, 3, |x, y| {
            let v = ((x / 6 + y / 5) % 2) as u8 * 150;
            vec![v, (x * 8) as u8, (y * 12) as u8]
        })
        .unwrap()
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let img = textured();
        let mut p = AlgorithmParams::with_k(12);
        p.extra.insert("fh_k".into(), 200.0);
        assert_eq!(segment("slic", &img, &p).unwrap().labels, slic_segment(&img, &p).unwrap().labels);
        assert_eq!(
            segment("watershed", &img, &p).unwrap().labels,
            watershed_segment(&img, &p).unwrap().labels
        );
        assert_eq!(segment("fh", &img, &p).unwrap().labels, fh_segment(&img, &p).unwrap().labels);
        assert!(matches!(segment("foo", &img, &p), Err(Error::UnknownAlgorithm(_))));
    }

    #[test]
    fn outputs_are_connected_canonical_partitions() {
        let img = textured();
        let mut p = AlgorithmParams::with_k(20);
        p.extra.insert("fh_k".into(), 100.0);
        for algo in Algorithm::ALL {
            let r = algo.segment(&img, &p).unwrap();
            assert!(r.runtime_ns > 0);
            assert!(r.labels.is_canonical(), "{algo}");
            assert!(is_connected(&r.labels), "{algo}");
            assert_eq!(r.k_generated, r.labels.label_count());
            assert_eq!(r.labels.dims(), img.dims());
            let again = algo.segment(&img, &p).unwrap();
            assert_eq!(again.labels, r.labels, "{algo} is deterministic");
        }
    }

    #[test]
    fn closures_are_segmenters() {
        let img = textured();
        let stub = |image: &Image, _: &AlgorithmParams| {
            Ok(SegmentationResult::from_labels(
                &LabelMap::constant(image.width(), image.height(), 9)?,
                1,
            ))
        };
        let r = stub.segment(&img, &AlgorithmParams::default()).unwrap();
        assert_eq!(r.k_generated, 1);
    }
}
