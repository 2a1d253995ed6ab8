//! Superpixel benchmarking toolkit.
//!
//! The crate bundles everything needed to benchmark superpixel algorithms
//! end to end at desk scale:
//!
//! * raster types, PNG/CSV codecs and a synthetic ground-truth generator
//!   ([`raster`], [`io`], [`color`], [`synthetic`]);
//! * connectivity enforcement ([`connectivity`]);
//! * the metric suite with worst-case aggregation over ground truths
//!   ([`metrics`]);
//! * three reference algorithms, one clustering-based, one watershed-based
//!   and one graph-based ([`algorithms`]);
//! * grid-search parameter optimization ([`optimization`]), K-independent
//!   summaries and ranking ([`summary`]), and perturbation sweeps
//!   ([`robustness`]);
//! * the K-sweep pipeline and CSV tables shared with the CLI ([`pipeline`],
//!   [`tables`]).

pub mod algorithms;
pub mod color;
pub mod connectivity;
pub mod error;
pub mod filter;
pub mod io;
pub mod metrics;
pub mod optimization;
pub mod pipeline;
pub mod raster;
pub mod robustness;
pub mod summary;
pub mod synthetic;
pub mod tables;
pub mod timing;

pub use algorithms::{segment, Algorithm, AlgorithmParams, SegmentationResult, Segmenter};
pub use error::{Error, Result};
pub use metrics::{MetricConfig, MetricRecord};
pub use raster::{DatasetEntry, FloatRaster, Image, LabelMap};
