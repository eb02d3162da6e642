//! Motion-based vehicle detection.
//!
//! The pipeline has two stages. A static background is reconstructed from
//! frames sampled at a fixed interval ([`background`]), then every frame is
//! differenced against it, converted to grayscale, thresholded and cleaned
//! with a morphological opening ([`imagecore`], [`detect`]). The surviving
//! foreground pixels are grouped with DBSCAN ([`clustering`]) and every
//! cluster counts as one vehicle.
//!
//! A per-pixel K-means reconstruction is provided as the baseline the mean
//! method is compared against, and [`synth`] generates deterministic traffic
//! scenes with exact ground truth for testing.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default). Every operation produces bit-identical output in either
//! mode; see [`Exec`].

pub mod background;
pub mod clustering;
pub mod detect;
mod error;
mod exec;
pub mod imagecore;
pub mod kv;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
