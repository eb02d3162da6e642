//! Run configuration: a flat key-value file plus command-line overrides.
//!
//! Recognised keys (flags of the same name with `-` instead of `_` win over
//! the file):
//!
//! | key             | default | meaning                                   |
//! |-----------------|---------|-------------------------------------------|
//! | input           |         | frame directory or scene spec file        |
//! | output          |         | output file or directory                  |
//! | background      |         | precomputed background image for detect   |
//! | method          | mean    | `mean` or `kmeans`                        |
//! | threshold       | 30      | binarization threshold                    |
//! | se_size         | 3       | side of the square structuring element    |
//! | epsilon         | 15      | DBSCAN radius in pixels                   |
//! | min_pts         | 40      | DBSCAN density threshold                  |
//! | stride          | 2       | foreground subsampling stride             |
//! | roi             | none    | `x,y,w,h` region of interest              |
//! | interval        | 0.5     | background sampling interval, seconds     |
//! | max_frames      | 670     | cap on sampled background frames          |
//! | fps             | 2       | frame rate of the input sequence          |
//! | kmeans_frames   | 20      | frames used by the K-means baseline       |
//! | seed            | 0       | K-means seed, and scene seed override     |
//! | emit_annotated  | false   | write annotated frames                    |
//! | emit_background | false   | write the background next to the records  |

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Result};
use motiondet::background::{SamplingPolicy, KMEANS_DEFAULT_FRAMES};
use motiondet::detect::{DetectConfig, Roi};
use motiondet::kv::{parse_tuple, KvMap};

pub const KEYS: &[&str] = &[
    "input",
    "output",
    "background",
    "method",
    "threshold",
    "se_size",
    "epsilon",
    "min_pts",
    "stride",
    "roi",
    "interval",
    "max_frames",
    "fps",
    "kmeans_frames",
    "seed",
    "emit_annotated",
    "emit_background",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mean,
    Kmeans,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean" => Ok(Method::Mean),
            "kmeans" => Ok(Method::Kmeans),
            other => Err(format!("unknown method `{other}` (expected mean or kmeans)")),
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Kmeans => "kmeans",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub background: Option<PathBuf>,
    pub method: Method,
    pub detect: DetectConfig,
    pub sampling: SamplingPolicy,
    pub fps: f64,
    pub kmeans_frames: usize,
    pub seed: Option<u64>,
    pub emit_annotated: bool,
    pub emit_background: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            background: None,
            method: Method::Mean,
            detect: DetectConfig::default(),
            sampling: SamplingPolicy::default(),
            fps: 2.0,
            kmeans_frames: KMEANS_DEFAULT_FRAMES,
            seed: None,
            emit_annotated: false,
            emit_background: false,
        }
    }
}

pub fn parse_roi(s: &str) -> Result<Option<Roi>, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let [x, y, width, height] = parse_tuple::<usize, 4>(s, ',')?;
    if width == 0 || height == 0 {
        return Err("roi width and height must be positive".into());
    }
    Ok(Some(Roi { x, y, width, height }))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

impl RunConfig {
    /// Builds a config from `file` (may be empty) with `overrides` applied on top.
    pub fn from_kv(mut kv: KvMap, overrides: &[(&str, String)]) -> Result<Self> {
        for (k, v) in overrides {
            kv.insert(*k, v);
        }
        kv.reject_unknown(|k| KEYS.contains(&k))?;

        let d = RunConfig::default();
        let detect = DetectConfig {
            threshold: kv.parse_or("threshold", d.detect.threshold)?,
            se_size: kv.parse_or("se_size", d.detect.se_size)?,
            epsilon: kv.parse_or("epsilon", d.detect.epsilon)?,
            min_pts: kv.parse_or("min_pts", d.detect.min_pts)?,
            stride: kv.parse_or("stride", d.detect.stride)?,
            roi: kv.parse_with("roi", parse_roi)?.flatten(),
        };
        detect.validate()?;
        let sampling = SamplingPolicy::new(
            kv.parse_or("interval", d.sampling.interval())?,
            kv.parse_or("max_frames", d.sampling.max_frames())?,
        )?;
        let fps: f64 = kv.parse_or("fps", d.fps)?;
        if !(fps.is_finite() && fps > 0.0) {
            bail!("invalid parameter `fps`: must be > 0, got {fps}");
        }
        let kmeans_frames: usize = kv.parse_or("kmeans_frames", d.kmeans_frames)?;
        if kmeans_frames < 2 {
            bail!("invalid parameter `kmeans_frames`: at least 2 frames required");
        }
        Ok(Self {
            input: kv.parse_opt("input")?,
            output: kv.parse_opt("output")?,
            background: kv.parse_opt("background")?,
            method: kv.parse_with("method", |s| s.parse())?.unwrap_or(d.method),
            detect,
            sampling,
            fps,
            kmeans_frames,
            seed: kv.parse_opt("seed")?,
            emit_annotated: kv.parse_with("emit_annotated", parse_bool)?.unwrap_or(false),
            emit_background: kv.parse_with("emit_background", parse_bool)?.unwrap_or(false),
        })
    }
}
