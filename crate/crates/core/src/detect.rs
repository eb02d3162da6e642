//! Per-frame vehicle detection.
//!
//! A frame is differenced against the background, converted to grayscale,
//! thresholded and opened. White pixels inside the region of interest are
//! subsampled on a `stride` lattice and clustered with DBSCAN; each cluster
//! is one vehicle, noise points are dropped.

use serde::{Deserialize, Serialize};

use crate::clustering::{dbscan_with, ClusterLabeling, DbscanParams, Label, NeighborSearch, PointSet};
use crate::imagecore::{abs_diff, binarize, morph_open_with, to_grayscale, BinaryImage, RgbImage, StructuringElement};
use crate::{Error, Exec, Result};

/// Axis-aligned rectangle in pixel coordinates: `x..x+width`, `y..y+height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.width && y < self.y + self.height
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.width > 0 && self.height > 0 && self.x + self.width <= width && self.y + self.height <= height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub threshold: u8,
    pub se_size: usize,
    pub epsilon: f64,
    pub min_pts: usize,
    pub stride: usize,
    pub roi: Option<Roi>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            threshold: 30,
            se_size: 3,
            epsilon: 15.0,
            min_pts: 40,
            stride: 2,
            roi: None,
        }
    }
}

impl DetectConfig {
    /// Checks everything that does not depend on the frame size.
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        if self.se_size == 0 || self.se_size.is_multiple_of(2) {
            return Err(Error::param(
                "se_size",
                format!("must be odd and positive, got {}", self.se_size),
            ));
        }
        DbscanParams::new(self.epsilon, self.min_pts)?;
        Ok(())
    }

    /// [`DetectConfig::validate`] plus the ROI bounds check.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        if let Some(roi) = self.roi {
            if !roi.fits(width, height) {
                return Err(Error::param(
                    "roi",
                    format!(
                        "{},{},{},{} does not fit inside a {width}x{height} frame",
                        roi.x, roi.y, roi.width, roi.height
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn structuring_element(&self) -> Result<StructuringElement> {
        StructuringElement::square(self.se_size)
    }

    pub fn dbscan_params(&self) -> Result<DbscanParams> {
        DbscanParams::new(self.epsilon, self.min_pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BoundingBox {
    /// True when this box lies entirely inside `rect` given as `(x, y, w, h)`.
    pub fn inside(&self, x: usize, y: usize, w: usize, h: usize) -> bool {
        self.min_x >= x && self.min_y >= y && self.max_x < x + w && self.max_y < y + h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleCluster {
    pub centroid: [f64; 2],
    pub pixel_count: usize,
    pub bbox: BoundingBox,
    /// Largest centroid-to-member distance.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub frame_id: usize,
    pub vehicle_count: usize,
    pub clusters: Vec<VehicleCluster>,
    pub foreground_pixel_count: usize,
}

pub fn extract_foreground(frame: &RgbImage, background: &RgbImage, cfg: &DetectConfig) -> Result<BinaryImage> {
    extract_foreground_with(frame, background, cfg, Exec::default())
}

/// `open(binarize(gray(|frame - background|)))`.
pub fn extract_foreground_with(
    frame: &RgbImage,
    background: &RgbImage,
    cfg: &DetectConfig,
    exec: Exec,
) -> Result<BinaryImage> {
    cfg.validate()?;
    let diff = abs_diff(frame, background)?;
    let mask = binarize(&to_grayscale(&diff), cfg.threshold);
    Ok(morph_open_with(&mask, &cfg.structuring_element()?, exec))
}

fn keep(x: usize, y: usize, cfg: &DetectConfig) -> bool {
    cfg.roi.is_none_or(|r| r.contains(x, y))
}

/// White pixels on the `stride` lattice inside the ROI, row-major.
pub fn foreground_points(mask: &BinaryImage, cfg: &DetectConfig) -> PointSet {
    let stride = cfg.stride.max(1);
    let mut pts = PointSet::new(2);
    for y in (0..mask.height()).step_by(stride) {
        for x in (0..mask.width()).step_by(stride) {
            if mask.is_white(x, y) && keep(x, y, cfg) {
                pts.push(&[x as f64, y as f64]);
            }
        }
    }
    pts
}

/// White pixels inside the ROI, before subsampling.
pub fn foreground_pixel_count(mask: &BinaryImage, cfg: &DetectConfig) -> usize {
    match cfg.roi {
        None => mask.count_white(),
        Some(r) => {
            let mut n = 0;
            for y in r.y..(r.y + r.height).min(mask.height()) {
                for x in r.x..(r.x + r.width).min(mask.width()) {
                    n += mask.is_white(x, y) as usize;
                }
            }
            n
        }
    }
}

pub fn detect_frame(
    frame_id: usize,
    frame: &RgbImage,
    background: &RgbImage,
    cfg: &DetectConfig,
) -> Result<DetectionResult> {
    detect_frame_with(frame_id, frame, background, cfg, Exec::default())
}

pub fn detect_frame_with(
    frame_id: usize,
    frame: &RgbImage,
    background: &RgbImage,
    cfg: &DetectConfig,
    exec: Exec,
) -> Result<DetectionResult> {
    cfg.validate_for(frame.width(), frame.height())?;
    let mask = extract_foreground_with(frame, background, cfg, exec)?;
    let points = foreground_points(&mask, cfg);
    let labeling = dbscan_with(&points, &cfg.dbscan_params()?, NeighborSearch::Auto, exec);
    let clusters = summarize(&points, &labeling);
    Ok(DetectionResult {
        frame_id,
        vehicle_count: clusters.len(),
        clusters,
        foreground_pixel_count: foreground_pixel_count(&mask, cfg),
    })
}

/// Runs [`detect_frame`] over a sequence; frame ids are sequence indices.
/// Results come back in frame order whatever the execution mode.
pub fn detect_sequence(
    frames: &[RgbImage],
    background: &RgbImage,
    cfg: &DetectConfig,
    exec: Exec,
) -> Result<Vec<DetectionResult>> {
    if let Some(f) = frames.first() {
        cfg.validate_for(f.width(), f.height())?;
    }
    // frames in parallel, each frame sequential inside
    exec.map_range(frames.len(), |i| {
        detect_frame_with(i, &frames[i], background, cfg, Exec::Sequential)
    })
    .into_iter()
    .collect()
}

fn summarize(points: &PointSet, labeling: &ClusterLabeling) -> Vec<VehicleCluster> {
    labeling
        .members()
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|members| {
            let n = members.len() as f64;
            let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &i| {
                let p = points.point(i);
                (sx + p[0], sy + p[1])
            });
            let centroid = [sx / n, sy / n];
            let mut bbox = BoundingBox {
                min_x: usize::MAX,
                min_y: usize::MAX,
                max_x: 0,
                max_y: 0,
            };
            let mut radius: f64 = 0.0;
            for &i in &members {
                let p = points.point(i);
                let (x, y) = (p[0] as usize, p[1] as usize);
                bbox.min_x = bbox.min_x.min(x);
                bbox.min_y = bbox.min_y.min(y);
                bbox.max_x = bbox.max_x.max(x);
                bbox.max_y = bbox.max_y.max(y);
                radius = radius.max(((p[0] - centroid[0]).powi(2) + (p[1] - centroid[1]).powi(2)).sqrt());
            }
            VehicleCluster {
                centroid,
                pixel_count: members.len(),
                bbox,
                radius,
            }
        })
        .collect()
}

/// Smallest circle radius drawn by [`annotate`].
pub const MIN_ANNOTATION_RADIUS: f64 = 5.0;

/// Copy of `frame` with a midpoint circle around every detected cluster.
pub fn annotate(frame: &RgbImage, result: &DetectionResult, color: [u8; 3]) -> RgbImage {
    let mut out = frame.clone();
    for c in &result.clusters {
        let r = c.radius.max(MIN_ANNOTATION_RADIUS).round() as i64;
        let cx = c.centroid[0].round() as i64;
        let cy = c.centroid[1].round() as i64;
        draw_circle(&mut out, cx, cy, r, color);
    }
    out
}

fn draw_circle(img: &mut RgbImage, cx: i64, cy: i64, r: i64, color: [u8; 3]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut plot = |x: i64, y: i64| {
        if x >= 0 && y >= 0 && x < w && y < h {
            img.put_pixel(x as usize, y as usize, color);
        }
    };
    let mut x = r;
    let mut y = 0;
    let mut err = 1 - r;
    while x >= y {
        for (dx, dy) in [(x, y), (y, x), (-y, x), (-x, y), (-x, -y), (-y, -x), (y, -x), (x, -y)] {
            plot(cx + dx, cy + dy);
        }
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
}

/// True when some member of every cluster is a core point.
pub fn clusters_have_core(labeling: &ClusterLabeling) -> bool {
    let mut seen = vec![false; labeling.cluster_count];
    for (l, &core) in labeling.labels.iter().zip(&labeling.is_core) {
        if let (Label::Cluster(c), true) = (l, core) {
            seen[*c] = true;
        }
    }
    seen.into_iter().all(|s| s)
}
