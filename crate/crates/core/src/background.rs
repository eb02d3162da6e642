//! Static background reconstruction.
//!
//! [`MeanBackgroundBuilder`] averages sampled frames pixel by pixel; moving
//! objects occupy any given pixel in only a few samples and fade out of the
//! mean. [`kmeans_background`] is the slower baseline: every pixel's time
//! series is split in two with K-means and the median of the larger cluster
//! is kept.
//!
//! Both assume the scene is lit consistently over the sampled span. That is
//! a usage precondition; nothing here checks it.

use crate::clustering::{kmeans, KmeansParams, PointSet};
use crate::imagecore::RgbImage;
use crate::{Error, Exec, Result};

/// Samples per accumulation task.
const ACCUMULATE_CHUNK: usize = 1 << 15;

/// Running per-pixel, per-channel sums over added frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanBackgroundBuilder {
    width: usize,
    height: usize,
    sums: Vec<u64>,
    frame_count: u64,
}

impl MeanBackgroundBuilder {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            sums: vec![0; width * height * 3],
            frame_count: 0,
        }
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn add_frame(&mut self, frame: &RgbImage) -> Result<()> {
        self.add_frame_with(frame, Exec::default())
    }

    pub fn add_frame_with(&mut self, frame: &RgbImage, exec: Exec) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                width: frame.width(),
                height: frame.height(),
            });
        }
        let raw = frame.as_raw();
        exec.for_each_chunk_mut(&mut self.sums, ACCUMULATE_CHUNK, |i, acc| {
            let src = &raw[i * ACCUMULATE_CHUNK..i * ACCUMULATE_CHUNK + acc.len()];
            for (s, &v) in acc.iter_mut().zip(src) {
                *s += v as u64;
            }
        });
        self.frame_count += 1;
        Ok(())
    }

    /// Rounded per-channel mean of everything added so far.
    pub fn finalize(&self) -> Result<RgbImage> {
        if self.frame_count == 0 {
            return Err(Error::NotEnoughFrames { required: 1, got: 0 });
        }
        let n = self.frame_count;
        // round(s / n), half away from zero, in exact integer arithmetic
        let data = self.sums.iter().map(|&s| ((2 * s + n) / (2 * n)) as u8).collect();
        RgbImage::new(self.width, self.height, data)
    }
}

/// Pixel-wise mean of `frames`.
pub fn mean_background(frames: &[RgbImage]) -> Result<RgbImage> {
    mean_background_with(frames, Exec::default())
}

/// Same result as feeding every frame to a [`MeanBackgroundBuilder`], but
/// the stack is walked block by block so each block's accumulators stay in
/// cache while all frames are added to it.
pub fn mean_background_with(frames: &[RgbImage], exec: Exec) -> Result<RgbImage> {
    let first = frames.first().ok_or(Error::NotEnoughFrames { required: 1, got: 0 })?;
    for f in &frames[1..] {
        first.ensure_same_dims(f)?;
    }
    if frames.len() as u64 > MAX_BLOCKED_FRAMES {
        let mut b = MeanBackgroundBuilder::new(first.width(), first.height());
        for f in frames {
            b.add_frame_with(f, exec)?;
        }
        return b.finalize();
    }
    let n = frames.len() as u32;
    let raws: Vec<&[u8]> = frames.iter().map(|f| f.as_raw()).collect();
    let mut data = vec![0u8; first.as_raw().len()];
    exec.for_each_chunk_mut(&mut data, MEAN_BLOCK, |b, out| {
        let base = b * MEAN_BLOCK;
        let mut acc = [0u32; MEAN_BLOCK];
        let acc = &mut acc[..out.len()];
        for raw in &raws {
            for (a, &v) in acc.iter_mut().zip(&raw[base..base + out.len()]) {
                *a += v as u32;
            }
        }
        for (o, &a) in out.iter_mut().zip(acc.iter()) {
            *o = ((2 * a as u64 + n as u64) / (2 * n as u64)) as u8;
        }
    });
    RgbImage::new(first.width(), first.height(), data)
}

/// Samples per cache block in [`mean_background_with`].
const MEAN_BLOCK: usize = 4096;
/// u32 accumulators cannot overflow below this many 8-bit frames.
const MAX_BLOCKED_FRAMES: u64 = (u32::MAX / 255) as u64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPolicy {
    interval: f64,
    max_frames: usize,
}

impl SamplingPolicy {
    pub const DEFAULT_INTERVAL: f64 = 0.5;
    pub const DEFAULT_MAX_FRAMES: usize = 670;

    pub fn new(interval: f64, max_frames: usize) -> Result<Self> {
        if !(interval.is_finite() && interval > 0.0) {
            return Err(Error::param("interval", format!("must be > 0 seconds, got {interval}")));
        }
        if max_frames == 0 {
            return Err(Error::param("max_frames", "must be at least 1"));
        }
        Ok(Self { interval, max_frames })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn max_frames(&self) -> usize {
        self.max_frames
    }
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self {
            interval: Self::DEFAULT_INTERVAL,
            max_frames: Self::DEFAULT_MAX_FRAMES,
        }
    }
}

/// Picks frames from a timestamped stream: the first one, then every frame
/// at least `interval` seconds after the previously picked one, up to
/// `max_frames` picks.
pub fn sample_frames<T>(source: impl IntoIterator<Item = (f64, T)>, policy: &SamplingPolicy) -> Vec<T> {
    let mut out = Vec::new();
    let mut last: Option<f64> = None;
    for (t, frame) in source {
        if out.len() >= policy.max_frames {
            break;
        }
        if last.is_none_or(|l| t - l >= policy.interval) {
            last = Some(t);
            out.push(frame);
        }
    }
    out
}

/// Number of frames the K-means baseline uses by default.
pub const KMEANS_DEFAULT_FRAMES: usize = 20;

pub fn kmeans_background(frames: &[RgbImage], k: usize, seed: u64) -> Result<RgbImage> {
    kmeans_background_with(frames, k, seed, Exec::default())
}

/// Per-pixel K-means reconstruction.
///
/// For each pixel the RGB values across `frames` are clustered into `k`
/// groups. The group with the most members wins; among equally large groups
/// the one with the lower variance wins, then the lower index. The output
/// is the per-channel lower median of the winning group.
pub fn kmeans_background_with(frames: &[RgbImage], k: usize, seed: u64, exec: Exec) -> Result<RgbImage> {
    let (width, height) = check_stack(frames)?;
    let raws: Vec<&[u8]> = frames.iter().map(|f| f.as_raw()).collect();
    let pixels = exec.map_range(width * height, |i| {
        let series: Vec<[u8; 3]> = raws.iter().map(|r| [r[3 * i], r[3 * i + 1], r[3 * i + 2]]).collect();
        pixel_background(&series, k, pixel_seed(seed, i))
    });
    let mut data = Vec::with_capacity(width * height * 3);
    for p in pixels {
        data.extend_from_slice(&p?);
    }
    RgbImage::new(width, height, data)
}

fn check_stack(frames: &[RgbImage]) -> Result<(usize, usize)> {
    if frames.len() < 2 {
        return Err(Error::NotEnoughFrames {
            required: 2,
            got: frames.len(),
        });
    }
    let first = &frames[0];
    for f in &frames[1..] {
        first.ensure_same_dims(f)?;
    }
    Ok(first.dims())
}

fn pixel_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Background value for one pixel's time series.
pub fn pixel_background(series: &[[u8; 3]], k: usize, seed: u64) -> Result<[u8; 3]> {
    let mut points = PointSet::with_capacity(3, series.len());
    for s in series {
        points.push(&[s[0] as f64, s[1] as f64, s[2] as f64]);
    }
    let params = KmeansParams::default();
    let result = kmeans(&points, k, params.max_iter, params.tol, seed)?;

    let sizes = result.cluster_sizes();
    let spread = |c: usize| -> f64 {
        let mu = result.centroids.point(c);
        let sq: f64 = points
            .iter()
            .zip(&result.assignment)
            .filter(|(_, &a)| a == c)
            .map(|(p, _)| p.iter().zip(mu).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum();
        sq / sizes[c].max(1) as f64
    };
    let mut best = 0;
    for c in 1..sizes.len() {
        if sizes[c] > sizes[best] || (sizes[c] == sizes[best] && spread(c) < spread(best)) {
            best = c;
        }
    }

    let mut out = [0u8; 3];
    for (ch, slot) in out.iter_mut().enumerate() {
        let mut vals: Vec<u8> = series
            .iter()
            .zip(&result.assignment)
            .filter(|(_, &a)| a == best)
            .map(|(s, _)| s[ch])
            .collect();
        vals.sort_unstable();
        *slot = vals[(vals.len() - 1) / 2];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(v: u8) -> RgbImage {
        RgbImage::filled(1, 1, [v, v, v]).unwrap()
    }

    fn gray_series(vals: &[u8]) -> Vec<[u8; 3]> {
        vals.iter().map(|&v| [v, v, v]).collect()
    }

    #[test]
    fn single_frame_round_trips() {
        let f = RgbImage::from_fn(4, 3, |x, y| [x as u8 * 10, y as u8 * 20, 7]).unwrap();
        let mut b = MeanBackgroundBuilder::new(4, 3);
        b.add_frame(&f).unwrap();
        assert_eq!(b.finalize().unwrap(), f);
    }

    #[test]
    fn mean_rounds_half_away_from_zero() {
        assert_eq!(mean_background(&[px(10), px(20)]).unwrap(), px(15));
        assert_eq!(mean_background(&[px(10), px(20), px(31)]).unwrap(), px(20));
        assert_eq!(mean_background(&[px(10), px(11)]).unwrap(), px(11));
        assert_eq!(mean_background(&[px(254), px(255)]).unwrap(), px(255));
    }

    #[test]
    fn finalize_needs_frames() {
        let b = MeanBackgroundBuilder::new(2, 2);
        assert_eq!(b.finalize(), Err(Error::NotEnoughFrames { required: 1, got: 0 }));
    }

    #[test]
    fn finalize_leaves_builder_usable() {
        let mut b = MeanBackgroundBuilder::new(1, 1);
        b.add_frame(&px(10)).unwrap();
        assert_eq!(b.finalize().unwrap(), px(10));
        b.add_frame(&px(30)).unwrap();
        assert_eq!(b.finalize().unwrap(), px(20));
    }

    #[test]
    fn add_frame_checks_dims() {
        let mut b = MeanBackgroundBuilder::new(2, 2);
        assert!(matches!(b.add_frame(&px(1)), Err(Error::DimensionMismatch { .. })));
        assert_eq!(b.frame_count(), 0);
    }

    #[test]
    fn sampling_by_interval() {
        let src: Vec<(f64, usize)> = (0..10).map(|i| (i as f64 * 0.1, i)).collect();
        let p = SamplingPolicy::new(0.5, 670).unwrap();
        assert_eq!(sample_frames(src.clone(), &p), vec![0, 5]);
        let wide = SamplingPolicy::new(10.0, 670).unwrap();
        assert_eq!(sample_frames(src.clone(), &wide), vec![0]);
        let capped = SamplingPolicy::new(0.1, 3).unwrap();
        assert_eq!(sample_frames(src, &capped).len(), 3);
        assert!(sample_frames(Vec::<(f64, u8)>::new(), &p).is_empty());
    }

    #[test]
    fn sampling_policy_validation() {
        assert!(SamplingPolicy::new(0.0, 1).is_err());
        assert!(SamplingPolicy::new(0.5, 0).is_err());
        assert_eq!(SamplingPolicy::default().interval(), 0.5);
        assert_eq!(SamplingPolicy::default().max_frames(), 670);
    }

    #[test]
    fn kmeans_pixel_picks_the_majority_mode() {
        for seed in 0..20 {
            assert_eq!(
                pixel_background(&gray_series(&[50, 52, 48, 200, 51]), 2, seed).unwrap(),
                [50; 3]
            );
            assert_eq!(
                pixel_background(&gray_series(&[0, 0, 0, 255, 255]), 2, seed).unwrap(),
                [0; 3]
            );
        }
    }

    #[test]
    fn kmeans_pixel_tie_prefers_stable_cluster() {
        // two clusters of three: {10,10,10} is tighter than {200,210,220}
        let s = gray_series(&[200, 10, 210, 10, 220, 10]);
        for seed in 0..20 {
            assert_eq!(pixel_background(&s, 2, seed).unwrap(), [10; 3]);
        }
    }

    #[test]
    fn kmeans_background_identical_frames() {
        let f = RgbImage::from_fn(5, 4, |x, y| [x as u8, y as u8, 9]).unwrap();
        let stack = vec![f.clone(); 6];
        assert_eq!(kmeans_background(&stack, 2, 1).unwrap(), f);
    }

    #[test]
    fn kmeans_background_errors() {
        assert!(matches!(
            kmeans_background(&[px(1)], 2, 0),
            Err(Error::NotEnoughFrames { required: 2, got: 1 })
        ));
        let other = RgbImage::filled(2, 1, [0; 3]).unwrap();
        assert!(kmeans_background(&[px(1), other], 2, 0).is_err());
    }

    #[test]
    fn kmeans_background_modes_agree() {
        let stack: Vec<RgbImage> = (0..8)
            .map(|t| {
                RgbImage::from_fn(6, 5, |x, y| {
                    [((x * 31 + y * 7 + t * 13) % 256) as u8, (t * 20) as u8, 3]
                })
                .unwrap()
            })
            .collect();
        assert_eq!(
            kmeans_background_with(&stack, 2, 3, Exec::Sequential).unwrap(),
            kmeans_background_with(&stack, 2, 3, Exec::Parallel).unwrap()
        );
    }
}
