//! Phase timings for background reconstruction and detection.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::Result;
use motiondet::background::{kmeans_background, mean_background};
use motiondet::detect::{detect_sequence, DetectConfig};
use motiondet::imagecore::RgbImage;
use motiondet::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    BackgroundReconstruction,
    Detection,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::BackgroundReconstruction => "background_reconstruction",
            Phase::Detection => "detection",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub phase: Phase,
    pub wall_seconds: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub const CSV_HEADER: &str = "method,phase,wall_seconds,frames";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{}",
                r.method,
                r.phase.name(),
                r.wall_seconds,
                r.frames
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<10} {:>28} {:>12} {:>8}\n", "method", "phase", "seconds", "frames");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>28} {:>12.6} {:>8}",
                r.method,
                r.phase.name(),
                r.wall_seconds,
                r.frames
            );
        }
        out
    }

    pub fn row(&self, method: &str, phase: Phase) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method && r.phase == phase)
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Mean reconstruction over `sampled`, K-means over its first
/// `kmeans_frames`, and per-frame detection over `frames` against the mean
/// background. Detection time is averaged per frame.
pub fn run(
    frames: &[RgbImage],
    sampled: &[RgbImage],
    kmeans_frames: usize,
    cfg: &DetectConfig,
    seed: u64,
) -> Result<BenchReport> {
    let (bg, mean_s) = timed(|| Ok(mean_background(sampled)?))?;
    let km = &sampled[..kmeans_frames.min(sampled.len())];
    let (_, kmeans_s) = timed(|| Ok(kmeans_background(km, 2, seed)?))?;
    let (_, detect_s) = timed(|| Ok(detect_sequence(frames, &bg, cfg, Exec::default())?))?;
    Ok(BenchReport {
        rows: vec![
            BenchRow {
                method: "mean",
                phase: Phase::BackgroundReconstruction,
                wall_seconds: mean_s,
                frames: sampled.len(),
            },
            BenchRow {
                method: "kmeans",
                phase: Phase::BackgroundReconstruction,
                wall_seconds: kmeans_s,
                frames: km.len(),
            },
            BenchRow {
                method: "proposed",
                phase: Phase::Detection,
                wall_seconds: detect_s / frames.len().max(1) as f64,
                frames: frames.len(),
            },
        ],
    })
}
