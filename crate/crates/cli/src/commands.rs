//! Subcommand implementations. Every command computes all of its results
//! before the first file is written, and every file is written through a
//! temporary sibling that is renamed into place.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use motiondet::background::{kmeans_background, mean_background, sample_frames};
use motiondet::detect::{annotate, detect_sequence, DetectionResult};
use motiondet::imagecore::RgbImage;
use motiondet::kv::KvMap;
use motiondet::synth::{generate, SceneSpec};
use motiondet::Exec;

use crate::config::{Method, RunConfig};
use crate::{bench, pnm, records};

pub const DETECTIONS_FILE: &str = "detections.ndjson";
pub const BACKGROUND_FILE: &str = "background.ppm";
pub const TRUTH_FILE: &str = "truth.ndjson";
pub const ANNOTATION_COLOR: [u8; 3] = [255, 0, 0];

pub fn frame_file_name(i: usize) -> String {
    format!("frame_{i:05}.ppm")
}

pub fn annotated_file_name(i: usize) -> String {
    format!("annotated_{i:05}.ppm")
}

/// Writes `bytes` to `path` so that `path` either keeps its old content or
/// holds all of `bytes`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| anyhow!(e.error))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn is_frame_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("ppm") || e.eq_ignore_ascii_case("pgm"))
}

/// Frames of a directory of `.ppm`/`.pgm` files, in file name order.
pub fn read_frame_dir(dir: &Path) -> Result<Vec<RgbImage>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| is_frame_file(p));
    paths.sort();
    if paths.is_empty() {
        bail!("no frames found in {}", dir.display());
    }
    let mut frames = Vec::with_capacity(paths.len());
    for p in &paths {
        let img = pnm::read_rgb(p)?;
        if let Some(first) = frames.first() {
            let first: &RgbImage = first;
            if img.dims() != first.dims() {
                bail!(
                    "{} is {}x{} but {} is {}x{}",
                    p.display(),
                    img.width(),
                    img.height(),
                    paths[0].display(),
                    first.width(),
                    first.height()
                );
            }
        }
        frames.push(img);
    }
    Ok(frames)
}

pub fn read_scene(path: &Path, seed: Option<u64>) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let kv = KvMap::parse(&text).with_context(|| format!("invalid scene spec {}", path.display()))?;
    let mut spec = SceneSpec::from_kv(&kv).with_context(|| format!("invalid scene spec {}", path.display()))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()
        .with_context(|| format!("invalid scene spec {}", path.display()))?;
    Ok(spec)
}

/// Frames from the configured input: a frame directory, or a scene spec
/// that is rendered in memory.
pub fn load_frames(cfg: &RunConfig) -> Result<Vec<RgbImage>> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| anyhow!("no input given (use --input)"))?;
    if input.is_dir() {
        read_frame_dir(input)
    } else {
        let spec = read_scene(input, cfg.seed)?;
        Ok(generate(&spec)?.0)
    }
}

fn require_output(cfg: &RunConfig) -> Result<&Path> {
    cfg.output
        .as_deref()
        .ok_or_else(|| anyhow!("no output given (use --out)"))
}

/// Frames selected for background reconstruction, assuming frame `i` was
/// captured at `i / fps` seconds.
pub fn sampled<'a>(frames: &'a [RgbImage], cfg: &RunConfig) -> Vec<&'a RgbImage> {
    let fps = cfg.fps;
    sample_frames(
        frames.iter().enumerate().map(|(i, f)| (i as f64 / fps, f)),
        &cfg.sampling,
    )
}

pub struct Reconstruction {
    pub image: RgbImage,
    pub frames: usize,
    pub wall_seconds: f64,
}

pub fn reconstruct(frames: &[RgbImage], cfg: &RunConfig) -> Result<Reconstruction> {
    let mut stack: Vec<RgbImage> = sampled(frames, cfg).into_iter().cloned().collect();
    if cfg.method == Method::Kmeans {
        stack.truncate(cfg.kmeans_frames);
    }
    let start = Instant::now();
    let image = match cfg.method {
        Method::Mean => mean_background(&stack)?,
        Method::Kmeans => kmeans_background(&stack, 2, cfg.seed.unwrap_or(0))?,
    };
    Ok(Reconstruction {
        image,
        frames: stack.len(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_background(cfg: &RunConfig) -> Result<String> {
    let out = require_output(cfg)?;
    let frames = load_frames(cfg)?;
    let r = reconstruct(&frames, cfg)?;
    write_atomic(out, &pnm::encode_ppm(&r.image))?;
    Ok(format!(
        "method={} frames={} wall_seconds={:.6}\n",
        cfg.method.name(),
        r.frames,
        r.wall_seconds
    ))
}

struct DetectOutput {
    records: Vec<DetectionResult>,
    annotated: Vec<RgbImage>,
}

fn detect_all(frames: &[RgbImage], background: &RgbImage, cfg: &RunConfig) -> Result<DetectOutput> {
    let records = detect_sequence(frames, background, &cfg.detect, Exec::default())?;
    let annotated = if cfg.emit_annotated {
        frames
            .iter()
            .zip(&records)
            .map(|(f, r)| annotate(f, r, ANNOTATION_COLOR))
            .collect()
    } else {
        Vec::new()
    };
    Ok(DetectOutput { records, annotated })
}

fn write_detections(dir: &Path, out: &DetectOutput, background: Option<&RgbImage>) -> Result<()> {
    write_atomic(&dir.join(DETECTIONS_FILE), records::emit(&out.records)?.as_bytes())?;
    for (i, img) in out.annotated.iter().enumerate() {
        write_atomic(&dir.join(annotated_file_name(i)), &pnm::encode_ppm(img))?;
    }
    if let Some(bg) = background {
        write_atomic(&dir.join(BACKGROUND_FILE), &pnm::encode_ppm(bg))?;
    }
    Ok(())
}

fn summary(records: &[DetectionResult]) -> String {
    let total: usize = records.iter().map(|r| r.vehicle_count).sum();
    let peak = records.iter().map(|r| r.vehicle_count).max().unwrap_or(0);
    format!(
        "frames={} total_detections={total} max_per_frame={peak}\n",
        records.len()
    )
}

/// Detection against `--background` when given, otherwise against a
/// background reconstructed from the input itself.
pub fn cmd_detect(cfg: &RunConfig) -> Result<String> {
    let dir = require_output(cfg)?;
    let frames = load_frames(cfg)?;
    let (w, h) = frames[0].dims();
    cfg.detect.validate_for(w, h)?;
    let background = match &cfg.background {
        Some(p) => pnm::read_rgb(p)?,
        None => reconstruct(&frames, cfg)?.image,
    };
    if background.dims() != (w, h) {
        bail!(
            "background is {}x{} but frames are {w}x{h}",
            background.width(),
            background.height()
        );
    }
    let out = detect_all(&frames, &background, cfg)?;
    write_detections(dir, &out, cfg.emit_background.then_some(&background))?;
    Ok(summary(&out.records))
}

/// Reconstruction followed by detection over the same input.
pub fn cmd_run(cfg: &RunConfig) -> Result<String> {
    let dir = require_output(cfg)?;
    if cfg.background.is_some() {
        bail!("`run` reconstructs its own background; use `detect` with --background");
    }
    let frames = load_frames(cfg)?;
    let (w, h) = frames[0].dims();
    cfg.detect.validate_for(w, h)?;
    let r = reconstruct(&frames, cfg)?;
    let out = detect_all(&frames, &r.image, cfg)?;
    write_detections(dir, &out, cfg.emit_background.then_some(&r.image))?;
    Ok(summary(&out.records))
}

/// Returns the CSV report and the human table.
pub fn cmd_bench(cfg: &RunConfig) -> Result<(String, String)> {
    let frames = load_frames(cfg)?;
    let (w, h) = frames[0].dims();
    cfg.detect.validate_for(w, h)?;
    let stack: Vec<RgbImage> = sampled(&frames, cfg).into_iter().cloned().collect();
    let report = bench::run(&frames, &stack, cfg.kmeans_frames, &cfg.detect, cfg.seed.unwrap_or(0))?;
    let csv = report.to_csv();
    if let Some(out) = &cfg.output {
        write_atomic(out, csv.as_bytes())?;
    }
    Ok((csv, report.to_table()))
}

pub fn cmd_synth(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<String> {
    let spec = read_scene(spec_path, seed)?;
    let (frames, truth) = generate(&spec)?;
    for (i, f) in frames.iter().enumerate() {
        write_atomic(&out_dir.join(frame_file_name(i)), &pnm::encode_ppm(f))?;
    }
    write_atomic(&out_dir.join(TRUTH_FILE), records::emit(&truth.per_frame)?.as_bytes())?;
    Ok(format!("frames={} seed={}\n", frames.len(), spec.seed))
}
