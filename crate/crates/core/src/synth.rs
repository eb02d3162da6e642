//! Deterministic synthetic traffic scenes with exact ground truth.
//!
//! A scene is a procedural backdrop, an optional parked rectangle that never
//! moves, and any number of rectangular movers travelling at constant
//! integer velocity on a torus (positions wrap at the frame edges). Pixel
//! noise is additive Gaussian, clamped to `0..=255`.
//!
//! # Noise generator
//!
//! Frames are reproducible across implementations. Frame `t` owns a 64-bit
//! linear congruential generator
//!
//! ```text
//! state_0   = seed ^ ((t + 1) * 0x9E3779B97F4A7C15)        (wrapping)
//! state_k+1 = state_k * 6364136223846793005 + 1442695040888963407
//! uniform   = (state_k+1 >> 11) / 2^53                       in [0, 1)
//! ```
//!
//! Standard normals come in pairs from Box-Muller on two consecutive
//! uniforms `u1, u2`: `r = sqrt(-2 ln(1 - u1))`, `z0 = r cos(2π u2)`,
//! `z1 = r sin(2π u2)`. One normal is consumed per channel sample in
//! row-major, R-G-B order, whether or not a mover covers the pixel. A
//! sample is `round_half_away(clean + sigma * z)` clamped to `0..=255`.
//! With `noise_sigma == 0` no numbers are drawn.

use serde::{Deserialize, Serialize};

use crate::imagecore::{round_intensity, RgbImage};
use crate::kv::{parse_tuple, KvMap};
use crate::{Error, Exec, Result};

/// Axis-aligned pixel rectangle. For movers `x`/`y` is the wrapped
/// top-left corner and the rectangle may extend past the frame edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    /// True when the rectangle crosses the right or bottom frame edge.
    pub fn wraps(&self, frame_width: usize, frame_height: usize) -> bool {
        self.x + self.width > frame_width || self.y + self.height > frame_height
    }

    /// Membership on the torus of the given frame size.
    pub fn covers(&self, x: usize, y: usize, frame_width: usize, frame_height: usize) -> bool {
        let dx = (x + frame_width - self.x % frame_width) % frame_width;
        let dy = (y + frame_height - self.y % frame_height) % frame_height;
        dx < self.width && dy < self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Backdrop {
    Flat([u8; 3]),
    /// Linear ramp from `left` at column 0 to `right` at the last column.
    Gradient {
        left: [u8; 3],
        right: [u8; 3],
    },
    Checker {
        a: [u8; 3],
        b: [u8; 3],
        cell: usize,
    },
}

impl Backdrop {
    fn color(&self, x: usize, y: usize, width: usize) -> [u8; 3] {
        match self {
            Backdrop::Flat(c) => *c,
            Backdrop::Gradient { left, right } => {
                let f = if width > 1 { x as f64 / (width - 1) as f64 } else { 0.0 };
                let mut out = [0u8; 3];
                for (o, (l, r)) in out.iter_mut().zip(left.iter().zip(right)) {
                    *o = round_intensity(*l as f64 + (*r as f64 - *l as f64) * f);
                }
                out
            }
            Backdrop::Checker { a, b, cell } => {
                if ((x / cell) + (y / cell)).is_multiple_of(2) {
                    *a
                } else {
                    *b
                }
            }
        }
    }

    fn to_kv(&self) -> String {
        let c = |v: &[u8; 3]| format!("{},{},{}", v[0], v[1], v[2]);
        match self {
            Backdrop::Flat(v) => format!("flat {}", c(v)),
            Backdrop::Gradient { left, right } => format!("gradient {} {}", c(left), c(right)),
            Backdrop::Checker { a, b, cell } => format!("checker {} {} {cell}", c(a), c(b)),
        }
    }

    fn from_kv(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let rgb = |p: &str| parse_tuple::<u8, 3>(p, ',');
        match parts.as_slice() {
            ["flat", c] => Ok(Backdrop::Flat(rgb(c)?)),
            ["gradient", l, r] => Ok(Backdrop::Gradient {
                left: rgb(l)?,
                right: rgb(r)?,
            }),
            ["checker", a, b, cell] => {
                let cell: usize = cell.parse().map_err(|e| format!("cell `{cell}`: {e}"))?;
                if cell == 0 {
                    return Err("checker cell must be positive".into());
                }
                Ok(Backdrop::Checker {
                    a: rgb(a)?,
                    b: rgb(b)?,
                    cell,
                })
            }
            _ => Err(format!(
                "expected `flat R,G,B`, `gradient R,G,B R,G,B` or `checker R,G,B R,G,B CELL`, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mover {
    pub width: usize,
    pub height: usize,
    pub color: [u8; 3],
    /// Pixels per frame.
    pub velocity: (i64, i64),
    /// Top-left corner on the entry frame.
    pub start: (i64, i64),
    /// First frame in which the mover is present.
    pub phase: usize,
}

impl Mover {
    /// Footprint at frame `t`, or `None` before the entry frame.
    pub fn footprint(&self, t: usize, frame_width: usize, frame_height: usize) -> Option<Rect> {
        if t < self.phase {
            return None;
        }
        let steps = (t - self.phase) as i64;
        let x = (self.start.0 + steps * self.velocity.0).rem_euclid(frame_width as i64);
        let y = (self.start.1 + steps * self.velocity.1).rem_euclid(frame_height as i64);
        Some(Rect {
            x: x as usize,
            y: y as usize,
            width: self.width,
            height: self.height,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parked {
    pub rect: Rect,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub backdrop: Backdrop,
    pub movers: Vec<Mover>,
    pub parked: Option<Parked>,
    pub noise_sigma: f64,
    pub frames: usize,
    pub seed: u64,
}

impl SceneSpec {
    /// Empty scene over a flat backdrop.
    pub fn new(width: usize, height: usize, frames: usize, backdrop: Backdrop) -> Self {
        Self {
            width,
            height,
            backdrop,
            movers: Vec::new(),
            parked: None,
            noise_sigma: 0.0,
            frames,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param(
                "width",
                format!("scene must be non-empty, got {}x{}", self.width, self.height),
            ));
        }
        if self.frames == 0 {
            return Err(Error::param("frames", "must be at least 1"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::param(
                "noise_sigma",
                format!("must be finite and >= 0, got {}", self.noise_sigma),
            ));
        }
        if let Backdrop::Checker { cell: 0, .. } = self.backdrop {
            return Err(Error::param("backdrop", "checker cell must be positive"));
        }
        for (i, m) in self.movers.iter().enumerate() {
            if m.width == 0 || m.height == 0 {
                return Err(Error::param("mover", format!("mover {i} has zero area")));
            }
            if m.width > self.width || m.height > self.height {
                return Err(Error::param("mover", format!("mover {i} is larger than the frame")));
            }
        }
        if let Some(p) = &self.parked {
            let r = p.rect;
            if r.width == 0 || r.height == 0 || r.x + r.width > self.width || r.y + r.height > self.height {
                return Err(Error::param(
                    "parked",
                    "rectangle must be non-empty and inside the frame",
                ));
            }
        }
        Ok(())
    }

    /// Backdrop with the parked object drawn in.
    pub fn true_background(&self) -> Result<RgbImage> {
        RgbImage::from_fn(self.width, self.height, |x, y| self.static_color(x, y))
    }

    fn static_color(&self, x: usize, y: usize) -> [u8; 3] {
        if let Some(p) = &self.parked {
            if p.rect.covers(x, y, self.width, self.height) {
                return p.color;
            }
        }
        self.backdrop.color(x, y, self.width)
    }

    pub fn footprints(&self, t: usize) -> Vec<Rect> {
        self.movers
            .iter()
            .filter_map(|m| m.footprint(t, self.width, self.height))
            .collect()
    }

    pub fn render_frame(&self, t: usize) -> Result<RgbImage> {
        let mut img = self.true_background()?;
        // later movers paint over earlier ones
        for (m, r) in self
            .movers
            .iter()
            .filter_map(|m| m.footprint(t, self.width, self.height).map(|r| (m, r)))
        {
            for dy in 0..r.height {
                for dx in 0..r.width {
                    img.put_pixel((r.x + dx) % self.width, (r.y + dy) % self.height, m.color);
                }
            }
        }
        if self.noise_sigma > 0.0 {
            let mut g = Gaussian::new(Lcg64::for_frame(self.seed, t));
            let sigma = self.noise_sigma;
            let noisy: Vec<u8> = img
                .as_raw()
                .iter()
                .map(|&v| round_intensity(v as f64 + sigma * g.sample()))
                .collect();
            img = RgbImage::new(self.width, self.height, noisy)?;
        }
        Ok(img)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::default();
        m.insert("width", self.width);
        m.insert("height", self.height);
        m.insert("frames", self.frames);
        m.insert("seed", self.seed);
        m.insert("noise_sigma", self.noise_sigma);
        m.insert("backdrop", self.backdrop.to_kv());
        for (i, mv) in self.movers.iter().enumerate() {
            m.insert(format!("mover.{i}.size"), format!("{}x{}", mv.width, mv.height));
            m.insert(
                format!("mover.{i}.color"),
                format!("{},{},{}", mv.color[0], mv.color[1], mv.color[2]),
            );
            m.insert(
                format!("mover.{i}.velocity"),
                format!("{},{}", mv.velocity.0, mv.velocity.1),
            );
            m.insert(format!("mover.{i}.start"), format!("{},{}", mv.start.0, mv.start.1));
            m.insert(format!("mover.{i}.phase"), mv.phase);
        }
        if let Some(p) = &self.parked {
            let r = p.rect;
            m.insert("parked.rect", format!("{},{},{},{}", r.x, r.y, r.width, r.height));
            m.insert("parked.color", format!("{},{},{}", p.color[0], p.color[1], p.color[2]));
        }
        m
    }

    /// Reads a scene from the key-value format written by [`SceneSpec::to_kv`].
    /// Errors name the offending field.
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let backdrop = kv
            .parse_with("backdrop", Backdrop::from_kv)?
            .unwrap_or(Backdrop::Flat([128, 128, 128]));
        let mut spec = SceneSpec::new(
            kv.require("width")?,
            kv.require("height")?,
            kv.require("frames")?,
            backdrop,
        );
        spec.seed = kv.parse_or("seed", 0)?;
        spec.noise_sigma = kv.parse_or("noise_sigma", 0.0)?;

        let mut indices: Vec<usize> = Vec::new();
        for k in kv.keys() {
            if let Some(rest) = k.strip_prefix("mover.") {
                let idx = rest.split('.').next().unwrap_or("");
                let idx: usize = idx.parse().map_err(|_| Error::Parse {
                    line: 0,
                    reason: format!("field `{k}`: mover index must be a number"),
                })?;
                if !indices.contains(&idx) {
                    indices.push(idx);
                }
            }
        }
        indices.sort_unstable();
        for i in indices {
            let key = |f: &str| format!("mover.{i}.{f}");
            let size = kv
                .parse_with(&key("size"), |s| parse_tuple::<usize, 2>(s, 'x'))?
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    reason: format!("missing field `{}`", key("size")),
                })?;
            let color = kv
                .parse_with(&key("color"), |s| parse_tuple::<u8, 3>(s, ','))?
                .unwrap_or([255, 255, 255]);
            let velocity = kv
                .parse_with(&key("velocity"), |s| parse_tuple::<i64, 2>(s, ','))?
                .unwrap_or([0, 0]);
            let start = kv
                .parse_with(&key("start"), |s| parse_tuple::<i64, 2>(s, ','))?
                .unwrap_or([0, 0]);
            spec.movers.push(Mover {
                width: size[0],
                height: size[1],
                color,
                velocity: (velocity[0], velocity[1]),
                start: (start[0], start[1]),
                phase: kv.parse_or(&key("phase"), 0)?,
            });
        }

        if let Some(r) = kv.parse_with("parked.rect", |s| parse_tuple::<usize, 4>(s, ','))? {
            spec.parked = Some(Parked {
                rect: Rect {
                    x: r[0],
                    y: r[1],
                    width: r[2],
                    height: r[3],
                },
                color: kv
                    .parse_with("parked.color", |s| parse_tuple::<u8, 3>(s, ','))?
                    .unwrap_or([0, 0, 0]),
            });
        }

        kv.reject_unknown(|k| {
            matches!(
                k,
                "width" | "height" | "frames" | "seed" | "noise_sigma" | "backdrop" | "parked.rect" | "parked.color"
            ) || k
                .strip_prefix("mover.")
                .and_then(|r| r.split_once('.'))
                .is_some_and(|(_, f)| matches!(f, "size" | "color" | "velocity" | "start" | "phase"))
        })?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub frame_id: usize,
    pub active_mover_count: usize,
    pub footprints: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub true_background: RgbImage,
    pub per_frame: Vec<FrameTruth>,
}

pub fn generate(spec: &SceneSpec) -> Result<(Vec<RgbImage>, GroundTruth)> {
    generate_with(spec, Exec::default())
}

/// Renders every frame; frames are independent so they may be produced in
/// parallel without changing a single byte.
pub fn generate_with(spec: &SceneSpec, exec: Exec) -> Result<(Vec<RgbImage>, GroundTruth)> {
    spec.validate()?;
    let frames = exec
        .map_range(spec.frames, |t| spec.render_frame(t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_frame = (0..spec.frames)
        .map(|t| {
            let footprints = spec.footprints(t);
            FrameTruth {
                frame_id: t,
                active_mover_count: footprints.len(),
                footprints,
            }
        })
        .collect();
    Ok((
        frames,
        GroundTruth {
            true_background: spec.true_background()?,
            per_frame,
        },
    ))
}

/// 64-bit LCG (Knuth's MMIX constants).
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(state: u64) -> Self {
        Self { state }
    }

    pub fn for_frame(seed: u64, frame: usize) -> Self {
        Self::new(seed ^ (frame as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Box-Muller standard normals over [`Lcg64`].
#[derive(Debug, Clone)]
pub struct Gaussian {
    rng: Lcg64,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(rng: Lcg64) -> Self {
        Self { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_f64();
        let u2 = self.rng.next_f64();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
