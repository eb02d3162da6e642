//! Reference implementations written straight from the set definitions,
//! and the synthetic scenes shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::HashSet;

use motiondet::clustering::{ClusterLabeling, Label, PointSet};
use motiondet::imagecore::{BinaryImage, StructuringElement};
use motiondet::synth::{Backdrop, Mover, Parked, Rect, SceneSpec};
use rand::Rng;

fn white_set(img: &BinaryImage) -> HashSet<(i64, i64)> {
    let mut s = HashSet::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.is_white(x, y) {
                s.insert((x as i64, y as i64));
            }
        }
    }
    s
}

/// `{ z : B_z ⊆ A }`.
pub fn erode_oracle(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let a = white_set(img);
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        se.offsets()
            .iter()
            .all(|&(dx, dy)| a.contains(&(x as i64 + dx as i64, y as i64 + dy as i64)))
    })
    .unwrap()
}

/// `{ a + b : a ∈ A, b ∈ B }` clipped to the frame.
pub fn dilate_oracle(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let mut out = BinaryImage::black(img.width(), img.height()).unwrap();
    for (ax, ay) in white_set(img) {
        for &(dx, dy) in se.offsets() {
            let (x, y) = (ax + dx as i64, ay + dy as i64);
            if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryImage {
    let data = (0..w * h)
        .map(|_| if rng.random_bool(density) { 255 } else { 0 })
        .collect();
    BinaryImage::new(w, h, data).unwrap()
}

/// Random element inside a 5×5 window that always holds the origin.
pub fn random_se(rng: &mut impl Rng) -> StructuringElement {
    let mut offsets = vec![(0, 0)];
    for dy in -2..=2 {
        for dx in -2..=2 {
            if rng.random_bool(0.35) {
                offsets.push((dx, dy));
            }
        }
    }
    StructuringElement::new(offsets).unwrap()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// DBSCAN from the partition view: clusters are the connected components
/// of the core points under the ε relation, numbered by their smallest
/// member; a non-core point within ε of some core joins the lowest
/// numbered such component; everything else is noise.
pub fn dbscan_oracle(points: &PointSet, epsilon: f64, min_pts: usize) -> ClusterLabeling {
    let n = points.len();
    let near = |i: usize, j: usize| distance(points.point(i), points.point(j)) <= epsilon;
    let is_core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts)
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if is_core[i] && is_core[j] && near(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    let mut id_of_root = vec![usize::MAX; n];
    let mut count = 0;
    let mut labels = vec![Label::Noise; n];
    for i in (0..n).filter(|&i| is_core[i]) {
        let r = find(&mut parent, i);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = count;
            count += 1;
        }
        labels[i] = Label::Cluster(id_of_root[r]);
    }
    for i in (0..n).filter(|&i| !is_core[i]) {
        let best = (0..n)
            .filter(|&j| is_core[j] && near(i, j))
            .filter_map(|j| labels[j].cluster())
            .min();
        if let Some(c) = best {
            labels[i] = Label::Cluster(c);
        }
    }
    ClusterLabeling {
        labels,
        is_core,
        cluster_count: count,
    }
}

/// Points scattered around a few random centres plus uniform clutter, on
/// the integer lattice so that exact-ε ties occur.
pub fn random_points(rng: &mut impl Rng, max_n: usize) -> PointSet {
    let n = rng.random_range(1..=max_n);
    let centres: Vec<(f64, f64)> = (0..rng.random_range(1..=5))
        .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
        .collect();
    let mut p = PointSet::with_capacity(2, n);
    for _ in 0..n {
        let (x, y) = if rng.random_bool(0.8) {
            let c = centres[rng.random_range(0..centres.len())];
            (c.0 + rng.random_range(-8.0..8.0), c.1 + rng.random_range(-8.0..8.0))
        } else {
            (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))
        };
        if rng.random_bool(0.5) {
            p.push(&[x.round(), y.round()]);
        } else {
            p.push(&[x, y]);
        }
    }
    p
}

pub fn max_abs_error(a: &[u8], b: &[u8]) -> u8 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0)
}

pub fn mover(size: usize, color: [u8; 3], velocity: (i64, i64), start: (i64, i64)) -> Mover {
    Mover {
        width: size,
        height: size,
        color,
        velocity,
        start,
        phase: 0,
    }
}

/// 128×128 over 200 frames with two 20×20 movers (2.4% of the frame each)
/// on diagonal tracks over a horizontal gradient.
pub fn fidelity_scene(noise_sigma: f64) -> SceneSpec {
    let mut s = SceneSpec::new(
        128,
        128,
        200,
        Backdrop::Gradient {
            left: [70, 90, 110],
            right: [130, 120, 100],
        },
    );
    s.movers = vec![
        mover(20, [200, 190, 40], (3, 2), (5, 10)),
        mover(20, [20, 30, 160], (-2, 3), (90, 70)),
    ];
    s.noise_sigma = noise_sigma;
    s.seed = 7;
    s
}

pub const LANE_PITCH: i64 = 84;
pub const DETECTION_FRAMES: usize = 40;
const LANE_SPEEDS: [i64; 5] = [3, -3, 4, 2, -4];
const LANE_COLORS: [[u8; 3]; 5] = [
    [200, 180, 160],
    [10, 20, 10],
    [190, 60, 40],
    [220, 220, 220],
    [30, 30, 170],
];

/// `k` 20×20 movers on horizontal lanes 84 px apart (64 px between
/// bodies), over a flat backdrop, never crossing a frame edge in
/// [`DETECTION_FRAMES`] frames.
pub fn lane_scene(k: usize) -> SceneSpec {
    assert!((1..=5).contains(&k));
    let mut s = SceneSpec::new(
        256,
        LANE_PITCH as usize * k,
        DETECTION_FRAMES,
        Backdrop::Flat([90, 95, 85]),
    );
    for i in 0..k {
        let v = LANE_SPEEDS[i];
        let x = if v > 0 { 8 } else { 256 - 28 };
        s.movers
            .push(mover(20, LANE_COLORS[i], (v, 0), (x, 10 + LANE_PITCH * i as i64)));
    }
    s.noise_sigma = 2.0;
    s.seed = 11 + k as u64;
    s
}

pub const PARKED: Rect = Rect {
    x: 100,
    y: 60,
    width: 32,
    height: 18,
};

/// Two lane movers plus a parked rectangle between the lanes that is
/// present in every frame.
pub fn parked_scene() -> SceneSpec {
    let mut s = lane_scene(2);
    s.height = 180;
    s.movers[1].start.1 = 150;
    s.parked = Some(Parked {
        rect: PARKED,
        color: [230, 40, 40],
    });
    s
}

pub const ROI: (usize, usize, usize, usize) = (0, 0, 256, 130);

/// Two movers inside [`ROI`], and with `outside` a third one on a lane
/// 76 px below its bottom edge.
pub fn roi_scene(outside: bool) -> SceneSpec {
    let mut s = lane_scene(2);
    s.height = 224;
    if outside {
        s.movers.push(mover(20, [240, 200, 30], (3, 0), (40, 190)));
    }
    s
}
