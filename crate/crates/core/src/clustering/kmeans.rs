use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{squared_distance, PointSet};
use crate::{Error, Result};

/// Iteration limits shared by the K-means entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansParams {
    pub max_iter: usize,
    /// Stop once no centroid moves more than this, or WCSS improves by less.
    pub tol: f64,
}

impl Default for KmeansParams {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub centroids: PointSet,
    pub assignment: Vec<usize>,
    /// Number of update steps performed.
    pub iterations: usize,
    pub wcss: f64,
    /// WCSS after the initial assignment and after every iteration.
    pub wcss_trace: Vec<f64>,
}

impl KmeansResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Within-cluster sum of squared distances of `points` to their assigned
/// centroids.
pub fn wcss(points: &PointSet, result: &KmeansResult) -> f64 {
    objective(points, &result.centroids, &result.assignment)
}

fn objective(points: &PointSet, centroids: &PointSet, assignment: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &c)| squared_distance(p, centroids.point(c)))
        .sum()
}

/// Lloyd's algorithm seeded with `k` distinct input points chosen by a
/// ChaCha8 generator seeded with `seed`.
pub fn kmeans(points: &PointSet, k: usize, max_iter: usize, tol: f64, seed: u64) -> Result<KmeansResult> {
    check_k(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, points.len(), k).into_vec();
    picks.sort_unstable();
    let mut init = PointSet::with_capacity(points.dim(), k);
    for i in picks {
        init.push(points.point(i));
    }
    kmeans_from(points, init, KmeansParams { max_iter, tol })
}

fn check_k(points: &PointSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::param(
            "k",
            format!("{k} clusters requested for {} points", points.len()),
        ));
    }
    Ok(())
}

/// Lloyd's algorithm from explicit starting centroids.
///
/// Each point joins its nearest centroid, ties going to the lower index.
/// A cluster left empty after assignment is reseeded at the point lying
/// farthest from its own centroid.
pub fn kmeans_from(points: &PointSet, init: PointSet, params: KmeansParams) -> Result<KmeansResult> {
    let k = init.len();
    check_k(points, k)?;
    if init.dim() != points.dim() {
        return Err(Error::param(
            "centroids",
            format!("dimension {} does not match points ({})", init.dim(), points.dim()),
        ));
    }
    let dim = points.dim();
    let mut centroids = init;
    let mut assignment = vec![0usize; points.len()];
    assign(points, &centroids, &mut assignment);
    let mut current = objective(points, &centroids, &assignment);
    let mut trace = vec![current];
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let (mut next, reseeded) = update(points, &centroids, &mut assignment, k, dim);
        let shift = centroids
            .iter()
            .zip(next.iter())
            .map(|(a, b)| squared_distance(a, b))
            .fold(0.0f64, f64::max)
            .sqrt();
        std::mem::swap(&mut centroids, &mut next);

        let changed = assign(points, &centroids, &mut assignment);
        let value = objective(points, &centroids, &assignment);
        trace.push(value);
        let improvement = current - value;
        current = value;
        if !(changed || reseeded) || shift < params.tol || improvement < params.tol {
            break;
        }
    }

    Ok(KmeansResult {
        centroids,
        assignment,
        iterations,
        wcss: current,
        wcss_trace: trace,
    })
}

/// Returns true if any assignment changed.
fn assign(points: &PointSet, centroids: &PointSet, assignment: &mut [usize]) -> bool {
    let mut changed = false;
    for (p, slot) in points.iter().zip(assignment.iter_mut()) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, mu) in centroids.iter().enumerate() {
            let d = squared_distance(p, mu);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        if *slot != best {
            *slot = best;
            changed = true;
        }
    }
    changed
}

/// New centroids from the current assignment; also reports whether an
/// empty cluster had to be reseeded.
fn update(points: &PointSet, prev: &PointSet, assignment: &mut [usize], k: usize, dim: usize) -> (PointSet, bool) {
    let mut sums = vec![0.0f64; k * dim];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment.iter()) {
        counts[a] += 1;
        for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut next = PointSet::with_capacity(dim, k);
    for c in 0..k {
        if counts[c] == 0 {
            next.push(prev.point(c));
        } else {
            let n = counts[c] as f64;
            let mean: Vec<f64> = sums[c * dim..(c + 1) * dim].iter().map(|s| s / n).collect();
            next.push(&mean);
        }
    }

    let mut taken = vec![false; points.len()];
    let mut reseeded = false;
    for c in (0..k).filter(|&c| counts[c] == 0) {
        let mut far = None;
        let mut far_d = 0.0;
        for (i, p) in points.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d = squared_distance(p, next.point(assignment[i]));
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        if let Some(i) = far {
            taken[i] = true;
            reseeded = true;
            assignment[i] = c;
            let p = points.point(i).to_vec();
            next.coords[c * dim..(c + 1) * dim].copy_from_slice(&p);
        }
    }
    (next, reseeded)
}
