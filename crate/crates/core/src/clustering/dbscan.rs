use std::collections::{HashMap, VecDeque};

use super::{euclidean_distance, ClusterLabeling, Label, PointSet};
use crate::{Error, Exec, Result};

/// Point count above which [`NeighborSearch::Auto`] switches to the grid.
pub const GRID_THRESHOLD: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    epsilon: f64,
    min_pts: usize,
}

impl DbscanParams {
    pub fn new(epsilon: f64, min_pts: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param(
                "epsilon",
                format!("must be finite and > 0, got {epsilon}"),
            ));
        }
        if min_pts == 0 {
            return Err(Error::param("min_pts", "must be at least 1"));
        }
        Ok(Self { epsilon, min_pts })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn min_pts(&self) -> usize {
        self.min_pts
    }
}

/// How ε-neighbourhoods are found. Every strategy returns the same sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborSearch {
    /// Grid above [`GRID_THRESHOLD`] points, brute force below.
    #[default]
    Auto,
    BruteForce,
    /// Uniform grid with cell size ε. Falls back to brute force for
    /// points with more than three coordinates.
    Grid,
}

/// Indices of all points within Euclidean distance `epsilon` of point
/// `index` (itself included), ascending.
pub fn region_query(points: &PointSet, index: usize, epsilon: f64) -> Vec<usize> {
    let q = points.point(index);
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| euclidean_distance(q, p) <= epsilon)
        .map(|(i, _)| i)
        .collect()
}

type CellKey = [i64; 3];

struct Grid {
    dim: usize,
    keys: Vec<CellKey>,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl Grid {
    fn build(points: &PointSet, epsilon: f64) -> Self {
        // slightly oversized so rounding in the division never pushes an
        // ε-neighbour two cells away
        let cell = epsilon * (1.0 + 1e-9);
        let dim = points.dim();
        let keys: Vec<CellKey> = points.iter().map(|p| Self::key(p, cell)).collect();
        let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            cells.entry(*k).or_default().push(i);
        }
        Self { dim, keys, cells }
    }

    fn key(p: &[f64], cell: f64) -> CellKey {
        let mut k = [0i64; 3];
        for (slot, c) in k.iter_mut().zip(p) {
            *slot = (c / cell).floor() as i64;
        }
        k
    }

    fn query(&self, points: &PointSet, index: usize, epsilon: f64) -> Vec<usize> {
        let q = points.point(index);
        let base = self.keys[index];
        let span = |d: usize| if d < self.dim { -1..=1 } else { 0..=0 };
        let mut out = Vec::new();
        for dz in span(2) {
            for dy in span(1) {
                for dx in span(0) {
                    let key = [base[0] + dx, base[1] + dy, base[2] + dz];
                    if let Some(bucket) = self.cells.get(&key) {
                        out.extend(
                            bucket
                                .iter()
                                .copied()
                                .filter(|&j| euclidean_distance(q, points.point(j)) <= epsilon),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

enum Neighbors<'a> {
    Brute(&'a PointSet, f64),
    Grid(&'a PointSet, f64, Grid),
}

impl Neighbors<'_> {
    fn query(&self, i: usize) -> Vec<usize> {
        match self {
            Neighbors::Brute(p, eps) => region_query(p, i, *eps),
            Neighbors::Grid(p, eps, g) => g.query(p, i, *eps),
        }
    }
}

struct Lookup<'a> {
    cached: Option<Vec<Vec<usize>>>,
    neighbors: &'a Neighbors<'a>,
    scratch: Vec<usize>,
}

impl Lookup<'_> {
    fn get(&mut self, i: usize) -> &[usize] {
        match &self.cached {
            Some(c) => &c[i],
            None => {
                self.scratch = self.neighbors.query(i);
                &self.scratch
            }
        }
    }
}

pub fn dbscan(points: &PointSet, params: &DbscanParams) -> ClusterLabeling {
    dbscan_with(points, params, NeighborSearch::Auto, Exec::default())
}

/// DBSCAN with an explicit neighbour search strategy and execution mode.
///
/// Points are visited in input order. An unvisited point whose
/// neighbourhood holds at least `min_pts` points opens a new cluster, which
/// grows through a FIFO frontier: every non-core neighbour becomes a border
/// member of the first cluster that reaches it, every core neighbour also
/// contributes its own neighbourhood. Points never reached are Noise.
///
/// With [`Exec::Parallel`] all neighbourhoods are computed up front on the
/// thread pool; the labelling pass itself is sequential, so the result is
/// identical to the sequential run.
pub fn dbscan_with(points: &PointSet, params: &DbscanParams, search: NeighborSearch, exec: Exec) -> ClusterLabeling {
    let n = points.len();
    if n == 0 {
        return ClusterLabeling::default();
    }
    let eps = params.epsilon;
    let use_grid = points.dim() <= 3
        && match search {
            NeighborSearch::Auto => n > GRID_THRESHOLD,
            NeighborSearch::BruteForce => false,
            NeighborSearch::Grid => true,
        };
    let neighbors = if use_grid {
        Neighbors::Grid(points, eps, Grid::build(points, eps))
    } else {
        Neighbors::Brute(points, eps)
    };

    let mut lookup = Lookup {
        cached: exec.is_parallel().then(|| exec.map_range(n, |i| neighbors.query(i))),
        neighbors: &neighbors,
        scratch: Vec::new(),
    };

    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut is_core = vec![false; n];
    let mut cluster = 0usize;
    let mut frontier = VecDeque::new();

    for i in 0..n {
        if labels[i].is_some() {
            continue;
        }
        let seed = lookup.get(i);
        if seed.len() < params.min_pts {
            labels[i] = Some(Label::Noise);
            continue;
        }
        is_core[i] = true;
        labels[i] = Some(Label::Cluster(cluster));
        frontier.extend(seed.iter().copied().filter(|&j| j != i));

        while let Some(j) = frontier.pop_front() {
            match labels[j] {
                Some(Label::Noise) => {
                    // already known not to be core
                    labels[j] = Some(Label::Cluster(cluster));
                    continue;
                }
                Some(Label::Cluster(_)) => continue,
                None => {}
            }
            labels[j] = Some(Label::Cluster(cluster));
            let nj = lookup.get(j);
            if nj.len() >= params.min_pts {
                is_core[j] = true;
                frontier.extend(nj.iter().copied().filter(|&m| match labels[m] {
                    None | Some(Label::Noise) => true,
                    Some(Label::Cluster(_)) => false,
                }));
            }
        }
        cluster += 1;
    }

    ClusterLabeling {
        labels: labels.into_iter().map(|l| l.unwrap_or(Label::Noise)).collect(),
        is_core,
        cluster_count: cluster,
    }
}
