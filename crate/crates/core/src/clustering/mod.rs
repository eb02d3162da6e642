//! Density clustering (DBSCAN) used to group foreground pixels into
//! vehicles, and Lloyd's K-means used by the baseline background
//! reconstruction.

mod dbscan;
mod kmeans;

pub use dbscan::{dbscan, dbscan_with, region_query, DbscanParams, NeighborSearch, GRID_THRESHOLD};
pub use kmeans::{kmeans, kmeans_from, wcss, KmeansParams, KmeansResult};

use crate::{Error, Result};

/// Ordered collection of same-dimension points, stored flat.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "points need at least one coordinate");
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0, "points need at least one coordinate");
        Self {
            dim,
            coords: Vec::with_capacity(dim * n),
        }
    }

    /// Builds a set from rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.as_ref().len());
        if dim == 0 {
            return Err(Error::param("points", "zero-dimensional point"));
        }
        let mut set = Self::with_capacity(dim, rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::param(
                    "points",
                    format!("point {i} has {} coordinates, expected {dim}", r.len()),
                ));
            }
            set.coords.extend_from_slice(r);
        }
        Ok(set)
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim, "dimension mismatch");
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Copy with `delta` added to every point.
    pub fn translated(&self, delta: &[f64]) -> Self {
        assert_eq!(delta.len(), self.dim);
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| c + delta[i % self.dim])
            .collect();
        Self { dim: self.dim, coords }
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// DBSCAN tag for a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Noise,
    Cluster(usize),
}

impl Label {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Cluster(c) => Some(c),
            Label::Noise => None,
        }
    }
}

/// Result of [`dbscan`]: one label per input point. Cluster ids are
/// contiguous, numbered in the order clusters were first discovered.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterLabeling {
    pub labels: Vec<Label>,
    /// `is_core[i]` is true when point `i` had at least `min_pts` neighbours.
    pub is_core: Vec<bool>,
    pub cluster_count: usize,
}

impl ClusterLabeling {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Noise).count()
    }

    /// Member indices of every cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, l) in self.labels.iter().enumerate() {
            if let Label::Cluster(c) = l {
                out[*c].push(i);
            }
        }
        out
    }
}
