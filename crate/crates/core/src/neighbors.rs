//! K-nearest-neighbor tables over a point set.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// For each point, the indices of its nearest other points in the same set,
/// nearest first. Distance ties go to the smaller index. The relation is
/// not symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    k: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborTable {
    /// Neighbors of point `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    /// Effective neighbor count, `min(k, len - 1)`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of points the table was built over.
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// Brute-force K-NN over locations; `k` is clamped to `len - 1`.
pub fn build_neighbor_table(set: &PointSet, k: usize) -> Result<NeighborTable> {
    if set.is_empty() {
        return Err(Error::Degenerate("cannot index an empty point set".into()));
    }
    if k == 0 {
        return Err(Error::InvalidConfig(
            "neighbor count must be at least 1".into(),
        ));
    }
    let n = set.len();
    let k = k.min(n - 1);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
    let lists = (0..n)
        .map(|i| {
            order.clear();
            order.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (set[i].distance_squared(&set[j]), j)),
            );
            let by_dist = |a: &(f64, usize), b: &(f64, usize)| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            };
            if k < order.len() {
                order.select_nth_unstable_by(k, by_dist);
                order.truncate(k);
            }
            order.sort_unstable_by(by_dist);
            order.iter().map(|&(_, j)| j).collect()
        })
        .collect();
    Ok(NeighborTable { k, lists })
}
