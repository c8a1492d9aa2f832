//! Maximum-weight bipartite assignment (Kuhn-Munkres) over a score matrix.

use crate::scoring::ScoreMatrix;

/// A partial one-to-one map from row indices (set A) to column indices
/// (set B), kept sorted by row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Wraps `pairs`, sorting them by row. Panics if an index repeats on
    /// either side.
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        assert!(
            pairs.windows(2).all(|w| w[0].0 != w[1].0) && cols.windows(2).all(|w| w[0] != w[1]),
            "matching must be injective"
        );
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of `w` over the matched entries.
    pub fn total(&self, w: &ScoreMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| w.get(i, j)).sum()
    }
}

/// Exact maximum-total assignment of size `min(m, n)`.
///
/// Uses the shortest augmenting path form of the Hungarian method with row
/// and column potentials, `O(min(m,n)² · max(m,n))`. A rectangular matrix is
/// solved as if padded with zeros to square; padded pairs never appear in
/// the result. Which optimum is returned under ties is unspecified.
pub fn kuhn_munkres_max(w: &ScoreMatrix) -> Matching {
    let (m, n) = (w.rows(), w.cols());
    if m == 0 || n == 0 {
        return Matching::default();
    }
    if m <= n {
        let assign = min_cost_rows(m, n, |i, j| -w.get(i, j));
        Matching::new(assign.into_iter().enumerate().collect())
    } else {
        let assign = min_cost_rows(n, m, |j, i| -w.get(i, j));
        Matching::new(
            assign
                .into_iter()
                .enumerate()
                .map(|(j, i)| (i, j))
                .collect(),
        )
    }
}

/// Minimum-cost assignment of every row to a distinct column, `rows <= cols`.
/// Returns the column chosen for each row.
fn min_cost_rows(rows: usize, cols: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    debug_assert!(rows <= cols);
    // 1-based internally; column 0 is the virtual root of each search.
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut row_of = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![0.0f64; cols + 1];
    let mut used = vec![false; cols + 1];

    for r in 1..=rows {
        row_of[0] = r;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; rows];
    for j in 1..=cols {
        if row_of[j] != 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Drops pairs scoring strictly below `tau`. `None` keeps everything.
pub fn filter_matches(m: &Matching, w: &ScoreMatrix, tau: Option<f64>) -> Matching {
    match tau {
        None => m.clone(),
        Some(tau) => Matching {
            pairs: m
                .pairs
                .iter()
                .copied()
                .filter(|&(i, j)| w.get(i, j) >= tau)
                .collect(),
        },
    }
}
