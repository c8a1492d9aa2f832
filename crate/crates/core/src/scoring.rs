//! The iterated matching-score matrix.
//!
//! Every candidate pairing `(i, j)` of a point in A with a point in B implies
//! a rigid transform `T_ij`. A pairing gains support from the pairings of its
//! neighbors whose transforms agree with it:
//!
//! ```text
//! W'(i, j) = W(i, j) + Σ_{k ∈ N_A(i), l ∈ N_B(j)} W(k, l) · sim(T_ij, T_kl)
//! ```
//!
//! After each update the whole matrix is min-max rescaled to `[0, 1]`.
//! Updates are synchronous: every term reads the previous matrix.
//!
//! The similarity factors never change between iterations, so
//! [`iterate_scores`] evaluates them once into a [`SupportGraph`] and then
//! runs each update as a sparse product. [`update_scores`] is the direct
//! dense form and produces bitwise-identical results.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{PointSet, RigidTransform};
use crate::neighbors::{build_neighbor_table, NeighborTable};
use crate::similarity::{transform_similarity, SimilarityThresholds};

/// Dense row-major `m × n` matrix of non-negative scores.
#[derive(Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for ScoreMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScoreMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl ScoreMatrix {
    /// Matrix filled with `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from row vectors. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: format!("{cols} columns"),
                    actual: format!("{} in row {i}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest entrywise absolute difference. Shapes must match.
    pub fn max_abs_diff(&self, other: &ScoreMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Same matrix with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn shape(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }
}

/// Every per-pair transform `T_ij` taking `A[i]` onto `B[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformTable {
    rows: usize,
    cols: usize,
    data: Vec<RigidTransform>,
}

impl TransformTable {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RigidTransform {
        &self.data[i * self.cols + j]
    }
}

/// Stopping rule for [`iterate_scores`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    max_iterations: usize,
    convergence_tol: f64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            convergence_tol: 1e-4,
        }
    }
}

impl IterationConfig {
    /// Stop after `max_iterations` updates, or earlier once no entry moves by
    /// `convergence_tol` or more between consecutive normalized matrices.
    pub fn new(max_iterations: usize, convergence_tol: f64) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(convergence_tol >= 0.0 && convergence_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "convergence tolerance must be a non-negative number, got {convergence_tol}"
            )));
        }
        Ok(Self {
            max_iterations,
            convergence_tol,
        })
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn convergence_tol(&self) -> f64 {
        self.convergence_tol
    }
}

pub fn precompute_transforms(a: &PointSet, b: &PointSet) -> Result<TransformTable> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Degenerate(format!(
            "transform table needs two nonempty sets, got {}x{}",
            a.len(),
            b.len()
        )));
    }
    let data = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| RigidTransform::between(p, q)))
        .collect();
    Ok(TransformTable {
        rows: a.len(),
        cols: b.len(),
        data,
    })
}

/// The all-ones starting matrix.
pub fn init_scores(m: usize, n: usize) -> ScoreMatrix {
    ScoreMatrix::filled(m, n, 1.0)
}

fn check_shapes(
    w: &ScoreMatrix,
    tt: &TransformTable,
    na: &NeighborTable,
    nb: &NeighborTable,
) -> Result<()> {
    let want = w.shape();
    let mismatch = |actual: String| Error::ShapeMismatch {
        expected: want.clone(),
        actual,
    };
    if (tt.rows, tt.cols) != (w.rows, w.cols) {
        return Err(mismatch(format!("transform table {}x{}", tt.rows, tt.cols)));
    }
    if na.len() != w.rows || nb.len() != w.cols {
        return Err(mismatch(format!(
            "neighbor tables over {} and {} points",
            na.len(),
            nb.len()
        )));
    }
    Ok(())
}

/// One synchronous support update, evaluated densely over all `K × K`
/// neighbor combinations of every entry.
pub fn update_scores(
    w: &ScoreMatrix,
    tt: &TransformTable,
    na: &NeighborTable,
    nb: &NeighborTable,
    th: &SimilarityThresholds,
) -> Result<ScoreMatrix> {
    check_shapes(w, tt, na, nb)?;
    let mut out = w.clone();
    for i in 0..w.rows {
        for j in 0..w.cols {
            let tij = tt.get(i, j);
            let mut acc = w.get(i, j);
            for &k in na.neighbors(i) {
                for &l in nb.neighbors(j) {
                    acc += w.get(k, l) * transform_similarity(tij, tt.get(k, l), th);
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Global min-max rescale to `[0, 1]`. A constant matrix becomes all ones,
/// or stays all zeros if it is zero.
pub fn normalize_scores(w: &ScoreMatrix) -> ScoreMatrix {
    let (lo, hi) = (w.min(), w.max());
    let data = if hi > lo {
        let span = hi - lo;
        w.data.iter().map(|v| (v - lo) / span).collect()
    } else if hi > 0.0 {
        vec![1.0; w.data.len()]
    } else {
        vec![0.0; w.data.len()]
    };
    ScoreMatrix {
        rows: w.rows,
        cols: w.cols,
        data,
    }
}

/// Precomputed nonzero similarity couplings: for each entry `(i, j)`, the
/// neighbor entries `(k, l)` whose transform lies inside the threshold box
/// of `T_ij`, with the similarity as weight. Stored in compressed rows.
#[derive(Debug, Clone)]
pub struct SupportGraph {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl SupportGraph {
    pub fn build(
        tt: &TransformTable,
        na: &NeighborTable,
        nb: &NeighborTable,
        th: &SimilarityThresholds,
    ) -> Result<Self> {
        check_shapes(&ScoreMatrix::filled(tt.rows, tt.cols, 0.0), tt, na, nb)?;
        let cells = tt.rows * tt.cols;
        if cells > u32::MAX as usize {
            return Err(Error::Degenerate(format!(
                "{cells} score entries exceed index range"
            )));
        }
        let mut offsets = Vec::with_capacity(cells + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for i in 0..tt.rows {
            for j in 0..tt.cols {
                let tij = tt.get(i, j);
                for &k in na.neighbors(i) {
                    for &l in nb.neighbors(j) {
                        let s = transform_similarity(tij, tt.get(k, l), th);
                        if s > 0.0 {
                            targets.push((k * tt.cols + l) as u32);
                            weights.push(s);
                        }
                    }
                }
                offsets.push(targets.len());
            }
        }
        Ok(Self {
            rows: tt.rows,
            cols: tt.cols,
            offsets,
            targets,
            weights,
        })
    }

    /// Number of stored couplings.
    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    /// Same result as [`update_scores`] on the tables this graph was built
    /// from.
    pub fn update(&self, w: &ScoreMatrix) -> Result<ScoreMatrix> {
        if (w.rows, w.cols) != (self.rows, self.cols) {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                actual: w.shape(),
            });
        }
        let data = (0..w.data.len())
            .map(|e| {
                let span = self.offsets[e]..self.offsets[e + 1];
                self.targets[span.clone()]
                    .iter()
                    .zip(&self.weights[span])
                    .fold(w.data[e], |acc, (&t, &s)| acc + w.data[t as usize] * s)
            })
            .collect();
        Ok(ScoreMatrix {
            rows: w.rows,
            cols: w.cols,
            data,
        })
    }
}

/// Snapshot handed to an [`iterate_scores_with`] observer after each
/// update.
#[derive(Debug)]
pub struct IterationStep<'a> {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Normalized matrix the update read from.
    pub previous: &'a ScoreMatrix,
    /// Raw update output, before normalization.
    pub updated: &'a ScoreMatrix,
    pub normalized: &'a ScoreMatrix,
}

/// Final scores plus how the loop ended.
#[derive(Debug, Clone)]
pub struct ScoreOutcome {
    pub scores: ScoreMatrix,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Runs the full scoring loop: build neighbor tables and transforms, start
/// from all ones, then update and normalize until the stopping rule fires.
pub fn iterate_scores(
    a: &PointSet,
    b: &PointSet,
    k: usize,
    th: &SimilarityThresholds,
    cfg: &IterationConfig,
) -> Result<ScoreOutcome> {
    iterate_scores_with(a, b, k, th, cfg, |_| {})
}

/// [`iterate_scores`] with a callback invoked after every update.
pub fn iterate_scores_with<F>(
    a: &PointSet,
    b: &PointSet,
    k: usize,
    th: &SimilarityThresholds,
    cfg: &IterationConfig,
    mut observe: F,
) -> Result<ScoreOutcome>
where
    F: FnMut(&IterationStep<'_>),
{
    let tt = precompute_transforms(a, b)?;
    let na = build_neighbor_table(a, k)?;
    let nb = build_neighbor_table(b, k)?;
    let graph = SupportGraph::build(&tt, &na, &nb, th)?;

    let mut w = init_scores(a.len(), b.len());
    for iteration in 1..=cfg.max_iterations {
        let updated = graph.update(&w)?;
        let normalized = normalize_scores(&updated);
        observe(&IterationStep {
            iteration,
            previous: &w,
            updated: &updated,
            normalized: &normalized,
        });
        let change = normalized.max_abs_diff(&w);
        w = normalized;
        if change < cfg.convergence_tol {
            return Ok(ScoreOutcome {
                scores: w,
                iterations_run: iteration,
                converged: true,
            });
        }
    }
    Ok(ScoreOutcome {
        scores: w,
        iterations_run: cfg.max_iterations,
        converged: false,
    })
}
