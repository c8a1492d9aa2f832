//! End-to-end matching: two point sets in, correspondences and a global
//! rigid transform out.

use crate::assignment::{filter_matches, kuhn_munkres_max, Matching};
use crate::error::{Error, Result};
use crate::geometry::{PointSet, RigidTransform};
use crate::scoring::{iterate_scores_with, IterationConfig, IterationStep, ScoreMatrix};
use crate::similarity::SimilarityThresholds;

/// Parameters of one matching run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    k: usize,
    pub thresholds: SimilarityThresholds,
    pub iteration: IterationConfig,
    tau: Option<f64>,
}

impl Default for MatchConfig {
    /// K = 12, default thresholds and stopping rule, no score filter.
    fn default() -> Self {
        Self {
            k: 12,
            thresholds: SimilarityThresholds::default(),
            iteration: IterationConfig::default(),
            tau: None,
        }
    }
}

impl MatchConfig {
    pub fn new(
        k: usize,
        thresholds: SimilarityThresholds,
        iteration: IterationConfig,
        tau: Option<f64>,
    ) -> Result<Self> {
        Self::default().with_k(k)?.with_tau(tau).map(|c| Self {
            thresholds,
            iteration,
            ..c
        })
    }

    pub fn with_k(self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig(
                "neighbor count k must be at least 1".into(),
            ));
        }
        Ok(Self { k, ..self })
    }

    /// Minimum normalized score a matched pair needs to be kept. Must lie in
    /// `[0, 1]`; `None` disables filtering.
    pub fn with_tau(self, tau: Option<f64>) -> Result<Self> {
        if let Some(t) = tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidConfig(format!(
                    "tau must lie in [0, 1], got {t}"
                )));
            }
        }
        Ok(Self { tau, ..self })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub pairs: Matching,
    /// Final normalized score of each pair, aligned with `pairs`.
    pub scores: Vec<f64>,
    pub global_transform: RigidTransform,
    pub iterations_run: usize,
}

pub fn match_point_sets(a: &PointSet, b: &PointSet, cfg: &MatchConfig) -> Result<MatchResult> {
    match_point_sets_with(a, b, cfg, |_| {})
}

/// [`match_point_sets`] with a callback after each score update.
pub fn match_point_sets_with<F>(
    a: &PointSet,
    b: &PointSet,
    cfg: &MatchConfig,
    observe: F,
) -> Result<MatchResult>
where
    F: FnMut(&IterationStep<'_>),
{
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Degenerate(format!(
            "matching needs at least 2 points per set, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let outcome = iterate_scores_with(a, b, cfg.k, &cfg.thresholds, &cfg.iteration, observe)?;
    let w: &ScoreMatrix = &outcome.scores;
    let pairs = filter_matches(&kuhn_munkres_max(w), w, cfg.tau);
    let scores = pairs.pairs().iter().map(|&(i, j)| w.get(i, j)).collect();
    let global_transform = match estimate_global_transform(a, b, &pairs) {
        Ok(t) => t,
        // Everything filtered out: report no motion rather than failing.
        Err(Error::NoCorrespondences) => RigidTransform::IDENTITY,
        Err(e) => return Err(e),
    };
    Ok(MatchResult {
        pairs,
        scores,
        global_transform,
        iterations_run: outcome.iterations_run,
    })
}

/// Least-squares rigid fit of A's matched locations onto B's.
///
/// Closed form: the rotation angle is the argument of the centered
/// cross-covariance, the translation carries A's centroid onto B's.
/// Orientations are ignored except for a single pair, where the exact
/// per-pair transform is returned.
pub fn estimate_global_transform(
    a: &PointSet,
    b: &PointSet,
    pairs: &Matching,
) -> Result<RigidTransform> {
    match pairs.pairs() {
        [] => Err(Error::NoCorrespondences),
        &[(i, j)] => Ok(RigidTransform::between(&a[i], &b[j])),
        ps => {
            let n = ps.len() as f64;
            let (mut ax, mut ay, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0);
            for &(i, j) in ps {
                ax += a[i].x();
                ay += a[i].y();
                bx += b[j].x();
                by += b[j].y();
            }
            let (ax, ay, bx, by) = (ax / n, ay / n, bx / n, by / n);
            let (mut dot, mut cross) = (0.0, 0.0);
            for &(i, j) in ps {
                let (px, py) = (a[i].x() - ax, a[i].y() - ay);
                let (qx, qy) = (b[j].x() - bx, b[j].y() - by);
                dot += px * qx + py * qy;
                cross += px * qy - py * qx;
            }
            let theta = cross.atan2(dot);
            let (s, c) = theta.sin_cos();
            Ok(RigidTransform::new(
                theta,
                bx - (ax * c - ay * s),
                by - (ax * s + ay * c),
            ))
        }
    }
}
