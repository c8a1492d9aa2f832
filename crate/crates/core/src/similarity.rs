//! Agreement score between two transform hypotheses.

use std::f64::consts::{FRAC_PI_6, PI};

use crate::error::{Error, Result};
use crate::geometry::{angular_distance, RigidTransform};

/// Box half-widths beyond which two transforms are considered unrelated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityThresholds {
    alpha: f64,
    beta: f64,
    delta: f64,
}

impl Default for SimilarityThresholds {
    /// `(10, 10, π/6)`.
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 10.0,
            delta: FRAC_PI_6,
        }
    }
}

impl SimilarityThresholds {
    /// `alpha` and `beta` bound the x/y translation difference, `delta` the
    /// rotation difference in radians. All must be positive and
    /// `delta <= π`.
    pub fn new(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(alpha) || !ok(beta) {
            return Err(Error::InvalidConfig(format!(
                "translation thresholds must be positive, got alpha={alpha} beta={beta}"
            )));
        }
        if !ok(delta) || delta > PI {
            return Err(Error::InvalidConfig(format!(
                "angle threshold must lie in (0, pi], got {delta}"
            )));
        }
        Ok(Self { alpha, beta, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Similarity of two rigid transforms in `[0, 1]`.
///
/// Zero when any difference strictly exceeds its threshold, otherwise
/// `1 - (|Δtx|/α + |Δty|/β + Δθ/δ) / 3` with `Δθ` measured wrap-aware. The
/// function jumps to zero at the box edge rather than decaying into it.
pub fn transform_similarity(
    t1: &RigidTransform,
    t2: &RigidTransform,
    th: &SimilarityThresholds,
) -> f64 {
    let dx = (t1.tx() - t2.tx()).abs();
    if dx > th.alpha {
        return 0.0;
    }
    let dy = (t1.ty() - t2.ty()).abs();
    if dy > th.beta {
        return 0.0;
    }
    let da = angular_distance(t1.theta(), t2.theta());
    if da > th.delta {
        return 0.0;
    }
    let s = 1.0 - (dx / th.alpha + dy / th.beta + da / th.delta) / 3.0;
    s.clamp(0.0, 1.0)
}
