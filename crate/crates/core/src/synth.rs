//! Seeded synthetic scenes with ground truth.
//!
//! A scene is built in five steps, all driven by one ChaCha8 stream seeded
//! from [`SynthConfig::seed`]:
//!
//! 1. `n` points for A, uniform in `[0, L]²` with uniform orientation.
//! 2. B is the planted rigid transform applied to every point of A.
//! 3. `⌊outlier_ratio · n⌋` pairs, chosen uniformly, have both endpoints
//!    replaced by fresh uniform noise points.
//! 4. Each surviving B point moves by independent uniform jitter in
//!    `[-j·L/2, j·L/2]` per coordinate. Orientations are not jittered.
//! 5. B is shuffled; the permutation is kept in the ground truth.

use std::f64::consts::TAU;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{DirectedPoint, PointSet, RigidTransform};

/// Default side length of the square scene. With the default translation
/// thresholds of 10 this puts jitter ratios of a few percent at the scale
/// where neighbor agreement starts to break down.
pub const DEFAULT_RANGE: f64 = 350.0;

/// Planted motion between A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantedTransform {
    /// Rotation uniform in `[0, 2π)`, translation uniform in `[-L/2, L/2]²`.
    Random,
    Fixed(RigidTransform),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    n: usize,
    range: f64,
    outlier_ratio: f64,
    jitter_ratio: f64,
    transform: PlantedTransform,
    seed: u64,
}

impl SynthConfig {
    /// Scene of `n` pairs in a 350×350 field, random planted transform,
    /// seed 0.
    pub fn new(n: usize, outlier_ratio: f64, jitter_ratio: f64) -> Self {
        Self {
            n,
            range: DEFAULT_RANGE,
            outlier_ratio,
            jitter_ratio,
            transform: PlantedTransform::Random,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_range(self, range: f64) -> Self {
        Self { range, ..self }
    }

    pub fn with_transform(self, t: RigidTransform) -> Self {
        Self {
            transform: PlantedTransform::Fixed(t),
            ..self
        }
    }

    pub fn with_planted(self, transform: PlantedTransform) -> Self {
        Self { transform, ..self }
    }

    pub fn with_ratios(self, outlier_ratio: f64, jitter_ratio: f64) -> Self {
        Self {
            outlier_ratio,
            jitter_ratio,
            ..self
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn outlier_ratio(&self) -> f64 {
        self.outlier_ratio
    }

    pub fn jitter_ratio(&self) -> f64 {
        self.jitter_ratio
    }

    pub fn transform(&self) -> PlantedTransform {
        self.transform
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of pairs replaced by noise, `⌊outlier_ratio · n⌋`.
    pub fn outlier_count(&self) -> usize {
        // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
        ((self.outlier_ratio * self.n as f64) + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 points, got {}",
                self.n
            )));
        }
        for (name, r) in [
            ("outlier", self.outlier_ratio),
            ("jitter", self.jitter_ratio),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!(
                    "{name} ratio must lie in [0, 1], got {r}"
                )));
            }
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scene range must be positive, got {}",
                self.range
            )));
        }
        if let PlantedTransform::Fixed(t) = self.transform {
            if !(t.tx().is_finite() && t.ty().is_finite() && t.theta().is_finite()) {
                return Err(Error::InvalidConfig(
                    "planted transform must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What the generator knows about a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    true_pairs: Vec<(usize, usize)>,
    outlier_pairs: Vec<(usize, usize)>,
    planted_transform: RigidTransform,
    permutation: Vec<usize>,
}

impl GroundTruth {
    /// Genuine correspondences `(index in A, index in B)`, sorted by A index.
    pub fn true_pairs(&self) -> &[(usize, usize)] {
        &self.true_pairs
    }

    /// Original pairs whose endpoints were both replaced by noise.
    pub fn outlier_pairs(&self) -> &[(usize, usize)] {
        &self.outlier_pairs
    }

    pub fn planted_transform(&self) -> RigidTransform {
        self.planted_transform
    }

    /// `permutation[i]` is the B index that original pair `i` landed on.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Every original pair as `(i, j, is_outlier)`, by A index.
    pub fn rows(&self) -> Vec<(usize, usize, bool)> {
        let mut rows: Vec<_> = self
            .true_pairs
            .iter()
            .map(|&(i, j)| (i, j, false))
            .chain(self.outlier_pairs.iter().map(|&(i, j)| (i, j, true)))
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Rebuilds ground truth from `(i, j, is_outlier)` rows.
    pub fn from_rows(rows: &[(usize, usize, bool)], planted_transform: RigidTransform) -> Self {
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        let mut permutation = vec![0; rows.len()];
        for &(i, j, _) in &rows {
            if let Some(slot) = permutation.get_mut(i) {
                *slot = j;
            }
        }
        let (outliers, genuine): (Vec<&(usize, usize, bool)>, Vec<_>) =
            rows.iter().partition(|r| r.2);
        Self {
            true_pairs: genuine.iter().map(|r| (r.0, r.1)).collect(),
            outlier_pairs: outliers.iter().map(|r| (r.0, r.1)).collect(),
            planted_transform,
            permutation,
        }
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, range: f64) -> DirectedPoint {
    let x = rng.random_range(0.0..=range);
    let y = rng.random_range(0.0..=range);
    let theta = rng.random_range(0.0..TAU);
    DirectedPoint::new(x, y, theta)
}

pub fn generate_scene(cfg: &SynthConfig) -> Result<(PointSet, PointSet, GroundTruth)> {
    cfg.validate()?;
    let (n, range) = (cfg.n, cfg.range);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut a: Vec<DirectedPoint> = (0..n).map(|_| uniform_point(&mut rng, range)).collect();
    let planted = match cfg.transform {
        PlantedTransform::Fixed(t) => t,
        PlantedTransform::Random => {
            let half = range / 2.0;
            RigidTransform::new(
                rng.random_range(0.0..TAU),
                rng.random_range(-half..=half),
                rng.random_range(-half..=half),
            )
        }
    };
    let mut b: Vec<DirectedPoint> = a.iter().map(|p| planted.apply(p)).collect();

    let mut is_outlier = vec![false; n];
    let mut picked = index::sample(&mut rng, n, cfg.outlier_count()).into_vec();
    picked.sort_unstable();
    for &i in &picked {
        is_outlier[i] = true;
        a[i] = uniform_point(&mut rng, range);
        b[i] = uniform_point(&mut rng, range);
    }

    let half_jitter = cfg.jitter_ratio * range / 2.0;
    if half_jitter > 0.0 {
        for (q, _) in b.iter_mut().zip(&is_outlier).filter(|(_, out)| !**out) {
            let dx = rng.random_range(-half_jitter..=half_jitter);
            let dy = rng.random_range(-half_jitter..=half_jitter);
            *q = q.translated(dx, dy);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut permutation = vec![0; n];
    for (pos, &orig) in order.iter().enumerate() {
        permutation[orig] = pos;
    }
    let shuffled: PointSet = order.iter().map(|&orig| b[orig]).collect();

    let (mut true_pairs, mut outlier_pairs) = (Vec::new(), Vec::new());
    for i in 0..n {
        let pair = (i, permutation[i]);
        if is_outlier[i] {
            outlier_pairs.push(pair);
        } else {
            true_pairs.push(pair);
        }
    }

    Ok((
        PointSet::new(a),
        shuffled,
        GroundTruth {
            true_pairs,
            outlier_pairs,
            planted_transform: planted,
            permutation,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::angular_distance;
    use proptest::prelude::*;

    #[test]
    fn clean_scene_is_a_permuted_rigid_copy() {
        let t = RigidTransform::new(1.0, 5.0, -8.0);
        let cfg = SynthConfig::new(40, 0.0, 0.0)
            .with_seed(1)
            .with_transform(t);
        let (a, b, gt) = generate_scene(&cfg).unwrap();
        assert_eq!(gt.true_pairs().len(), 40);
        assert!(gt.outlier_pairs().is_empty());
        assert_eq!(gt.planted_transform(), t);
        for &(i, j) in gt.true_pairs() {
            assert_eq!(t.apply(&a[i]), b[j]);
        }
        let mut seen = gt.permutation().to_vec();
        seen.sort();
        assert_eq!(seen, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn outlier_count_is_floored() {
        let (_, _, gt) = generate_scene(&SynthConfig::new(50, 0.2, 0.08).with_seed(4)).unwrap();
        assert_eq!(gt.outlier_pairs().len(), 10);
        assert_eq!(gt.true_pairs().len(), 40);
        assert_eq!(SynthConfig::new(7, 0.5, 0.0).outlier_count(), 3);
        assert_eq!(SynthConfig::new(100, 0.29, 0.0).outlier_count(), 29);
    }

    #[test]
    fn seeds_control_everything() {
        let cfg = SynthConfig::new(30, 0.3, 0.1).with_seed(77);
        assert_eq!(generate_scene(&cfg).unwrap(), generate_scene(&cfg).unwrap());
        assert_ne!(
            generate_scene(&cfg).unwrap(),
            generate_scene(&cfg.with_seed(78)).unwrap()
        );
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(generate_scene(&SynthConfig::new(1, 0.0, 0.0)).is_err());
        assert!(generate_scene(&SynthConfig::new(10, 1.5, 0.0)).is_err());
        assert!(generate_scene(&SynthConfig::new(10, 0.0, -0.1)).is_err());
        assert!(generate_scene(&SynthConfig::new(10, 0.0, 0.0).with_range(0.0)).is_err());
    }

    #[test]
    fn rows_round_trip() {
        let (_, _, gt) = generate_scene(&SynthConfig::new(20, 0.25, 0.0).with_seed(3)).unwrap();
        let back = GroundTruth::from_rows(&gt.rows(), gt.planted_transform());
        assert_eq!(back, gt);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn scene_invariants(
            n in 2usize..60,
            outlier in 0.0..=1.0f64,
            jitter in 0.0..0.2f64,
            seed in any::<u64>(),
        ) {
            let cfg = SynthConfig::new(n, outlier, jitter).with_seed(seed);
            let (a, b, gt) = generate_scene(&cfg).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert_eq!(b.len(), n);
            prop_assert_eq!(gt.true_pairs().len(), n - cfg.outlier_count());
            prop_assert_eq!(gt.rows().len(), n);

            let t = gt.planted_transform();
            let half = jitter * cfg.range() / 2.0;
            for &(i, j) in gt.true_pairs() {
                let mapped = t.apply(&a[i]);
                prop_assert!((mapped.x() - b[j].x()).abs() <= half + 1e-9);
                prop_assert!((mapped.y() - b[j].y()).abs() <= half + 1e-9);
                prop_assert!(angular_distance(mapped.theta(), b[j].theta()) < 1e-12);
            }
            let inside = |p: &DirectedPoint| {
                (0.0..=cfg.range()).contains(&p.x()) && (0.0..=cfg.range()).contains(&p.y())
            };
            prop_assert!(a.iter().all(inside));
            for &(_, j) in gt.outlier_pairs() {
                prop_assert!(inside(&b[j]));
            }
        }
    }
}
