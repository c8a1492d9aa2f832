//! Robust matching of directed 2-D point sets.
//!
//! Each candidate pair `(p_i, q_j)` implies one rigid transform. Pairs whose
//! transforms agree with those of their spatial neighbors reinforce each
//! other over a few rounds of score updates, and an optimal assignment over
//! the final scores yields the correspondences. A least-squares fit over
//! them gives the global transform.
//!
//! ```
//! use dpmatch::{generate_scene, match_point_sets, MatchConfig, SynthConfig};
//!
//! let (a, b, truth) = generate_scene(&SynthConfig::new(30, 0.0, 0.0).with_seed(1)).unwrap();
//! let result = match_point_sets(&a, &b, &MatchConfig::default()).unwrap();
//! assert_eq!(result.pairs.pairs(), truth.true_pairs());
//! ```

pub mod assignment;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod matcher;
pub mod neighbors;
pub mod scoring;
pub mod similarity;
pub mod synth;

pub use assignment::{filter_matches, kuhn_munkres_max, Matching};
pub use error::{Error, Result};
pub use eval::{acppr, emit_figure_series, run_grid, run_trial, Figure, GridResult, GridSpec};
pub use geometry::{
    angular_distance, apply_transform, compute_transform, wrap_angle, DirectedPoint, PointSet,
    RigidTransform,
};
pub use matcher::{estimate_global_transform, match_point_sets, MatchConfig, MatchResult};
pub use neighbors::{build_neighbor_table, NeighborTable};
pub use scoring::{
    init_scores, iterate_scores, normalize_scores, precompute_transforms, update_scores,
    IterationConfig, ScoreMatrix, TransformTable,
};
pub use similarity::{transform_similarity, SimilarityThresholds};
pub use synth::{generate_scene, GroundTruth, PlantedTransform, SynthConfig, DEFAULT_RANGE};
