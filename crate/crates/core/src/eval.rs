//! ACPPR scoring and the seeded experiment grid.
//!
//! A grid crosses neighbor counts with outlier and jitter ratios and runs a
//! fixed number of seeded trials per cell. Trial seeds depend only on the
//! base seed and the (outlier, jitter) cell, so every K value sees the same
//! scenes. Trials run in parallel; results are gathered by index, so the
//! output never depends on scheduling.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::assignment::Matching;
use crate::error::{Error, Result};
use crate::matcher::{match_point_sets, MatchConfig};
use crate::synth::{generate_scene, GroundTruth, SynthConfig};

/// Fraction of the scene's true pairs present in `result`. Extra pairs do
/// not count against it.
pub fn acppr(result: &Matching, gt: &GroundTruth) -> Result<f64> {
    let truth = gt.true_pairs();
    if truth.is_empty() {
        return Err(Error::UndefinedMetric);
    }
    let truth: HashSet<(usize, usize)> = truth.iter().copied().collect();
    let hits = result.pairs().iter().filter(|p| truth.contains(p)).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Generate one scene, match it, score it.
pub fn run_trial(synth: &SynthConfig, matching: &MatchConfig) -> Result<f64> {
    let (a, b, gt) = generate_scene(synth)?;
    if gt.true_pairs().is_empty() {
        return Err(Error::UndefinedMetric);
    }
    let result = match_point_sets(&a, &b, matching)?;
    acppr(&result.pairs, &gt)
}

/// Seed for trial `trial` of grid cell `cell`.
pub fn trial_seed(base: u64, cell: usize, trial: usize) -> u64 {
    // splitmix64 finalizer over the packed (cell, trial) key
    let mut z = ((cell as u64) << 32 | trial as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    base.wrapping_add(z ^ (z >> 31))
}

/// An experiment grid: every K crossed with every (outlier, jitter) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub k_values: Vec<usize>,
    pub outlier_ratios: Vec<f64>,
    pub jitter_ratios: Vec<f64>,
    pub trials: usize,
    /// Point count, range and planted transform; its ratios and seed are
    /// overridden per trial.
    pub scene: SynthConfig,
    /// Thresholds, stopping rule and filter; K is overridden per column.
    pub matching: MatchConfig,
    pub seed: u64,
}

impl Default for GridSpec {
    /// N = 50, K ∈ {6, 12, 25, 50}, outliers 0–60 % in steps of 10,
    /// jitter 0–12 % in steps of 2, 20 trials.
    fn default() -> Self {
        Self {
            k_values: vec![6, 12, 25, 50],
            outlier_ratios: (0..=6).map(|i| i as f64 / 10.0).collect(),
            jitter_ratios: (0..=6).map(|i| (2 * i) as f64 / 100.0).collect(),
            trials: 20,
            scene: SynthConfig::new(50, 0.0, 0.0),
            matching: MatchConfig::default(),
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        for (name, empty) in [
            ("k", self.k_values.is_empty()),
            ("outlier", self.outlier_ratios.is_empty()),
            ("jitter", self.jitter_ratios.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidConfig(format!(
                    "{name} list must not be empty"
                )));
            }
        }
        for &k in &self.k_values {
            self.matching.with_k(k)?;
        }
        for &o in &self.outlier_ratios {
            for &j in &self.jitter_ratios {
                let cfg = self.scene.with_ratios(o, j);
                cfg.validate()?;
                if cfg.outlier_count() == cfg.n() {
                    return Err(Error::UndefinedMetric);
                }
            }
        }
        Ok(())
    }
}

/// Per-K results: `trials[outlier][jitter][trial]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KTable {
    pub k: usize,
    pub trials: Vec<Vec<Vec<f64>>>,
}

impl KTable {
    pub fn cell_mean(&self, outlier: usize, jitter: usize) -> f64 {
        mean(&self.trials[outlier][jitter])
    }

    /// Mean of the cell means in one outlier row.
    pub fn row_average(&self, outlier: usize) -> f64 {
        let cells: Vec<f64> = (0..self.trials[outlier].len())
            .map(|j| self.cell_mean(outlier, j))
            .collect();
        mean(&cells)
    }

    /// Mean of the cell means in one jitter column.
    pub fn column_average(&self, jitter: usize) -> f64 {
        let cells: Vec<f64> = (0..self.trials.len())
            .map(|o| self.cell_mean(o, jitter))
            .collect();
        mean(&cells)
    }

    /// Mean over every cell mean.
    pub fn grand_mean(&self) -> f64 {
        let rows: Vec<f64> = (0..self.trials.len())
            .map(|o| self.row_average(o))
            .collect();
        mean(&rows)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub n: usize,
    pub outlier_ratios: Vec<f64>,
    pub jitter_ratios: Vec<f64>,
    pub tables: Vec<KTable>,
}

pub fn run_grid(spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let (no, nj, nt) = (
        spec.outlier_ratios.len(),
        spec.jitter_ratios.len(),
        spec.trials,
    );
    let per_k = no * nj * nt;
    let values = (0..spec.k_values.len() * per_k)
        .into_par_iter()
        .map(|job| {
            let (ki, rest) = (job / per_k, job % per_k);
            let (cell, trial) = (rest / nt, rest % nt);
            let (oi, ji) = (cell / nj, cell % nj);
            let (k, outlier, jitter) = (
                spec.k_values[ki],
                spec.outlier_ratios[oi],
                spec.jitter_ratios[ji],
            );
            let scene = spec
                .scene
                .with_ratios(outlier, jitter)
                .with_seed(trial_seed(spec.seed, cell, trial));
            spec.matching
                .with_k(k)
                .and_then(|m| run_trial(&scene, &m))
                .map_err(|e| Error::Trial {
                    k,
                    outlier,
                    jitter,
                    trial,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;

    let tables = spec
        .k_values
        .iter()
        .zip(values.chunks(per_k))
        .map(|(&k, block)| KTable {
            k,
            trials: block
                .chunks(nj * nt)
                .map(|row| row.chunks(nt).map(<[f64]>::to_vec).collect())
                .collect(),
        })
        .collect();
    Ok(GridResult {
        n: spec.scene.n(),
        outlier_ratios: spec.outlier_ratios.clone(),
        jitter_ratios: spec.jitter_ratios.clone(),
        tables,
    })
}

/// Renders a ratio as a percentage label without float noise: `0.08` → `8`.
pub fn percent_label(ratio: f64) -> String {
    let pct = (ratio * 100.0 * 1e6).round() / 1e6;
    format!("{pct}")
}

impl GridResult {
    pub fn table(&self, k: usize) -> Option<&KTable> {
        self.tables.iter().find(|t| t.k == k)
    }

    /// One table as CSV: outlier ratios
    /// down, jitter ratios across, percent values, average margins.
    pub fn table_csv(&self, table: &KTable) -> String {
        let mut out = String::from("outlier_pct\\jitter_pct");
        for &j in &self.jitter_ratios {
            let _ = write!(out, ",{}", percent_label(j));
        }
        out.push_str(",average\n");
        for (oi, &o) in self.outlier_ratios.iter().enumerate() {
            out.push_str(&percent_label(o));
            for ji in 0..self.jitter_ratios.len() {
                let _ = write!(out, ",{:.1}", 100.0 * table.cell_mean(oi, ji));
            }
            let _ = writeln!(out, ",{:.1}", 100.0 * table.row_average(oi));
        }
        out.push_str("average");
        for ji in 0..self.jitter_ratios.len() {
            let _ = write!(out, ",{:.1}", 100.0 * table.column_average(ji));
        }
        let _ = writeln!(out, ",{:.1}", 100.0 * table.grand_mean());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// ACPPR against K.
    NeighborCount,
    /// ACPPR against outlier ratio, one curve per K.
    OutlierRatio,
    /// ACPPR against jitter ratio, one curve per K.
    JitterRatio,
}

impl Figure {
    /// Figure by its number, 1 to 3.
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Self::NeighborCount),
            2 => Ok(Self::OutlierRatio),
            3 => Ok(Self::JitterRatio),
            _ => Err(Error::InvalidConfig(format!(
                "no figure {n}; expected 1, 2 or 3"
            ))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::NeighborCount => 1,
            Self::OutlierRatio => 2,
            Self::JitterRatio => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub x: f64,
    pub curve: String,
    /// Mean ACPPR as a fraction.
    pub y: f64,
}

/// Data behind one figure.
///
/// Figure 1 plots each K's grand mean on a single curve labelled by N.
/// Figures 2 and 3 use the row and column averages, one curve per K; on a
/// grid with a single jitter (resp. outlier) value these are exactly that
/// slice.
pub fn emit_figure_series(result: &GridResult, figure: Figure) -> Result<Vec<SeriesPoint>> {
    let axis_len = match figure {
        Figure::NeighborCount => result.tables.len(),
        Figure::OutlierRatio => result.outlier_ratios.len(),
        Figure::JitterRatio => result.jitter_ratios.len(),
    };
    if axis_len == 0 || result.tables.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "grid does not cover the axis of figure {}",
            figure.number()
        )));
    }
    let series = match figure {
        Figure::NeighborCount => result
            .tables
            .iter()
            .map(|t| SeriesPoint {
                x: t.k as f64,
                curve: format!("N={}", result.n),
                y: t.grand_mean(),
            })
            .collect(),
        Figure::OutlierRatio => result
            .tables
            .iter()
            .flat_map(|t| {
                result
                    .outlier_ratios
                    .iter()
                    .enumerate()
                    .map(move |(oi, &o)| SeriesPoint {
                        x: o,
                        curve: format!("K={}", t.k),
                        y: t.row_average(oi),
                    })
            })
            .collect(),
        Figure::JitterRatio => result
            .tables
            .iter()
            .flat_map(|t| {
                result
                    .jitter_ratios
                    .iter()
                    .enumerate()
                    .map(move |(ji, &j)| SeriesPoint {
                        x: j,
                        curve: format!("K={}", t.k),
                        y: t.column_average(ji),
                    })
            })
            .collect(),
    };
    Ok(series)
}

/// `x,curve_label,y` rows. Ratios on the x axis and all y values are in
/// percent.
pub fn series_csv(figure: Figure, series: &[SeriesPoint]) -> String {
    let mut out = String::from("x,curve_label,y\n");
    for p in series {
        let x = match figure {
            Figure::NeighborCount => format!("{}", p.x),
            _ => percent_label(p.x),
        };
        let _ = writeln!(out, "{x},{},{:.1}", p.curve, 100.0 * p.y);
    }
    out
}
