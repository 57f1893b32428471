//! Run results: everything a finished estimation reports.

use serde::{Deserialize, Serialize};

use crate::estimator::accumulator::DifferenceAccumulator;
use crate::estimator::config::{CostSource, EstimatorConfig, SamplingMode};

/// Per-level summary row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    /// Point-set size `N_l` (per shift).
    pub points: u64,
    /// Fresh solves per shift; equals `points` under the cost accounting
    /// where a level-`l` solve is charged entirely to level `l`.
    pub fresh_solves: u64,
    /// Effective samples at this level including recycled contributions.
    pub effective_points: u64,
    /// Share of effective samples that were recycled, in percent.
    pub recycled_pct: f64,
    /// Shift-variance contribution of this level.
    pub level_variance: f64,
    /// Average cost of one fresh solve (work units or seconds).
    pub cost_per_solve: f64,
    /// Shift-averaged difference estimate for this level.
    pub upsilon_bar: f64,
    /// Sample mean of `F_l` over fresh solves at this level.
    pub mean_f: f64,
    /// Sample variance of `F_l` over fresh solves at this level.
    pub var_f: f64,
    /// Sample variance of the difference `F_l - F_{l-1}`.
    pub var_diff: f64,
}

/// One observation of a level's shift variance at a given point count;
/// the raw material for the lattice-rate fits.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VariancePoint {
    pub level: usize,
    pub points: u64,
    pub variance: f64,
}

/// Everything a finished run reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub estimate: f64,
    pub variance: f64,
    pub bias: f64,
    pub alpha: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub mode: SamplingMode,
    pub recycle: bool,
    pub num_shifts: usize,
    pub converged: bool,
    /// Total cost in the configured cost units.
    pub total_cost: f64,
    /// Total solver work units, independent of the cost source.
    pub total_work: u64,
    pub levels: Vec<LevelRow>,
    pub variance_history: Vec<VariancePoint>,
}

impl RunResult {
    pub(crate) fn from_accumulator(
        acc: &DifferenceAccumulator,
        config: &EstimatorConfig,
        variance_history: Vec<VariancePoint>,
        converged: bool,
    ) -> Self {
        let rho = config.refinement_factor();
        let sampled_levels = acc.num_levels();
        let levels: Vec<LevelRow> = (0..sampled_levels)
            .map(|l| LevelRow {
                level: l,
                points: acc.points(l),
                fresh_solves: acc.points(l),
                effective_points: acc.effective_points(l),
                recycled_pct: 100.0 * acc.recycled_fraction(l),
                level_variance: acc.level_variance(l),
                cost_per_solve: match config.cost_source {
                    CostSource::WorkUnits => acc.work_per_solve(l),
                    CostSource::WallClock => acc.wall_per_solve(l),
                },
                upsilon_bar: acc.upsilon_bar(l),
                mean_f: acc.mean_f(l),
                var_f: acc.var_f(l),
                var_diff: acc.var_diff(l),
            })
            .collect();
        let estimate = acc.estimator_value().unwrap_or(f64::NAN);
        let variance = acc.variance_over_shifts().unwrap_or(f64::NAN);
        let bias = acc.bias_estimate(rho).unwrap_or(f64::NAN);
        let total_cost = match config.cost_source {
            CostSource::WorkUnits => acc.total_work() as f64,
            CostSource::WallClock => acc.total_wall_secs(),
        };
        Self {
            estimate,
            variance,
            bias,
            alpha: acc.alpha_or_floor(rho),
            tolerance: config.tolerance,
            seed: config.seed,
            mode: config.mode,
            recycle: config.recycle,
            num_shifts: config.num_shifts,
            converged,
            total_cost,
            total_work: acc.total_work(),
            levels,
            variance_history,
        }
    }

    /// Finest level used.
    pub fn max_level(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }
}
