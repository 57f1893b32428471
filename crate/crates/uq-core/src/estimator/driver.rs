//! The estimation driver: deterministic parameter sampling, batched
//! sample-and-solve with per-shift parallelism, and the adaptive doubling
//! loop that adds levels until variance and bias targets are met.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::accumulator::DifferenceAccumulator;
use crate::estimator::config::{CostSource, EstimatorConfig, SamplingMode};
use crate::estimator::result::{RunResult, VariancePoint};
use crate::estimator::{LevelSolver, LevelSolves};
use crate::lattice::{draw_shifts, LatticeRule, ShiftSet};
use crate::normal::map_to_normal;
use crate::streams::{tag, CounterStream};

/// Ratio used when a level has no cost figure yet: sampling it first.
const INFINITE_PRIORITY: f64 = f64::INFINITY;

/// A multilevel estimator bound to a solver.
pub struct MultilevelEstimator<'a, S: LevelSolver + ?Sized> {
    solver: &'a S,
    config: EstimatorConfig,
    lattice: Option<LatticeRule>,
    shifts: Option<ShiftSet>,
    acc: DifferenceAccumulator,
    variance_history: Vec<VariancePoint>,
}

impl<'a, S: LevelSolver + ?Sized> MultilevelEstimator<'a, S> {
    /// Builds an estimator; quasi-Monte Carlo mode loads the embedded
    /// lattice table at the solver's dimension and draws the shift set.
    pub fn new(solver: &'a S, config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let (lattice, shifts) = match config.mode {
            SamplingMode::QuasiMonteCarlo => {
                let lattice = LatticeRule::embedded(solver.dimension())?;
                let shifts = draw_shifts(
                    solver.dimension(),
                    config.max_level,
                    config.num_shifts,
                    config.seed,
                )?;
                (Some(lattice), Some(shifts))
            }
            SamplingMode::MonteCarlo => (None, None),
        };
        let acc = DifferenceAccumulator::new(config.num_shifts, config.recycle)?;
        Ok(Self {
            solver,
            config,
            lattice,
            shifts,
            acc,
            variance_history: Vec::new(),
        })
    }

    /// As `new`, but with caller-supplied lattice rule and shifts (tests and
    /// reference comparisons).
    pub fn with_lattice(
        solver: &'a S,
        config: EstimatorConfig,
        lattice: LatticeRule,
        shifts: ShiftSet,
    ) -> Result<Self> {
        config.validate()?;
        if lattice.dimension() != solver.dimension() || shifts.dimension() != solver.dimension() {
            return Err(Error::DimensionMismatch {
                expected: solver.dimension(),
                got: lattice.dimension(),
            });
        }
        if shifts.num_shifts() != config.num_shifts {
            return Err(Error::DimensionMismatch {
                expected: config.num_shifts,
                got: shifts.num_shifts(),
            });
        }
        let acc = DifferenceAccumulator::new(config.num_shifts, config.recycle)?;
        Ok(Self {
            solver,
            config,
            lattice: Some(lattice),
            shifts: Some(shifts),
            acc,
            variance_history: Vec::new(),
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn accumulator(&self) -> &DifferenceAccumulator {
        &self.acc
    }

    /// The parameter vector for sample `n` of shift `r` on `level`; a pure
    /// function of `(seed, level, r, n)`.
    pub fn sample_parameters(&self, level: usize, r: usize, n: u64, out: &mut [f64]) -> Result<()> {
        match self.config.mode {
            SamplingMode::QuasiMonteCarlo => {
                let lattice = self.lattice.as_ref().expect("lattice present in QMC mode");
                let shifts = self.shifts.as_ref().expect("shifts present in QMC mode");
                let mut point = vec![0.0; out.len()];
                lattice.shifted_point_into(n, shifts.shift(level, r), &mut point)?;
                map_to_normal(&point, out);
            }
            SamplingMode::MonteCarlo => {
                let stream = CounterStream::new(&[
                    self.config.seed,
                    tag::MC,
                    level as u64,
                    r as u64,
                    n,
                ]);
                let mut point = vec![0.0; out.len()];
                stream.fill_uniform(&mut point);
                map_to_normal(&point, out);
            }
        }
        Ok(())
    }

    /// Runs all outstanding samples (`points_old..points`) of `level` for
    /// every shift. Shifts execute in parallel; results are merged in shift
    /// order so the outcome is independent of the worker count.
    fn sample_and_solve(&mut self, level: usize) -> Result<()> {
        let new_count = self.acc.points(level);
        let old_count = self.acc.points_old(level);
        if new_count == old_count {
            return Ok(());
        }
        let dim = self.solver.dimension();
        let num_shifts = self.acc.num_shifts();
        let batches: Vec<Vec<(Vec<f64>, u64, f64)>> = (0..num_shifts)
            .into_par_iter()
            .map(|r| -> Result<Vec<(Vec<f64>, u64, f64)>> {
                let mut records = Vec::with_capacity((new_count - old_count) as usize);
                let mut y = vec![0.0; dim];
                for n in old_count..new_count {
                    self.sample_parameters(level, r, n, &mut y)?;
                    let started = Instant::now();
                    let solved: LevelSolves = self.solver.solve(&y, level)?;
                    let wall = started.elapsed().as_secs_f64();
                    if solved.values.len() != level + 1 {
                        return Err(Error::DimensionMismatch {
                            expected: level + 1,
                            got: solved.values.len(),
                        });
                    }
                    let mut diffs = Vec::with_capacity(level + 1);
                    let mut prev = 0.0;
                    for &f in &solved.values {
                        diffs.push(f - prev);
                        prev = f;
                    }
                    records.push((diffs, solved.work, wall));
                }
                Ok(records)
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, records) in batches.into_iter().enumerate() {
            for (diffs, work, wall) in records {
                self.acc.record_solve(level, r, &diffs, work, wall);
            }
        }
        self.acc.finish_batch(level);
        self.variance_history.push(VariancePoint {
            level,
            points: self.acc.points(level),
            variance: self.acc.level_variance(level),
        });
        Ok(())
    }

    /// Grows `level` to exactly `count` points (monotone) and solves them.
    pub fn grow_level(&mut self, level: usize, count: u64) -> Result<()> {
        if let Some(lattice) = &self.lattice {
            if count > lattice.max_points() {
                return Err(Error::PointIndexOutOfRange {
                    index: count,
                    max_log2: lattice.max_log2_points(),
                });
            }
        }
        if let Some(shifts) = &self.shifts {
            if level >= shifts.num_levels() {
                return Err(Error::InvalidParameter(format!(
                    "level {level} exceeds the configured max_level {}",
                    self.config.max_level
                )));
            }
        }
        self.acc.begin_batch(level, count);
        self.sample_and_solve(level)
    }

    /// Runs a fixed sample schedule: `counts[l]` points on level `l`.
    pub fn run_fixed(&mut self, counts: &[u64]) -> Result<()> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one level is required".into(),
            ));
        }
        self.acc.ensure_level(counts.len() - 1);
        for (level, &count) in counts.iter().enumerate() {
            if count > 0 {
                self.grow_level(level, count)?;
            }
        }
        Ok(())
    }

    /// Records the shift variance of `level` at each point count in
    /// `schedule` (ascending), reusing earlier samples.
    pub fn variance_curve(&mut self, level: usize, schedule: &[u64]) -> Result<Vec<(u64, f64)>> {
        self.acc.ensure_level(level);
        let mut curve = Vec::with_capacity(schedule.len());
        for &count in schedule {
            self.grow_level(level, count)?;
            curve.push((count, self.acc.level_variance(level)));
        }
        Ok(curve)
    }

    fn cost_per_solve(&self, level: usize) -> f64 {
        match self.config.cost_source {
            CostSource::WorkUnits => self.acc.work_per_solve(level),
            CostSource::WallClock => self.acc.wall_per_solve(level),
        }
    }

    fn total_cost(&self) -> f64 {
        self.acc.total_work() as f64
    }

    /// Variance estimate used by the inner loop; a level without samples
    /// reports infinity so it gets sampled before the loop can exit.
    fn variance_or_infinity(&self) -> f64 {
        for level in 0..self.acc.num_levels() {
            if self.acc.points(level) == 0 {
                return f64::INFINITY;
            }
        }
        self.acc.variance_over_shifts().unwrap_or(f64::INFINITY)
    }

    /// The level `l <= L` with the largest variance-to-cost ratio; levels
    /// without samples (or without cost figures) come first.
    fn max_ratio_level(&self) -> usize {
        let mut best = 0;
        let mut best_ratio = f64::NEG_INFINITY;
        for level in 0..self.acc.num_levels() {
            let ratio = if self.acc.points(level) == 0 {
                INFINITE_PRIORITY
            } else {
                let cost = self.cost_per_solve(level);
                if cost > 0.0 {
                    self.acc.level_variance(level) / cost
                } else {
                    INFINITE_PRIORITY
                }
            };
            if ratio > best_ratio {
                best_ratio = ratio;
                best = level;
            }
        }
        best
    }

    fn build_result(&self, converged: bool) -> RunResult {
        RunResult::from_accumulator(
            &self.acc,
            &self.config,
            self.variance_history.clone(),
            converged,
        )
    }

    /// The adaptive doubling loop. The outer loop adds levels while fewer
    /// than three are present or the bias estimate exceeds `eps/sqrt(2)`;
    /// the inner loop doubles the sample count at the level with the largest
    /// variance-to-cost ratio until the shift variance drops below
    /// `eps^2/2`. A result with `converged = false` is returned when the
    /// work budget or the level cap is exhausted first.
    pub fn adaptive_run(mut self) -> Result<RunResult> {
        let eps = self.config.tolerance;
        let variance_target = eps * eps / 2.0;
        let bias_target = eps / 2.0f64.sqrt();
        let rho = self.config.refinement_factor();
        let mut level = 0usize;
        loop {
            self.acc.ensure_level(level);
            while self.variance_or_infinity() > variance_target {
                if self.total_cost() > self.config.max_total_work {
                    return Ok(self.build_result(false));
                }
                let pick = self.max_ratio_level();
                let next = (2 * self.acc.points(pick)).max(1);
                self.grow_level(pick, next)?;
            }
            if level >= 2 && self.acc.bias_estimate(rho)? <= bias_target {
                return Ok(self.build_result(true));
            }
            if level == self.config.max_level {
                return Ok(self.build_result(false));
            }
            level += 1;
        }
    }

    /// Builds the result from whatever has been sampled so far.
    pub fn into_result(self) -> RunResult {
        self.build_result(true)
    }
}
