//! Multilevel estimators: difference accumulation with optional sample
//! recycling, shift-based variance estimation, bias fitting and the adaptive
//! doubling driver.

pub mod accumulator;
pub mod config;
pub mod driver;
pub mod result;

pub use accumulator::DifferenceAccumulator;
pub use config::{CostSource, EstimatorConfig, EstimatorKind, SamplingMode};
pub use driver::MultilevelEstimator;
pub use result::{LevelRow, RunResult, VariancePoint};

use crate::error::{Error, Result};

/// One multilevel solve: the quantity of interest on every level
/// `0..=level`, plus the work expended (in solver work units).
#[derive(Clone, Debug)]
pub struct LevelSolves {
    pub values: Vec<f64>,
    pub work: u64,
}

/// A deterministic multilevel sampler: maps a parameter vector to the
/// quantity of interest on all levels up to the requested one. The PDE
/// problem implements this; tests substitute cheap stubs.
pub trait LevelSolver: Sync {
    /// Length of the parameter vector `y`.
    fn dimension(&self) -> usize;

    /// Solves one sample. The returned `values` must have length
    /// `level + 1`.
    fn solve(&self, y: &[f64], level: usize) -> Result<LevelSolves>;
}

/// Optimal per-level sample counts for the classical multilevel Monte Carlo
/// estimator:
///
/// ```text
/// N_l = ceil( (2 / eps^2) sqrt(V_l / C_l) * sum_t sqrt(V_t C_t) )
/// ```
pub fn mlmc_optimal_nsamples(variances: &[f64], costs: &[f64], eps: f64) -> Result<Vec<u64>> {
    if variances.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: variances.len(),
            got: costs.len(),
        });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {eps}"
        )));
    }
    if variances.iter().chain(costs.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "variances and costs must be positive".into(),
        ));
    }
    let total: f64 = variances
        .iter()
        .zip(costs)
        .map(|(&v, &c)| (v * c).sqrt())
        .sum();
    Ok(variances
        .iter()
        .zip(costs)
        .map(|(&v, &c)| ((2.0 / (eps * eps)) * (v / c).sqrt() * total).ceil() as u64)
        .collect())
}
