//! Estimator configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::REFINEMENT_FACTOR;

/// How parameter vectors are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Independent pseudo-random draws; the "shifts" are independent sample
    /// groups and the group spread still yields a valid variance estimate.
    MonteCarlo,
    /// Randomly shifted rank-1 lattice sequence.
    QuasiMonteCarlo,
}

/// Source of the per-level cost figures `C_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostSource {
    /// Deterministic solver work units (default; machine-independent).
    WorkUnits,
    /// Measured wall-clock seconds per solve.
    WallClock,
}

/// The three estimator families exposed by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Mlmc,
    Mlqmc,
    MgMlqmc,
}

impl EstimatorKind {
    pub fn mode(self) -> SamplingMode {
        match self {
            EstimatorKind::Mlmc => SamplingMode::MonteCarlo,
            _ => SamplingMode::QuasiMonteCarlo,
        }
    }

    pub fn recycle(self) -> bool {
        matches!(self, EstimatorKind::MgMlqmc)
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mlmc => "mlmc",
            EstimatorKind::Mlqmc => "mlqmc",
            EstimatorKind::MgMlqmc => "mg-mlqmc",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlmc" => Ok(EstimatorKind::Mlmc),
            "mlqmc" => Ok(EstimatorKind::Mlqmc),
            "mg-mlqmc" | "mgmlqmc" => Ok(EstimatorKind::MgMlqmc),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator kind {other:?} (expected mlmc, mlqmc or mg-mlqmc)"
            ))),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Configuration of one estimation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub mode: SamplingMode,
    /// Reuse the coarse Full Multigrid iterates as coarse-level samples.
    pub recycle: bool,
    /// Number of random shifts (Monte Carlo: independent groups).
    pub num_shifts: usize,
    /// Root-mean-square error target `eps`.
    pub tolerance: f64,
    pub seed: u64,
    /// Hard cap on the number of levels the adaptive driver may add.
    pub max_level: usize,
    pub cost_source: CostSource,
    /// Abort threshold for the total work (in work units); prevents runaway
    /// runs when the tolerance is unreachable.
    pub max_total_work: f64,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, tolerance: f64, seed: u64) -> Self {
        Self {
            mode: kind.mode(),
            recycle: kind.recycle(),
            num_shifts: 20,
            tolerance,
            seed,
            max_level: 10,
            cost_source: CostSource::WorkUnits,
            max_total_work: 1e10,
        }
    }

    pub fn with_num_shifts(mut self, r: usize) -> Self {
        self.num_shifts = r;
        self
    }

    pub fn with_max_level(mut self, l: usize) -> Self {
        self.max_level = l;
        self
    }

    pub fn with_budget(mut self, work: f64) -> Self {
        self.max_total_work = work;
        self
    }

    /// Geometric refinement factor of the grid hierarchy.
    pub fn refinement_factor(&self) -> f64 {
        REFINEMENT_FACTOR
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_shifts < 2 {
            return Err(Error::TooFewShifts {
                required: 2,
                got: self.num_shifts,
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.max_total_work > 0.0) {
            return Err(Error::InvalidParameter(
                "work budget must be positive".into(),
            ));
        }
        Ok(())
    }
}
