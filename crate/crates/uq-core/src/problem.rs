//! The lognormal diffusion model problem, wired up as a multilevel sampler.

use std::sync::Arc;

use crate::error::Result;
use crate::estimator::{LevelSolver, LevelSolves};
use crate::field::kl::KLExpansion;
use crate::solver::coeff::FieldSampler;
use crate::solver::multigrid::{fmg_solve, MgParams};

/// `-div(exp(z) grad u) = 1` on the unit square with homogeneous Dirichlet
/// data; the quantity of interest is `u(1/2, 1/2)`. One `solve` call builds
/// the coefficient sample for the parameter vector, runs Full Multigrid to
/// the requested level and returns the per-level quantities of interest,
/// which is what makes coarse-sample recycling free.
pub struct LognormalDiffusionProblem {
    sampler: FieldSampler,
    params: MgParams,
}

impl LognormalDiffusionProblem {
    pub fn new(kl: Arc<KLExpansion>, max_level: usize, params: MgParams) -> Self {
        Self {
            sampler: FieldSampler::new(kl, max_level),
            params,
        }
    }

    pub fn sampler(&self) -> &FieldSampler {
        &self.sampler
    }

    pub fn mg_params(&self) -> &MgParams {
        &self.params
    }
}

impl LevelSolver for LognormalDiffusionProblem {
    fn dimension(&self) -> usize {
        self.sampler.dimension()
    }

    fn solve(&self, y: &[f64], level: usize) -> Result<LevelSolves> {
        let sample = self.sampler.sample(y, level)?;
        let fmg = fmg_solve(&sample, level, &self.params)?;
        Ok(LevelSolves {
            values: fmg.qoi,
            work: fmg.work,
        })
    }
}
