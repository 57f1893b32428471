//! Multigrid V-cycles and the Full Multigrid driver.
//!
//! The correction scheme pre-smooths, restricts the residual, solves the
//! coarse problem recursively, interpolates and adds the correction, and
//! post-smooths. Full Multigrid solves the coarsest level first and works
//! upward, prolongating each solution as the initial guess for the next
//! level; the per-level iterates it leaves behind are exactly the values the
//! recycling estimator consumes.
//!
//! Work is counted in deterministic units: one unit per point relaxation or
//! per residual evaluation, which keeps cost-based tests machine-independent.

use crate::error::{Error, Result};
use crate::solver::coeff::CoefficientSample;
use crate::solver::grid::{qoi, subdivisions, NodeGrid};
use crate::solver::stencil::LevelOperator;
use crate::solver::transfer::{prolongate_bilinear, restrict_full_weighting};

/// Cycling parameters. Defaults: one FMG cycle per level, two pre- and one
/// post-smoothing sweep, coarsest grid solved to 1e-13 relative residual.
#[derive(Clone, Copy, Debug)]
pub struct MgParams {
    pub mu0: usize,
    pub mu1: usize,
    pub mu2: usize,
    pub coarse_rel_tol: f64,
    pub coarse_max_sweeps: usize,
}

impl Default for MgParams {
    fn default() -> Self {
        Self {
            mu0: 1,
            mu1: 2,
            mu2: 1,
            coarse_rel_tol: 1e-13,
            coarse_max_sweeps: 10_000,
        }
    }
}

impl MgParams {
    pub fn with_mu0(mut self, mu0: usize) -> Self {
        self.mu0 = mu0;
        self
    }
}

/// Output of one Full Multigrid solve: the iterate and quantity of interest
/// recorded on every level up to the target.
#[derive(Clone, Debug)]
pub struct FmgResult {
    pub solutions: Vec<NodeGrid>,
    pub qoi: Vec<f64>,
    pub work: u64,
}

/// Solves the coarsest-level system by symmetric Gauss–Seidel iteration to
/// the configured relative residual.
fn solve_coarsest(
    op: &LevelOperator,
    u: &mut NodeGrid,
    b: &NodeGrid,
    params: &MgParams,
    work: &mut u64,
) -> Result<()> {
    let b_norm = b.norm();
    if b_norm == 0.0 {
        u.fill_zero();
        return Ok(());
    }
    let target = params.coarse_rel_tol * b_norm;
    let mut residual = f64::INFINITY;
    for _ in 0..params.coarse_max_sweeps {
        op.sgs_sweep(u, b, work);
        residual = op.residual_norm(u, b, work);
        if residual <= target {
            return Ok(());
        }
    }
    Err(Error::CoarseSolveNonConvergence {
        residual,
        iterations: params.coarse_max_sweeps,
    })
}

/// One V-cycle on `level`. On level 0 this is the coarse solve.
pub fn v_cycle(
    sample: &CoefficientSample,
    level: usize,
    u: &mut NodeGrid,
    b: &NodeGrid,
    params: &MgParams,
    work: &mut u64,
) -> Result<()> {
    let op = LevelOperator::new(sample.level(level))?;
    if level == 0 {
        return solve_coarsest(&op, u, b, params, work);
    }
    for _ in 0..params.mu1 {
        op.sgs_sweep(u, b, work);
    }
    let mut residual = NodeGrid::zeros(u.subdivisions());
    op.residual(u, b, &mut residual, work);
    let coarse_rhs = restrict_full_weighting(&residual);
    let mut coarse_err = NodeGrid::zeros(coarse_rhs.subdivisions());
    v_cycle(sample, level - 1, &mut coarse_err, &coarse_rhs, params, work)?;
    prolongate_bilinear(&coarse_err, &mut residual);
    u.axpy(1.0, &residual);
    for _ in 0..params.mu2 {
        op.sgs_sweep(u, b, work);
    }
    Ok(())
}

/// Full Multigrid with nested iteration and `f == 1`.
pub fn fmg_solve(
    sample: &CoefficientSample,
    target_level: usize,
    params: &MgParams,
) -> Result<FmgResult> {
    fmg_solve_with(sample, target_level, params, &|_, _| 1.0)
}

/// Full Multigrid with a caller-supplied right-hand side.
pub fn fmg_solve_with(
    sample: &CoefficientSample,
    target_level: usize,
    params: &MgParams,
    rhs: &dyn Fn(f64, f64) -> f64,
) -> Result<FmgResult> {
    assert!(sample.target_level() >= target_level);
    let mut work = 0u64;
    let mut solutions: Vec<NodeGrid> = Vec::with_capacity(target_level + 1);
    let mut qois = Vec::with_capacity(target_level + 1);

    let b0 = NodeGrid::from_fn(subdivisions(0), rhs);
    let mut u = NodeGrid::for_level(0);
    let op0 = LevelOperator::new(sample.level(0))?;
    solve_coarsest(&op0, &mut u, &b0, params, &mut work)?;
    qois.push(qoi(&u));
    solutions.push(u.clone());

    for level in 1..=target_level {
        let mut u_fine = NodeGrid::for_level(level);
        prolongate_bilinear(&u, &mut u_fine);
        u = u_fine;
        let b = NodeGrid::from_fn(subdivisions(level), rhs);
        for _ in 0..params.mu0 {
            v_cycle(sample, level, &mut u, &b, params, &mut work)?;
        }
        qois.push(qoi(&u));
        solutions.push(u.clone());
    }

    Ok(FmgResult {
        solutions,
        qoi: qois,
        work,
    })
}

/// Repeats V-cycles until the residual drops below `rel_tol * |b|`; used for
/// reference solves in tests and rate studies.
pub fn solve_to_tolerance(
    sample: &CoefficientSample,
    level: usize,
    rel_tol: f64,
    max_cycles: usize,
    params: &MgParams,
    rhs: &dyn Fn(f64, f64) -> f64,
) -> Result<(NodeGrid, u64)> {
    let fmg = fmg_solve_with(sample, level, params, rhs)?;
    let mut u = fmg.solutions[level].clone();
    let mut work = fmg.work;
    let b = NodeGrid::from_fn(subdivisions(level), rhs);
    let op = LevelOperator::new(sample.level(level))?;
    let b_norm = b.norm();
    if b_norm == 0.0 {
        u.fill_zero();
        return Ok((u, work));
    }
    for _ in 0..max_cycles {
        if op.residual_norm(&u, &b, &mut work) <= rel_tol * b_norm {
            return Ok((u, work));
        }
        v_cycle(sample, level, &mut u, &b, params, &mut work)?;
    }
    let residual = op.residual_norm(&u, &b, &mut work);
    Err(Error::CoarseSolveNonConvergence {
        residual,
        iterations: max_cycles,
    })
}
