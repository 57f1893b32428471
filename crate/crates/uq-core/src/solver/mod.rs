//! Finite-difference discretization of the lognormal diffusion problem on
//! nested grids, solved by Full Multigrid.

pub mod coeff;
pub mod grid;
pub mod multigrid;
pub mod stencil;
pub mod transfer;

pub use coeff::{CoefficientSample, FieldSampler, LevelCoefficients};
pub use grid::{mesh_size, qoi, subdivisions, NodeGrid, REFINEMENT_FACTOR};
pub use multigrid::{fmg_solve, fmg_solve_with, solve_to_tolerance, v_cycle, FmgResult, MgParams};
pub use stencil::LevelOperator;
pub use transfer::{prolongate_bilinear, restrict_full_weighting};
