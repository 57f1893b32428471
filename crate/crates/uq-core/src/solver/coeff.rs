//! Diffusion-coefficient samples on the grid hierarchy.
//!
//! The five-point stencil needs the coefficient at the midpoints of
//! horizontal and vertical grid edges. Each level carries its own midpoint
//! values, evaluated straight from the KL expansion, so every level is a
//! legitimate standalone discretization and the telescoping sum holds.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::kl::KLExpansion;
use crate::solver::grid::subdivisions;

/// Edge-midpoint coefficient values for one level.
#[derive(Clone, Debug)]
pub struct LevelCoefficients {
    m: usize,
    /// `ax[i * (m+1) + j] = a((i + 1/2) h, j h)`, `i < m`, `j <= m`.
    ax: Vec<f64>,
    /// `ay[i * m + j] = a(i h, (j + 1/2) h)`, `i <= m`, `j < m`.
    ay: Vec<f64>,
}

impl LevelCoefficients {
    pub fn new(m: usize, ax: Vec<f64>, ay: Vec<f64>) -> Result<Self> {
        if ax.len() != m * (m + 1) || ay.len() != (m + 1) * m {
            return Err(Error::DimensionMismatch {
                expected: m * (m + 1),
                got: ax.len(),
            });
        }
        if ax.iter().chain(ay.iter()).any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter(
                "diffusion coefficient must be positive on every edge".into(),
            ));
        }
        Ok(Self { m, ax, ay })
    }

    pub fn constant(m: usize, value: f64) -> Self {
        Self {
            m,
            ax: vec![value; m * (m + 1)],
            ay: vec![value; (m + 1) * m],
        }
    }

    pub fn subdivisions(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn ax(&self, i: usize, j: usize) -> f64 {
        self.ax[i * (self.m + 1) + j]
    }

    #[inline]
    pub fn ay(&self, i: usize, j: usize) -> f64 {
        self.ay[i * self.m + j]
    }

    /// Midpoints of all horizontal edges followed by all vertical edges, in
    /// storage order. This is the evaluation order used by `FieldSampler`.
    pub fn edge_midpoints(m: usize) -> Vec<[f64; 2]> {
        let h = 1.0 / m as f64;
        let mut pts = Vec::with_capacity(2 * m * (m + 1));
        for i in 0..m {
            for j in 0..=m {
                pts.push([(i as f64 + 0.5) * h, j as f64 * h]);
            }
        }
        for i in 0..=m {
            for j in 0..m {
                pts.push([i as f64 * h, (j as f64 + 0.5) * h]);
            }
        }
        pts
    }

    fn from_flat(m: usize, values: &[f64]) -> Result<Self> {
        let nx = m * (m + 1);
        Self::new(m, values[..nx].to_vec(), values[nx..].to_vec())
    }
}

/// Coefficient values for every level `0..=target` of one sample.
#[derive(Clone, Debug)]
pub struct CoefficientSample {
    levels: Vec<LevelCoefficients>,
}

impl CoefficientSample {
    pub fn new(levels: Vec<LevelCoefficients>) -> Self {
        Self { levels }
    }

    /// `a == value` on all levels up to `target_level`.
    pub fn constant(target_level: usize, value: f64) -> Self {
        let levels = (0..=target_level)
            .map(|l| LevelCoefficients::constant(subdivisions(l), value))
            .collect();
        Self { levels }
    }

    pub fn target_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> &LevelCoefficients {
        &self.levels[l]
    }
}

/// Evaluates lognormal coefficient samples on the hierarchy, reusing a
/// per-level basis of KL eigenfunction values at the edge midpoints.
///
/// The basis for level `l` costs `O(n_edges * M * s)` to build and is built
/// once (levels above the memory budget fall back to direct Nyström
/// evaluation per sample). After that, one sample costs a dense
/// matrix-vector product plus `exp` per edge.
pub struct FieldSampler {
    kl: Arc<KLExpansion>,
    bases: Vec<OnceLock<Option<LevelBasis>>>,
    max_basis_bytes: usize,
}

struct LevelBasis {
    /// Row per edge midpoint, `s` entries each: `sqrt(theta_j) psi_j(x_p)`.
    rows: Vec<f64>,
    npoints: usize,
}

impl FieldSampler {
    pub fn new(kl: Arc<KLExpansion>, max_level: usize) -> Self {
        Self {
            kl,
            bases: (0..=max_level).map(|_| OnceLock::new()).collect(),
            max_basis_bytes: 256 << 20,
        }
    }

    pub fn with_basis_budget(mut self, bytes: usize) -> Self {
        self.max_basis_bytes = bytes;
        self
    }

    pub fn kl(&self) -> &Arc<KLExpansion> {
        &self.kl
    }

    pub fn dimension(&self) -> usize {
        self.kl.truncation()
    }

    pub fn max_level(&self) -> usize {
        self.bases.len() - 1
    }

    fn basis(&self, level: usize) -> Option<&LevelBasis> {
        let s = self.kl.truncation();
        self.bases[level]
            .get_or_init(|| {
                let m = subdivisions(level);
                let points = LevelCoefficients::edge_midpoints(m);
                if points.len() * s * 8 > self.max_basis_bytes {
                    return None;
                }
                let mut rows = vec![0.0; points.len() * s];
                for (p, &x) in points.iter().enumerate() {
                    self.kl.basis_into(x, &mut rows[p * s..(p + 1) * s]);
                }
                Some(LevelBasis {
                    rows,
                    npoints: points.len(),
                })
            })
            .as_ref()
    }

    fn level_values(&self, y: &[f64], level: usize) -> Result<LevelCoefficients> {
        let m = subdivisions(level);
        match self.basis(level) {
            Some(basis) => {
                let s = self.kl.truncation();
                if y.len() != s {
                    return Err(Error::DimensionMismatch {
                        expected: s,
                        got: y.len(),
                    });
                }
                let mut values = Vec::with_capacity(basis.npoints);
                for p in 0..basis.npoints {
                    let row = &basis.rows[p * s..(p + 1) * s];
                    let z: f64 = row.iter().zip(y).map(|(&b, &yj)| b * yj).sum();
                    values.push(z.exp());
                }
                LevelCoefficients::from_flat(m, &values)
            }
            None => {
                let points = LevelCoefficients::edge_midpoints(m);
                let values = self.kl.sample_coefficient(y, &points)?;
                LevelCoefficients::from_flat(m, &values)
            }
        }
    }

    /// Builds the coefficient sample for `y` on levels `0..=target_level`.
    pub fn sample(&self, y: &[f64], target_level: usize) -> Result<CoefficientSample> {
        let levels = (0..=target_level)
            .map(|l| self.level_values(y, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoefficientSample::new(levels))
    }
}
