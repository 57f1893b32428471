//! Matrix-free five-point discretization of `-div(a grad u) = f` and the
//! symmetric Gauss–Seidel smoother.

use crate::error::Result;
use crate::solver::coeff::LevelCoefficients;
use crate::solver::grid::NodeGrid;

/// The level operator: applies the stencil
///
/// ```text
/// (1/h^2) [ ax(i,j)   (u_ij - u_{i+1,j}) + ax(i-1,j) (u_ij - u_{i-1,j})
///         + ay(i,j)   (u_ij - u_{i,j+1}) + ay(i,j-1) (u_ij - u_{i,j-1}) ]
/// ```
///
/// on the interior; boundary rows are identity on zero values.
pub struct LevelOperator<'a> {
    coeffs: &'a LevelCoefficients,
    h2_inv: f64,
}

impl<'a> LevelOperator<'a> {
    pub fn new(coeffs: &'a LevelCoefficients) -> Result<Self> {
        let m = coeffs.subdivisions() as f64;
        Ok(Self {
            coeffs,
            h2_inv: m * m,
        })
    }

    pub fn subdivisions(&self) -> usize {
        self.coeffs.subdivisions()
    }

    #[inline]
    fn stencil(&self, i: usize, j: usize) -> (f64, f64, f64, f64, f64) {
        let ae = self.coeffs.ax(i, j);
        let aw = self.coeffs.ax(i - 1, j);
        let an = self.coeffs.ay(i, j);
        let as_ = self.coeffs.ay(i, j - 1);
        (ae, aw, an, as_, ae + aw + an + as_)
    }

    /// `out = A u` on the interior; `work` grows by one unit per point.
    pub fn apply(&self, u: &NodeGrid, out: &mut NodeGrid, work: &mut u64) {
        let m = self.subdivisions();
        for i in 1..m {
            for j in 1..m {
                let (ae, aw, an, as_, diag) = self.stencil(i, j);
                let v = diag * u.at(i, j)
                    - ae * u.at(i + 1, j)
                    - aw * u.at(i - 1, j)
                    - an * u.at(i, j + 1)
                    - as_ * u.at(i, j - 1);
                out.set(i, j, self.h2_inv * v);
            }
        }
        *work += ((m - 1) * (m - 1)) as u64;
    }

    /// `out = b - A u`.
    pub fn residual(&self, u: &NodeGrid, b: &NodeGrid, out: &mut NodeGrid, work: &mut u64) {
        let m = self.subdivisions();
        for i in 1..m {
            for j in 1..m {
                let (ae, aw, an, as_, diag) = self.stencil(i, j);
                let v = diag * u.at(i, j)
                    - ae * u.at(i + 1, j)
                    - aw * u.at(i - 1, j)
                    - an * u.at(i, j + 1)
                    - as_ * u.at(i, j - 1);
                out.set(i, j, b.at(i, j) - self.h2_inv * v);
            }
        }
        *work += ((m - 1) * (m - 1)) as u64;
    }

    pub fn residual_norm(&self, u: &NodeGrid, b: &NodeGrid, work: &mut u64) -> f64 {
        let m = self.subdivisions();
        let mut sum = 0.0;
        for i in 1..m {
            for j in 1..m {
                let (ae, aw, an, as_, diag) = self.stencil(i, j);
                let v = diag * u.at(i, j)
                    - ae * u.at(i + 1, j)
                    - aw * u.at(i - 1, j)
                    - an * u.at(i, j + 1)
                    - as_ * u.at(i, j - 1);
                let r = b.at(i, j) - self.h2_inv * v;
                sum += r * r;
            }
        }
        *work += ((m - 1) * (m - 1)) as u64;
        sum.sqrt()
    }

    #[inline]
    fn relax_point(&self, u: &mut NodeGrid, b: &NodeGrid, i: usize, j: usize) {
        let (ae, aw, an, as_, diag) = self.stencil(i, j);
        let nb = ae * u.at(i + 1, j)
            + aw * u.at(i - 1, j)
            + an * u.at(i, j + 1)
            + as_ * u.at(i, j - 1);
        u.set(i, j, (b.at(i, j) / self.h2_inv + nb) / diag);
    }

    /// One symmetric Gauss–Seidel sweep: a forward lexicographic pass
    /// followed by a backward pass. Two work units per interior point.
    pub fn sgs_sweep(&self, u: &mut NodeGrid, b: &NodeGrid, work: &mut u64) {
        let m = self.subdivisions();
        for i in 1..m {
            for j in 1..m {
                self.relax_point(u, b, i, j);
            }
        }
        for i in (1..m).rev() {
            for j in (1..m).rev() {
                self.relax_point(u, b, i, j);
            }
        }
        *work += 2 * ((m - 1) * (m - 1)) as u64;
    }
}
