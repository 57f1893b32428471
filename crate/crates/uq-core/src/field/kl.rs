//! Truncated Karhunen–Loève expansion via the Nyström method.
//!
//! The covariance operator eigenproblem is discretized on a quadrature grid,
//! symmetrized as `B = sqrt(W) Sigma sqrt(W)`, and diagonalized with Jacobi
//! rotations. Eigenpairs are kept in descending order; the truncation index
//! is the smallest `s` whose eigenvalues capture the requested fraction of
//! the total variability (the discrete trace). Field values away from the
//! collocation nodes come from the Nyström interpolation formula.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::jacobi::jacobi_eigen;
use crate::field::matern::CovarianceKernel;
use crate::field::quadrature::QuadratureGrid;

/// Eigenvalues more negative than this fail the build; values in
/// `(NEG_EIGENVALUE_TOL, 0)` are floating-point noise and are clamped to 0.
pub const NEG_EIGENVALUE_TOL: f64 = -1e-12;

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Truncated KL expansion of a mean-zero Gaussian field.
pub struct KLExpansion {
    kernel: Arc<dyn CovarianceKernel>,
    grid: QuadratureGrid,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<f64>,
    truncation: usize,
    captured_fraction: f64,
}

impl KLExpansion {
    /// Number of retained terms `s`.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// All `M` discrete eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Nodal eigenvector `j` (the orthonormal `Psi*_j`).
    pub fn eigenvector(&self, j: usize) -> &[f64] {
        let m = self.grid.len();
        &self.eigenvectors[j * m..(j + 1) * m]
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Arc<dyn CovarianceKernel> {
        &self.kernel
    }

    pub fn captured_fraction(&self) -> f64 {
        self.captured_fraction
    }

    /// Nyström interpolation of eigenfunction `j` at an arbitrary point.
    pub fn eigenfunction(&self, j: usize, x: [f64; 2]) -> f64 {
        let theta = self.eigenvalues[j];
        assert!(theta > 0.0, "eigenfunction of zero eigenvalue");
        let psi = self.eigenvector(j);
        let mut sum = 0.0;
        for (q, (&w, &p)) in self
            .grid
            .weights()
            .iter()
            .zip(self.grid.points())
            .enumerate()
        {
            sum += w.sqrt() * psi[q] * self.kernel.eval(x, p);
        }
        sum / theta
    }

    fn check_dimension(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.truncation {
            return Err(Error::DimensionMismatch {
                expected: self.truncation,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Per-node sample weights `g_q = sqrt(w_q) * sum_j (y_j / sqrt(theta_j)) Psi*_{j,q}`,
    /// so that `z(x) = sum_q C(x, x_q) g_q`.
    pub fn node_weights(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(y)?;
        let m = self.grid.len();
        let mut g = vec![0.0; m];
        for (j, &yj) in y.iter().enumerate() {
            let scale = yj / self.eigenvalues[j].sqrt();
            if scale == 0.0 {
                continue;
            }
            let psi = self.eigenvector(j);
            for (gq, &pq) in g.iter_mut().zip(psi) {
                *gq += scale * pq;
            }
        }
        for (gq, &w) in g.iter_mut().zip(self.grid.weights()) {
            *gq *= w.sqrt();
        }
        Ok(g)
    }

    fn field_from_node_weights(&self, g: &[f64], x: [f64; 2]) -> f64 {
        let mut z = 0.0;
        for (&gq, &p) in g.iter().zip(self.grid.points()) {
            z += gq * self.kernel.eval(x, p);
        }
        z
    }

    /// Evaluates the truncated expansion `z_s(x, y)`.
    pub fn evaluate(&self, y: &[f64], x: [f64; 2]) -> Result<f64> {
        let g = self.node_weights(y)?;
        Ok(self.field_from_node_weights(&g, x))
    }

    /// Lognormal coefficient samples `a = exp(z_s)` at a list of points.
    pub fn sample_coefficient(&self, y: &[f64], points: &[[f64; 2]]) -> Result<Vec<f64>> {
        let g = self.node_weights(y)?;
        Ok(points
            .iter()
            .map(|&x| self.field_from_node_weights(&g, x).exp())
            .collect())
    }

    /// Writes `sqrt(theta_j) * psi_j(x)` for `j < s` into `out`; one row of a
    /// point-evaluation basis, so that `z(x) = dot(out, y)`.
    pub fn basis_into(&self, x: [f64; 2], out: &mut [f64]) {
        assert_eq!(out.len(), self.truncation);
        let m = self.grid.len();
        let mut c = vec![0.0; m];
        for (q, (&w, &p)) in self
            .grid
            .weights()
            .iter()
            .zip(self.grid.points())
            .enumerate()
        {
            c[q] = w.sqrt() * self.kernel.eval(x, p);
        }
        for (j, o) in out.iter_mut().enumerate() {
            let psi = self.eigenvector(j);
            let dot: f64 = psi.iter().zip(&c).map(|(&a, &b)| a * b).sum();
            *o = dot / self.eigenvalues[j].sqrt();
        }
    }

    /// Serializes the eigendecomposition (with a caller-supplied key that
    /// identifies kernel, grid and fraction) so later runs can skip the
    /// rebuild. Format documented in `docs/formats.md`.
    pub fn save_cache<W: Write>(&self, mut w: W, key: &str) -> Result<()> {
        w.write_all(b"UQKL1\n")?;
        let kb = key.as_bytes();
        w.write_all(&(kb.len() as u32).to_le_bytes())?;
        w.write_all(kb)?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&(self.truncation as u64).to_le_bytes())?;
        w.write_all(&self.captured_fraction.to_le_bytes())?;
        for v in &self.eigenvalues {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.eigenvectors {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Restores a cached eigendecomposition. The kernel and grid must be the
    /// ones the cache was built from; the key is checked to catch mixups.
    pub fn load_cache<R: Read>(
        mut r: R,
        key: &str,
        kernel: Arc<dyn CovarianceKernel>,
        grid: QuadratureGrid,
    ) -> Result<Self> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != b"UQKL1\n" {
            return Err(Error::InvalidParameter("not a KL cache file".into()));
        }
        let mut len4 = [0u8; 4];
        r.read_exact(&mut len4)?;
        let mut kb = vec![0u8; u32::from_le_bytes(len4) as usize];
        r.read_exact(&mut kb)?;
        let stored = String::from_utf8(kb)
            .map_err(|_| Error::InvalidParameter("corrupt cache key".into()))?;
        if stored != key {
            return Err(Error::InvalidParameter(format!(
                "cache key mismatch: stored {stored:?}, expected {key:?}"
            )));
        }
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let m = u64::from_le_bytes(u) as usize;
        if m != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: m,
            });
        }
        r.read_exact(&mut u)?;
        let truncation = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let captured_fraction = f64::from_le_bytes(u);
        let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        };
        let eigenvalues = read_f64s(m)?;
        let eigenvectors = read_f64s(m * m)?;
        Ok(Self {
            kernel,
            grid,
            eigenvalues,
            eigenvectors,
            truncation,
            captured_fraction,
        })
    }
}

/// Builds the truncated KL expansion: assembles `B = sqrt(W) Sigma sqrt(W)`,
/// diagonalizes it, sorts eigenpairs descending, clamps negative noise and
/// truncates at the requested captured-variance fraction.
pub fn build_kl(
    kernel: Arc<dyn CovarianceKernel>,
    grid: QuadratureGrid,
    fraction: f64,
) -> Result<KLExpansion> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "captured-variance fraction must be in (0, 1], got {fraction}"
        )));
    }
    let m = grid.len();
    let mut b = vec![0.0; m * m];
    {
        let pts = grid.points();
        let wts = grid.weights();
        for k in 0..m {
            let wk = wts[k].sqrt();
            for q in k..m {
                let v = wk * wts[q].sqrt() * kernel.eval(pts[k], pts[q]);
                b[k * m + q] = v;
                b[q * m + k] = v;
            }
            if !b[k * m + k].is_finite() {
                return Err(Error::InvalidParameter(
                    "covariance matrix has non-finite entries".into(),
                ));
            }
        }
    }

    let eig = jacobi_eigen(&mut b, m, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.values[j].partial_cmp(&eig.values[i]).unwrap());

    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = vec![0.0; m * m];
    for (rank, &idx) in order.iter().enumerate() {
        let mut v = eig.values[idx];
        if v < 0.0 {
            if v < NEG_EIGENVALUE_TOL {
                return Err(Error::NotPositiveSemiDefinite { value: v });
            }
            v = 0.0;
        }
        eigenvalues.push(v);
        eigenvectors[rank * m..(rank + 1) * m]
            .copy_from_slice(&eig.vectors[idx * m..(idx + 1) * m]);
    }

    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "covariance operator has zero trace".into(),
        ));
    }
    let target = fraction * total;
    let mut cum = 0.0;
    let mut truncation = m;
    for (j, &v) in eigenvalues.iter().enumerate() {
        cum += v;
        if cum >= target {
            truncation = j + 1;
            break;
        }
    }
    let captured: f64 = eigenvalues[..truncation].iter().sum::<f64>() / total;

    Ok(KLExpansion {
        kernel,
        grid,
        eigenvalues,
        eigenvectors,
        truncation,
        captured_fraction: captured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::matern::MaternParams;
    use crate::field::quadrature::build_quadrature;
    use crate::normal::inv_normal_cdf;
    use crate::streams::CounterStream;

    /// Constant kernel C = 1: rank-1 operator with single eigenvalue 1.
    struct ConstantKernel;
    impl CovarianceKernel for ConstantKernel {
        fn eval(&self, _x: [f64; 2], _y: [f64; 2]) -> f64 {
            1.0
        }
    }

    #[test]
    fn constant_kernel_is_rank_one() {
        let grid = build_quadrature(4).unwrap();
        let kl = build_kl(Arc::new(ConstantKernel), grid, 0.998).unwrap();
        assert_eq!(kl.truncation(), 1);
        assert!((kl.eigenvalues()[0] - 1.0).abs() < 1e-12);
        for &v in &kl.eigenvalues()[1..] {
            assert!(v.abs() < 1e-12);
        }
        // The single eigenfunction is constant 1, so z(x) = 2 everywhere
        // for y = (2,).
        let z = kl.evaluate(&[2.0], [0.37, 0.81]).unwrap();
        assert!((z - 2.0).abs() < 1e-10);
    }

    #[test]
    fn trace_identity_and_ordering() {
        for &(lc, nu) in &[(0.1, 0.5), (0.3, 1.0), (0.5, 2.0)] {
            let kernel = Arc::new(MaternParams::new(lc, nu).unwrap());
            let grid = build_quadrature(8).unwrap();
            let kl = build_kl(kernel, grid, 0.998).unwrap();
            let total: f64 = kl.eigenvalues().iter().sum();
            assert!(
                (total - 1.0).abs() <= 1e-10,
                "trace {total} for lc={lc} nu={nu}"
            );
            for w in kl.eigenvalues().windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(*kl.eigenvalues().last().unwrap() >= 0.0);
            assert!(kl.captured_fraction() >= 0.998);
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let kernel = Arc::new(MaternParams::new(0.3, 0.5).unwrap());
        let grid = build_quadrature(7).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let m = kl.grid().len();
        for i in 0..m {
            for j in i..m {
                let dot: f64 = kl
                    .eigenvector(i)
                    .iter()
                    .zip(kl.eigenvector(j))
                    .map(|(&a, &b)| a * b)
                    .sum();
                if i == j {
                    assert!((dot - 1.0).abs() <= 1e-10);
                } else {
                    assert!(dot.abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn nystrom_is_consistent_at_nodes() {
        let kernel = Arc::new(MaternParams::new(0.5, 1.5).unwrap());
        let grid = build_quadrature(6).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        for j in 0..kl.truncation() {
            for k in 0..kl.grid().len() {
                let x = kl.grid().point(k);
                let via_interp = kl.eigenfunction(j, x);
                let nodal = kl.eigenvector(j)[k] / kl.grid().weight(k).sqrt();
                assert!(
                    (via_interp - nodal).abs() < 1e-8,
                    "j={j} k={k}: {via_interp} vs {nodal}"
                );
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_field_and_unit_coefficient() {
        let kernel = Arc::new(MaternParams::new(0.5, 2.0).unwrap());
        let grid = build_quadrature(5).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let y = vec![0.0; kl.truncation()];
        assert_eq!(kl.evaluate(&y, [0.5, 0.5]).unwrap(), 0.0);
        let a = kl
            .sample_coefficient(&y, &[[0.1, 0.2], [0.9, 0.4]])
            .unwrap();
        assert!(a.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn field_is_linear_in_y() {
        let kernel = Arc::new(MaternParams::new(0.3, 1.0).unwrap());
        let grid = build_quadrature(5).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let s = kl.truncation();
        let stream = CounterStream::new(&[5]);
        let y: Vec<f64> = (0..s).map(|i| stream.uniform(i as u64) - 0.5).collect();
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let x = [0.73, 0.21];
        let z1 = kl.evaluate(&y, x).unwrap();
        let z2 = kl.evaluate(&y2, x).unwrap();
        assert!((z2 - 2.0 * z1).abs() < 1e-14 * z1.abs().max(1.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let kernel = Arc::new(MaternParams::new(0.3, 1.0).unwrap());
        let grid = build_quadrature(4).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let bad = vec![0.0; kl.truncation() + 1];
        assert!(matches!(
            kl.evaluate(&bad, [0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coefficient_positive_for_random_draws() {
        let kernel = Arc::new(MaternParams::new(0.2, 0.5).unwrap());
        let grid = build_quadrature(5).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let s = kl.truncation();
        let stream = CounterStream::new(&[99]);
        let pts = [[0.25, 0.5], [0.5, 0.75]];
        let mut idx = 0u64;
        for _ in 0..200 {
            let y: Vec<f64> = (0..s)
                .map(|_| {
                    idx += 1;
                    inv_normal_cdf(stream.uniform(idx))
                })
                .collect();
            for a in kl.sample_coefficient(&y, &pts).unwrap() {
                assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn empirical_covariance_matches_spectrum() {
        // Sample covariance of z over many draws against the truncated
        // spectral covariance at two collocation nodes.
        let kernel = Arc::new(MaternParams::new(0.4, 1.0).unwrap());
        let grid = build_quadrature(4).unwrap();
        let kl = build_kl(kernel, grid, 0.998).unwrap();
        let s = kl.truncation();
        let xa = kl.grid().point(3);
        let xb = kl.grid().point(12);
        let expected: f64 = (0..s)
            .map(|j| {
                kl.eigenvalues()[j] * kl.eigenfunction(j, xa) * kl.eigenfunction(j, xb)
            })
            .sum();
        let n = 100_000;
        let stream = CounterStream::new(&[2024]);
        let mut sum_ab = 0.0;
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        let mut sum_a2 = 0.0;
        let mut sum_b2 = 0.0;
        let mut y = vec![0.0; s];
        for i in 0..n {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = inv_normal_cdf(stream.uniform((i * s + j) as u64));
            }
            let g = kl.node_weights(&y).unwrap();
            let za = kl.field_from_node_weights(&g, xa);
            let zb = kl.field_from_node_weights(&g, xb);
            sum_ab += za * zb;
            sum_a += za;
            sum_b += zb;
            sum_a2 += za * za;
            sum_b2 += zb * zb;
        }
        let nf = n as f64;
        let cov = sum_ab / nf - (sum_a / nf) * (sum_b / nf);
        let va = sum_a2 / nf - (sum_a / nf).powi(2);
        let vb = sum_b2 / nf - (sum_b / nf).powi(2);
        // Standard error of a sample covariance, normal case.
        let se = ((va * vb + cov * cov) / nf).sqrt();
        assert!(
            (cov - expected).abs() <= 3.0 * se,
            "cov {cov} vs {expected} (3 se = {:.2e})",
            3.0 * se
        );
    }

    #[test]
    fn smoother_kernels_decay_faster_and_truncate_earlier() {
        let grid = build_quadrature(12).unwrap();
        let rough = build_kl(
            Arc::new(MaternParams::new(0.3, 0.5).unwrap()),
            grid.clone(),
            0.998,
        )
        .unwrap();
        let smooth = build_kl(
            Arc::new(MaternParams::new(0.3, 2.0).unwrap()),
            grid,
            0.998,
        )
        .unwrap();
        assert!(smooth.truncation() <= rough.truncation());
        // Fitted log-decay slope over a mid-range index window.
        let slope = |kl: &KLExpansion| {
            let lo = 4;
            let hi = 50.min(kl.eigenvalues().len());
            let xs: Vec<f64> = (lo..hi).map(|j| (j as f64 + 1.0).ln()).collect();
            let ys: Vec<f64> = kl.eigenvalues()[lo..hi].iter().map(|v| v.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        };
        assert!(slope(&smooth) < slope(&rough));
    }

    #[test]
    fn cache_round_trip() {
        let kernel = Arc::new(MaternParams::new(0.5, 1.0).unwrap());
        let grid = build_quadrature(4).unwrap();
        let kl = build_kl(kernel.clone(), grid.clone(), 0.998).unwrap();
        let mut buf = Vec::new();
        kl.save_cache(&mut buf, "lc=0.5,nu=1,nq=4,frac=0.998")
            .unwrap();
        let restored = KLExpansion::load_cache(
            buf.as_slice(),
            "lc=0.5,nu=1,nq=4,frac=0.998",
            kernel.clone(),
            grid.clone(),
        )
        .unwrap();
        assert_eq!(restored.truncation(), kl.truncation());
        assert_eq!(restored.eigenvalues(), kl.eigenvalues());
        assert!(KLExpansion::load_cache(buf.as_slice(), "other", kernel, grid).is_err());
    }
}
