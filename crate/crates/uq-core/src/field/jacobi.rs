//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Accuracy-first and dependency-free; for the matrix sizes that arise here
//! (a few hundred up to ~1600) the O(n^3)-per-sweep cost is acceptable.

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix. `vectors` is row-major with row `j`
/// holding eigenvector `j` (unit Euclidean norm).
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

/// Diagonalizes the symmetric `n x n` matrix stored row-major in `a`
/// (destroyed in the process). Converges when the off-diagonal Frobenius
/// norm drops below `rel_tol` times the initial Frobenius norm of `a`.
pub fn jacobi_eigen(a: &mut [f64], n: usize, max_sweeps: usize, rel_tol: f64) -> Result<SymEigen> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: vec![],
            sweeps: 0,
        });
    }

    let norm_f: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off_tol = rel_tol * norm_f;
    // Rotations below this size cannot move the off-norm visibly; skipping
    // them keeps late sweeps cheap.
    let skip_tol = off_tol / (n as f64 * n as f64);

    // vectors starts as the identity; row j accumulates eigenvector j.
    let mut vectors = vec![0.0; n * n];
    for j in 0..n {
        vectors[j * n + j] = 1.0;
    }

    if norm_f == 0.0 {
        return Ok(SymEigen {
            values: vec![0.0; n],
            vectors,
            sweeps: 0,
        });
    }

    for sweep in 0..max_sweeps {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off_sq).sqrt() <= off_tol {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok(SymEigen {
                values,
                vectors,
                sweeps: sweep,
            });
        }

        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= skip_tol {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    // Avoid overflow of theta^2; the rotation is tiny anyway.
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                // Rotate rows p and q, then mirror into the columns so the
                // matrix stays symmetric.
                let (head, tail) = a.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let g = row_p[j];
                    let h = row_q[j];
                    row_p[j] = g - s * (h + g * tau);
                    row_q[j] = h + s * (g - h * tau);
                }
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    a[j * n + p] = a[p * n + j];
                    a[j * n + q] = a[q * n + j];
                }

                // Same rotation on the accumulated eigenvector rows.
                let (vhead, vtail) = vectors.split_at_mut(q * n);
                let vp = &mut vhead[p * n..p * n + n];
                let vq = &mut vtail[..n];
                for j in 0..n {
                    let g = vp[j];
                    let h = vq[j];
                    vp[j] = g - s * (h + g * tau);
                    vq[j] = h + s * (g - h * tau);
                }
            }
        }
    }

    let mut off_sq = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            off_sq += a[p * n + q] * a[p * n + q];
        }
    }
    let off_norm = (2.0 * off_sq).sqrt();
    if off_norm <= off_tol {
        let values = (0..n).map(|i| a[i * n + i]).collect();
        return Ok(SymEigen {
            values,
            vectors,
            sweeps: max_sweeps,
        });
    }
    Err(Error::EigenNonConvergence {
        sweeps: max_sweeps,
        off_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::CounterStream;

    fn check_decomposition(a_orig: &[f64], n: usize, eig: &SymEigen, tol: f64) {
        // A v_j = lambda_j v_j
        for j in 0..n {
            let v = &eig.vectors[j * n..(j + 1) * n];
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a_orig[i * n + k] * v[k]).sum();
                assert!(
                    (av - eig.values[j] * v[i]).abs() < tol,
                    "residual at ({i},{j})"
                );
            }
        }
        // Orthonormal rows.
        for i in 0..n {
            for j in i..n {
                let dot: f64 = (0..n)
                    .map(|k| eig.vectors[i * n + k] * eig.vectors[j * n + k])
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = vec![2.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, -1.0];
        let orig = a.clone();
        let eig = jacobi_eigen(&mut a, 3, 30, 1e-14).unwrap();
        check_decomposition(&orig, 3, &eig, 1e-13);
        let mut vals = eig.values.clone();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(vals, vec![-1.0, 2.0, 5.0]);
    }

    #[test]
    fn known_three_by_three() {
        // Eigenvalues of [[2,0,0],[0,3,4],[0,4,9]] are 2, 1, 11.
        let mut a = vec![2.0, 0.0, 0.0, 0.0, 3.0, 4.0, 0.0, 4.0, 9.0];
        let orig = a.clone();
        let eig = jacobi_eigen(&mut a, 3, 30, 1e-14).unwrap();
        check_decomposition(&orig, 3, &eig, 1e-12);
        let mut vals = eig.values.clone();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in vals.iter().zip([1.0, 2.0, 11.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn random_symmetric_matrix() {
        let n = 40;
        let stream = CounterStream::new(&[314]);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = stream.uniform((i * n + j) as u64) - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let orig = a.clone();
        let eig = jacobi_eigen(&mut a, n, 30, 1e-13).unwrap();
        check_decomposition(&orig, n, &eig, 1e-10);
        // Trace is preserved.
        let trace: f64 = (0..n).map(|i| orig[i * n + i]).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() < 1e-11);
    }
}
