//! Collocation/quadrature grids for the Nyström discretization.

use crate::error::{Error, Result};

/// Quadrature nodes and weights on `D = [0,1]^2`.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, k: usize) -> [f64; 2] {
        self.points[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }
}

/// Tensor-product midpoint rule with `n_q^2` nodes, all weights `1/n_q^2`.
/// The weights sum to `|D| = 1` exactly.
pub fn build_quadrature(n_q: usize) -> Result<QuadratureGrid> {
    if n_q < 2 {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs n_q >= 2, got {n_q}"
        )));
    }
    let m = n_q * n_q;
    let w = 1.0 / m as f64;
    let mut points = Vec::with_capacity(m);
    for i in 0..n_q {
        for j in 0..n_q {
            points.push([
                (i as f64 + 0.5) / n_q as f64,
                (j as f64 + 0.5) / n_q as f64,
            ]);
        }
    }
    Ok(QuadratureGrid {
        points,
        weights: vec![w; m],
    })
}
