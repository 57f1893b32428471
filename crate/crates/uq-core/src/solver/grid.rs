//! Nested uniform grids on the unit square.
//!
//! Level `l` has nodes `(i/m, j/m)` with `m = 4 * 2^l`, so the coarsest mesh
//! size is `h_0 = 1/4` and each refinement halves `h`. The node `(1/2, 1/2)`
//! exists on every level. Grids store the full `(m+1)^2` node set with the
//! homogeneous Dirichlet boundary kept at zero.

/// Refinement factor between consecutive levels.
pub const REFINEMENT_FACTOR: f64 = 2.0;

/// Grid points per side at the coarsest level (`h_0 = 1/4`).
pub const COARSEST_SUBDIVISIONS: usize = 4;

/// `m_l = 1/h_l = 4 * 2^l`.
pub fn subdivisions(level: usize) -> usize {
    COARSEST_SUBDIVISIONS << level
}

/// Mesh size `h_l = h_0 * 2^{-l}`.
pub fn mesh_size(level: usize) -> f64 {
    1.0 / subdivisions(level) as f64
}

/// Nodal values on one level, boundary included (and fixed at zero).
#[derive(Clone, Debug, PartialEq)]
pub struct NodeGrid {
    m: usize,
    values: Vec<f64>,
}

impl NodeGrid {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            values: vec![0.0; (m + 1) * (m + 1)],
        }
    }

    pub fn for_level(level: usize) -> Self {
        Self::zeros(subdivisions(level))
    }

    /// Fills the interior from a function of the node coordinates; the
    /// boundary stays zero.
    pub fn from_fn(m: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = Self::zeros(m);
        let h = 1.0 / m as f64;
        for i in 1..m {
            for j in 1..m {
                g.set(i, j, f(i as f64 * h, j as f64 * h));
            }
        }
        g
    }

    /// Subdivision count `m` (nodes run `0..=m` per side).
    pub fn subdivisions(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.m + 1) + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * (self.m + 1) + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * (self.m + 1) + j] += v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fill_interior(&mut self, v: f64) {
        for i in 1..self.m {
            for j in 1..self.m {
                self.set(i, j, v);
            }
        }
    }

    pub fn fill_zero(&mut self) {
        self.values.fill(0.0);
    }

    /// Euclidean norm over all nodes (boundary contributes zero).
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Value at the midpoint node `(1/2, 1/2)`.
    pub fn center_value(&self) -> f64 {
        self.at(self.m / 2, self.m / 2)
    }

    /// Adds `alpha * other` on the interior.
    pub fn axpy(&mut self, alpha: f64, other: &NodeGrid) {
        debug_assert_eq!(self.m, other.m);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }
}

/// The quantity of interest: the nodal value at `(1/2, 1/2)`.
pub fn qoi(grid: &NodeGrid) -> f64 {
    grid.center_value()
}
