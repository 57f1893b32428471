//! Intergrid transfer operators: full-weighting restriction and bilinear
//! prolongation. They form an adjoint pair, `restrict = (1/4) prolongate^T`
//! in the discrete inner product.

use crate::solver::grid::NodeGrid;

/// Full-weighting restriction (9-point stencil, weights 1/4, 1/8, 1/16) from
/// a fine grid with `2 m` subdivisions onto a coarse grid with `m`.
pub fn restrict_full_weighting(fine: &NodeGrid) -> NodeGrid {
    let mf = fine.subdivisions();
    debug_assert_eq!(mf % 2, 0);
    let mc = mf / 2;
    let mut coarse = NodeGrid::zeros(mc);
    for ic in 1..mc {
        for jc in 1..mc {
            let i = 2 * ic;
            let j = 2 * jc;
            let v = 0.25 * fine.at(i, j)
                + 0.125
                    * (fine.at(i + 1, j)
                        + fine.at(i - 1, j)
                        + fine.at(i, j + 1)
                        + fine.at(i, j - 1))
                + 0.0625
                    * (fine.at(i + 1, j + 1)
                        + fine.at(i + 1, j - 1)
                        + fine.at(i - 1, j + 1)
                        + fine.at(i - 1, j - 1));
            coarse.set(ic, jc, v);
        }
    }
    coarse
}

/// Bilinear prolongation from a coarse grid with `m` subdivisions into the
/// fine grid with `2 m` (overwrites `fine`).
pub fn prolongate_bilinear(coarse: &NodeGrid, fine: &mut NodeGrid) {
    let mc = coarse.subdivisions();
    let mf = fine.subdivisions();
    debug_assert_eq!(mf, 2 * mc);
    fine.fill_zero();
    for ic in 0..=mc {
        for jc in 0..=mc {
            let v = coarse.at(ic, jc);
            if v != 0.0 {
                fine.add(2 * ic, 2 * jc, v);
            }
        }
    }
    for i in (1..mf).step_by(2) {
        for j in (0..=mf).step_by(2) {
            let v = 0.5 * (fine.at(i - 1, j) + fine.at(i + 1, j));
            fine.set(i, j, v);
        }
    }
    for i in 0..=mf {
        for j in (1..mf).step_by(2) {
            let v = 0.5 * (fine.at(i, j - 1) + fine.at(i, j + 1));
            fine.set(i, j, v);
        }
    }
    // Dirichlet boundary stays exactly zero.
    for k in 0..=mf {
        fine.set(0, k, 0.0);
        fine.set(mf, k, 0.0);
        fine.set(k, 0, 0.0);
        fine.set(k, mf, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::CounterStream;

    #[test]
    fn restriction_preserves_constants_and_zero() {
        let mut fine = NodeGrid::zeros(8);
        let coarse = restrict_full_weighting(&fine);
        assert!(coarse.values().iter().all(|&v| v == 0.0));
        fine.fill_interior(3.0);
        let coarse = restrict_full_weighting(&fine);
        // Interior coarse nodes away from the boundary see the full constant.
        assert!((coarse.at(2, 2) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn restriction_of_unit_spike() {
        // A unit spike at a fine node that coincides with a coarse node
        // contributes the center weight 1/4 there and nothing elsewhere.
        let mut fine = NodeGrid::zeros(8);
        fine.set(4, 4, 1.0);
        let coarse = restrict_full_weighting(&fine);
        assert_eq!(coarse.at(2, 2), 0.25);
        assert_eq!(coarse.at(1, 2), 0.0);
        // An odd-odd fine node is a corner of four coarse stencils.
        let mut fine = NodeGrid::zeros(8);
        fine.set(3, 3, 1.0);
        let coarse = restrict_full_weighting(&fine);
        assert_eq!(coarse.at(1, 1), 0.0625);
        assert_eq!(coarse.at(2, 2), 0.0625);
        assert_eq!(coarse.at(1, 2), 0.0625);
        assert_eq!(coarse.at(2, 1), 0.0625);
    }

    #[test]
    fn prolongation_preserves_constants_inside() {
        let mut coarse = NodeGrid::zeros(4);
        coarse.fill_interior(2.0);
        let mut fine = NodeGrid::zeros(8);
        prolongate_bilinear(&coarse, &mut fine);
        // Fine nodes well inside the domain read the constant.
        assert_eq!(fine.at(4, 4), 2.0);
        assert_eq!(fine.at(3, 4), 2.0);
        assert_eq!(fine.at(3, 3), 2.0);
        // Boundary remains zero.
        assert_eq!(fine.at(0, 4), 0.0);
    }

    #[test]
    fn transfer_pair_is_adjoint() {
        // <P e, r>_fine = 4 <e, R r>_coarse for random e, r.
        let stream = CounterStream::new(&[21]);
        let mc = 8;
        let mf = 16;
        let mut e = NodeGrid::zeros(mc);
        for i in 1..mc {
            for j in 1..mc {
                e.set(i, j, stream.uniform((i * 31 + j) as u64) - 0.5);
            }
        }
        let mut r = NodeGrid::zeros(mf);
        for i in 1..mf {
            for j in 1..mf {
                r.set(i, j, stream.uniform((1000 + i * 37 + j) as u64) - 0.5);
            }
        }
        let mut pe = NodeGrid::zeros(mf);
        prolongate_bilinear(&e, &mut pe);
        let lhs: f64 = pe
            .values()
            .iter()
            .zip(r.values())
            .map(|(&a, &b)| a * b)
            .sum();
        let rr = restrict_full_weighting(&r);
        let rhs: f64 = e
            .values()
            .iter()
            .zip(rr.values())
            .map(|(&a, &b)| a * b)
            .sum();
        assert!((lhs - 4.0 * rhs).abs() <= 1e-12, "{lhs} vs 4*{rhs}");
    }
}
