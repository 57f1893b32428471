//! Rank-1 lattice sequences with random shifting.
//!
//! Points are enumerated in radical-inverse order: point `n` is
//! `{ phi2(n) * z }` where `phi2` reverses the `m` base-2 digits of `n`.
//! With this ordering every prefix of size `2^p`, `p <= m`, is exactly the
//! rank-1 lattice `{ n z / 2^p mod 1 }` as a set, so the sample count can be
//! doubled without discarding earlier evaluations.
//!
//! A fixed generating vector (1024 dimensions, up to 2^20 points, odd
//! components) ships with the crate as a plain-text data file; see
//! `docs/formats.md` in the repository root for the file layout.

use crate::error::{Error, Result};
use crate::streams::{tag, CounterStream};

/// Embedded default generating-vector table.
const DEFAULT_TABLE: &str = include_str!("../data/lattice_m20_s1024.txt");

/// An extensible rank-1 lattice rule.
#[derive(Clone, Debug)]
pub struct LatticeRule {
    z: Vec<u64>,
    max_log2_points: u32,
}

impl LatticeRule {
    /// Builds a rule from a generating vector. Every component must be odd
    /// and in `[1, 2^m)`; `m` must lie in `[1, 31]`.
    pub fn new(z: Vec<u64>, max_log2_points: u32) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidParameter(
                "generating vector must have at least one component".into(),
            ));
        }
        if !(1..=31).contains(&max_log2_points) {
            return Err(Error::InvalidParameter(format!(
                "max_log2_points must be in [1, 31], got {max_log2_points}"
            )));
        }
        let limit = 1u64 << max_log2_points;
        for (j, &zj) in z.iter().enumerate() {
            if zj % 2 == 0 || zj == 0 || zj >= limit {
                return Err(Error::InvalidParameter(format!(
                    "component z[{j}] = {zj} must be odd and in [1, 2^{max_log2_points})"
                )));
            }
        }
        Ok(Self {
            z,
            max_log2_points,
        })
    }

    /// Parses the plain-text table format: first line `m`, second line the
    /// table dimension, then one component per line. The rule keeps the
    /// first `dimension` components.
    pub fn from_table_str(text: &str, dimension: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse = |line: Option<&str>, what: &str| -> Result<u64> {
            line.ok_or_else(|| Error::InvalidParameter(format!("table truncated at {what}")))?
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParameter(format!("bad {what}: {e}")))
        };
        let m = parse(lines.next(), "max_log2_points")? as u32;
        let table_dim = parse(lines.next(), "table dimension")? as usize;
        if dimension == 0 || dimension > table_dim {
            return Err(Error::InvalidParameter(format!(
                "requested dimension {dimension} outside table range [1, {table_dim}]"
            )));
        }
        let mut z = Vec::with_capacity(dimension);
        for j in 0..dimension {
            z.push(parse(lines.next(), &format!("component {j}"))?);
        }
        Self::new(z, m)
    }

    /// The generating vector shipped with the crate, truncated to
    /// `dimension` components (at most 1024, up to 2^20 points).
    pub fn embedded(dimension: usize) -> Result<Self> {
        Self::from_table_str(DEFAULT_TABLE, dimension)
    }

    pub fn from_file(path: &std::path::Path, dimension: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&text, dimension)
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn max_log2_points(&self) -> u32 {
        self.max_log2_points
    }

    pub fn max_points(&self) -> u64 {
        1u64 << self.max_log2_points
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n >= self.max_points() {
            return Err(Error::PointIndexOutOfRange {
                index: n,
                max_log2: self.max_log2_points,
            });
        }
        Ok(())
    }

    /// Exact numerators of point `n`: component `j` equals
    /// `numerator[j] / 2^m`.
    pub fn point_numerators(&self, n: u64) -> Result<Vec<u64>> {
        self.check_index(n)?;
        let mask = self.max_points() - 1;
        let rev = reverse_bits(n, self.max_log2_points);
        Ok(self
            .z
            .iter()
            .map(|&zj| rev.wrapping_mul(zj) & mask)
            .collect())
    }

    /// Writes point `n` of the sequence into `out`.
    pub fn point_into(&self, n: u64, out: &mut [f64]) -> Result<()> {
        self.check_index(n)?;
        if out.len() != self.z.len() {
            return Err(Error::DimensionMismatch {
                expected: self.z.len(),
                got: out.len(),
            });
        }
        let mask = self.max_points() - 1;
        let scale = 1.0 / self.max_points() as f64;
        let rev = reverse_bits(n, self.max_log2_points);
        for (o, &zj) in out.iter_mut().zip(&self.z) {
            *o = (rev.wrapping_mul(zj) & mask) as f64 * scale;
        }
        Ok(())
    }

    pub fn point(&self, n: u64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.z.len()];
        self.point_into(n, &mut out)?;
        Ok(out)
    }

    /// Point `n` shifted by `shift` modulo 1, componentwise.
    pub fn shifted_point_into(&self, n: u64, shift: &[f64], out: &mut [f64]) -> Result<()> {
        if shift.len() != self.z.len() {
            return Err(Error::DimensionMismatch {
                expected: self.z.len(),
                got: shift.len(),
            });
        }
        self.point_into(n, out)?;
        for (o, &d) in out.iter_mut().zip(shift) {
            *o = fract_unit(*o + d);
        }
        Ok(())
    }

    pub fn shifted_point(&self, n: u64, shift: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.z.len()];
        self.shifted_point_into(n, shift, &mut out)?;
        Ok(out)
    }
}

/// Fractional part for sums of two values in `[0, 1)`.
#[inline]
fn fract_unit(x: f64) -> f64 {
    let mut v = x;
    if v >= 1.0 {
        v -= 1.0;
    }
    if v >= 1.0 {
        v = 0.0;
    }
    v
}

/// Reverses the lowest `bits` bits of `n`.
#[inline]
fn reverse_bits(n: u64, bits: u32) -> u64 {
    n.reverse_bits() >> (64 - bits)
}

/// Per-(level, shift) uniform shift vectors, reproducible from a seed.
///
/// Shifts for distinct `(level, r)` pairs come from disjoint counter-based
/// streams, so extending the level range never perturbs existing shifts.
#[derive(Clone, Debug)]
pub struct ShiftSet {
    dimension: usize,
    num_levels: usize,
    num_shifts: usize,
    seed: u64,
    data: Vec<f64>,
}

impl ShiftSet {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn num_shifts(&self) -> usize {
        self.num_shifts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The shift vector for `(level, r)`, `r` in `0..num_shifts`.
    pub fn shift(&self, level: usize, r: usize) -> &[f64] {
        assert!(level < self.num_levels && r < self.num_shifts);
        let start = (level * self.num_shifts + r) * self.dimension;
        &self.data[start..start + self.dimension]
    }

    /// Builds a shift set from explicit vectors (mostly for tests); all
    /// components must lie in `[0, 1)`.
    pub fn from_raw(
        dimension: usize,
        num_levels: usize,
        num_shifts: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != dimension * num_levels * num_shifts {
            return Err(Error::DimensionMismatch {
                expected: dimension * num_levels * num_shifts,
                got: data.len(),
            });
        }
        if data.iter().any(|&v| !(0.0..1.0).contains(&v)) {
            return Err(Error::InvalidParameter(
                "shift components must lie in [0, 1)".into(),
            ));
        }
        Ok(Self {
            dimension,
            num_levels,
            num_shifts,
            seed: 0,
            data,
        })
    }
}

/// Draws `(max_level + 1) * num_shifts` independent uniform shift vectors.
/// At least two shifts are required so the shift variance is defined.
pub fn draw_shifts(
    dimension: usize,
    max_level: usize,
    num_shifts: usize,
    seed: u64,
) -> Result<ShiftSet> {
    if num_shifts < 2 {
        return Err(Error::TooFewShifts {
            required: 2,
            got: num_shifts,
        });
    }
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let num_levels = max_level + 1;
    let mut data = vec![0.0; dimension * num_levels * num_shifts];
    for level in 0..num_levels {
        for r in 0..num_shifts {
            let stream = CounterStream::new(&[seed, tag::SHIFT, level as u64, r as u64]);
            let start = (level * num_shifts + r) * dimension;
            stream.fill_uniform(&mut data[start..start + dimension]);
        }
    }
    Ok(ShiftSet {
        dimension,
        num_levels,
        num_shifts,
        seed,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_rule() -> LatticeRule {
        LatticeRule::new(vec![1, 3], 2).unwrap()
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(LatticeRule::new(vec![], 2).is_err());
        assert!(LatticeRule::new(vec![2], 2).is_err()); // even
        assert!(LatticeRule::new(vec![5], 2).is_err()); // >= 2^2
        assert!(LatticeRule::new(vec![1], 0).is_err());
        assert!(LatticeRule::new(vec![1], 32).is_err());
    }

    #[test]
    fn first_block_matches_plain_lattice() {
        // s=2, z=(1,3), m=2: the four points as a set.
        let rule = toy_rule();
        let mut pts: Vec<Vec<u64>> = (0..4).map(|n| rule.point_numerators(n).unwrap()).collect();
        pts.sort();
        let expected = vec![vec![0, 0], vec![1, 3], vec![2, 2], vec![3, 1]];
        assert_eq!(pts, expected); // numerators over 4: (0,0),(.25,.75),(.5,.5),(.75,.25)
    }

    #[test]
    fn point_one_is_half_z() {
        let rule = toy_rule();
        assert_eq!(rule.point(1).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn point_zero_is_origin() {
        let rule = LatticeRule::embedded(16).unwrap();
        assert!(rule.point(0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn index_out_of_range() {
        let rule = toy_rule();
        assert!(matches!(
            rule.point(4),
            Err(Error::PointIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn shifted_point_examples() {
        assert_eq!(fract_unit(0.25 + 0.5), 0.75);
        assert_eq!(fract_unit(0.75 + 0.5), 0.25);
        let rule = toy_rule();
        let zero_shift = vec![0.0, 0.0];
        for n in 0..4 {
            assert_eq!(
                rule.shifted_point(n, &zero_shift).unwrap(),
                rule.point(n).unwrap()
            );
        }
    }

    #[test]
    fn embedded_table_loads() {
        let rule = LatticeRule::embedded(1024).unwrap();
        assert_eq!(rule.dimension(), 1024);
        assert_eq!(rule.max_log2_points(), 20);
        assert_eq!(rule.point_numerators(0).unwrap()[0], 0);
        assert!(LatticeRule::embedded(1025).is_err());
        assert!(LatticeRule::embedded(0).is_err());
    }

    #[test]
    fn draw_shifts_deterministic_and_extension_stable() {
        let a = draw_shifts(8, 3, 4, 99).unwrap();
        let b = draw_shifts(8, 3, 4, 99).unwrap();
        assert_eq!(a.shift(2, 1), b.shift(2, 1));
        let wider = draw_shifts(8, 6, 4, 99).unwrap();
        for level in 0..=3 {
            for r in 0..4 {
                assert_eq!(a.shift(level, r), wider.shift(level, r));
            }
        }
        let other = draw_shifts(8, 3, 4, 100).unwrap();
        assert_ne!(a.shift(0, 0), other.shift(0, 0));
    }

    #[test]
    fn draw_shifts_requires_two() {
        assert!(matches!(
            draw_shifts(4, 1, 1, 0),
            Err(Error::TooFewShifts { .. })
        ));
    }

    #[test]
    fn shift_components_mean_half() {
        let s = draw_shifts(50, 9, 20, 7).unwrap();
        let mut sum = 0.0;
        let mut count = 0usize;
        for level in 0..10 {
            for r in 0..20 {
                for &v in s.shift(level, r) {
                    sum += v;
                    count += 1;
                }
            }
        }
        assert!(count >= 10_000);
        let mean = sum / count as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    proptest! {
        /// Every prefix of size 2^p is the plain rank-1 lattice with N = 2^p,
        /// compared exactly on dyadic numerators.
        #[test]
        fn prefix_is_lattice(p in 0u32..=6, seed in 0u64..1000) {
            let stream = CounterStream::new(&[seed]);
            let m = 8u32;
            let z: Vec<u64> = (0..3)
                .map(|j| (stream.value(j) % (1 << m)) | 1)
                .collect();
            let rule = LatticeRule::new(z.clone(), m).unwrap();
            let np = 1u64 << p;
            let mut seq: Vec<Vec<u64>> =
                (0..np).map(|n| rule.point_numerators(n).unwrap()).collect();
            // Plain lattice {n z / 2^p mod 1}, scaled to numerators over 2^m.
            let mut plain: Vec<Vec<u64>> = (0..np)
                .map(|k| {
                    z.iter()
                        .map(|&zj| (k.wrapping_mul(zj) % np) << (m - p))
                        .collect()
                })
                .collect();
            seq.sort();
            plain.sort();
            prop_assert_eq!(seq, plain);
        }

        /// Shifted points stay inside the half-open unit cube.
        #[test]
        fn shifted_points_in_unit_cube(n in 0u64..256, d in 0.0f64..1.0) {
            let rule = LatticeRule::embedded(8).unwrap();
            let shift = vec![d; 8];
            let pt = rule.shifted_point(n, &shift).unwrap();
            prop_assert!(pt.iter().all(|&v| (0.0..1.0).contains(&v)));
        }
    }
}
