//! Running sums of level differences, with the recycling bookkeeping.
//!
//! For a solve targeting level `k`, shift `r`, the accumulator keeps
//! `S[tau][k][r] = sum_n (F_tau - F_{tau-1})(y^(n)_{k,r})` for every target
//! level `tau <= k` (recycling mode) or only `tau == k` (plain mode). The
//! per-level estimators are reconstructed on demand:
//!
//! ```text
//! recycling: Upsilon_{tau,r} = sum_{k >= tau} S[tau][k][r] / sum_{k >= tau} N_k
//! plain:     Upsilon_{tau,r} = S[tau][tau][r] / N_tau
//! ```

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct LevelSlot {
    /// Point-set size `N_k` (per shift).
    count: u64,
    /// Size before the current batch; samples `count_old..count` are new.
    count_old: u64,
    /// Difference sums, laid out `[tau * num_shifts + r]`; `tau` ranges over
    /// `0..=k` when recycling, or just `{k}` (a single row) otherwise.
    sums: Vec<f64>,
    /// Moments of `F_k` over all fresh solves at this level.
    sum_f: f64,
    sum_f_sq: f64,
    /// Moments of the diagonal difference `F_k - F_{k-1}`.
    sum_diff: f64,
    sum_diff_sq: f64,
    /// Total solver work of fresh solves at this level.
    work: u64,
    /// Number of fresh solves (`count * num_shifts` once batches complete).
    solves: u64,
    /// Accumulated wall-clock seconds of fresh solves.
    wall_secs: f64,
}

impl LevelSlot {
    fn new(level: usize, num_shifts: usize, recycle: bool) -> Self {
        let rows = if recycle { level + 1 } else { 1 };
        Self {
            count: 0,
            count_old: 0,
            sums: vec![0.0; rows * num_shifts],
            sum_f: 0.0,
            sum_f_sq: 0.0,
            sum_diff: 0.0,
            sum_diff_sq: 0.0,
            work: 0,
            solves: 0,
            wall_secs: 0.0,
        }
    }
}

/// Per-(target level, source level, shift) difference sums.
#[derive(Clone, Debug)]
pub struct DifferenceAccumulator {
    num_shifts: usize,
    recycle: bool,
    levels: Vec<LevelSlot>,
}

impl DifferenceAccumulator {
    pub fn new(num_shifts: usize, recycle: bool) -> Result<Self> {
        if num_shifts < 2 {
            return Err(Error::TooFewShifts {
                required: 2,
                got: num_shifts,
            });
        }
        Ok(Self {
            num_shifts,
            recycle,
            levels: Vec::new(),
        })
    }

    pub fn num_shifts(&self) -> usize {
        self.num_shifts
    }

    pub fn recycle(&self) -> bool {
        self.recycle
    }

    /// Number of levels currently tracked (`L + 1`).
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Makes levels `0..=level` exist.
    pub fn ensure_level(&mut self, level: usize) {
        while self.levels.len() <= level {
            let l = self.levels.len();
            self.levels
                .push(LevelSlot::new(l, self.num_shifts, self.recycle));
        }
    }

    /// Point-set size `N_k`.
    pub fn points(&self, level: usize) -> u64 {
        self.levels.get(level).map_or(0, |s| s.count)
    }

    pub fn points_old(&self, level: usize) -> u64 {
        self.levels.get(level).map_or(0, |s| s.count_old)
    }

    /// Starts a batch that grows level `level` to `new_count` points.
    pub fn begin_batch(&mut self, level: usize, new_count: u64) {
        self.ensure_level(level);
        let slot = &mut self.levels[level];
        assert!(new_count >= slot.count, "point counts never shrink");
        slot.count = new_count;
    }

    /// Marks the batch complete (all samples `count_old..count` recorded).
    pub fn finish_batch(&mut self, level: usize) {
        let slot = &mut self.levels[level];
        slot.count_old = slot.count;
    }

    /// Records one fresh solve at `level` for shift `r`. `diffs[tau]` holds
    /// `F_tau - F_{tau-1}` for `tau = 0..=level` (with `F_{-1} = 0`).
    pub fn record_solve(&mut self, level: usize, r: usize, diffs: &[f64], work: u64, wall: f64) {
        debug_assert_eq!(diffs.len(), level + 1);
        debug_assert!(r < self.num_shifts);
        let rshifts = self.num_shifts;
        let slot = &mut self.levels[level];
        if self.recycle {
            for (tau, &d) in diffs.iter().enumerate() {
                slot.sums[tau * rshifts + r] += d;
            }
        } else {
            slot.sums[r] += diffs[level];
        }
        let f_value: f64 = diffs.iter().sum();
        slot.sum_f += f_value;
        slot.sum_f_sq += f_value * f_value;
        let d = diffs[level];
        slot.sum_diff += d;
        slot.sum_diff_sq += d * d;
        slot.work += work;
        slot.solves += 1;
        slot.wall_secs += wall;
    }

    /// Effective sample count at target level `tau`: `sum_{k >= tau} N_k`
    /// when recycling, `N_tau` otherwise.
    pub fn effective_points(&self, tau: usize) -> u64 {
        if self.recycle {
            (tau..self.levels.len()).map(|k| self.points(k)).sum()
        } else {
            self.points(tau)
        }
    }

    /// Fraction of samples at target level `tau` that were recycled from
    /// finer-level solves.
    pub fn recycled_fraction(&self, tau: usize) -> f64 {
        if !self.recycle {
            return 0.0;
        }
        let total = self.effective_points(tau);
        if total == 0 {
            return 0.0;
        }
        let from_above: u64 = ((tau + 1)..self.levels.len()).map(|k| self.points(k)).sum();
        from_above as f64 / total as f64
    }

    /// The per-shift estimator of `E[F_tau - F_{tau-1}]`. Returns 0 while
    /// the denominator is empty, matching the all-zero initialization of the
    /// adaptive algorithm.
    pub fn upsilon(&self, tau: usize, r: usize) -> f64 {
        let denom = self.effective_points(tau);
        if denom == 0 {
            return 0.0;
        }
        let num = if self.recycle {
            (tau..self.levels.len())
                .map(|k| self.levels[k].sums[tau * self.num_shifts + r])
                .sum()
        } else {
            self.levels[tau].sums[r]
        };
        num / denom as f64
    }

    /// Shift average of `upsilon(tau, .)`.
    pub fn upsilon_bar(&self, tau: usize) -> f64 {
        (0..self.num_shifts)
            .map(|r| self.upsilon(tau, r))
            .sum::<f64>()
            / self.num_shifts as f64
    }

    /// Per-shift estimate `Q_r = sum_tau Upsilon_{tau,r}`.
    pub fn shift_estimate(&self, r: usize) -> f64 {
        (0..self.levels.len()).map(|tau| self.upsilon(tau, r)).sum()
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::EmptyAccumulator { level: 0 });
        }
        for tau in 0..self.levels.len() {
            if self.effective_points(tau) == 0 {
                return Err(Error::EmptyAccumulator { level: tau });
            }
        }
        Ok(())
    }

    /// The multilevel estimate, averaged over shifts.
    pub fn estimator_value(&self) -> Result<f64> {
        self.check_nonempty()?;
        let sum: f64 = (0..self.num_shifts).map(|r| self.shift_estimate(r)).sum();
        Ok(sum / self.num_shifts as f64)
    }

    /// Sample variance of the estimator over the shifts,
    /// `(1/(R(R-1))) sum_r (Q_r - Qbar)^2`.
    pub fn variance_over_shifts(&self) -> Result<f64> {
        self.check_nonempty()?;
        let r = self.num_shifts as f64;
        let estimates: Vec<f64> = (0..self.num_shifts)
            .map(|i| self.shift_estimate(i))
            .collect();
        let mean = estimates.iter().sum::<f64>() / r;
        let ss: f64 = estimates.iter().map(|q| (q - mean) * (q - mean)).sum();
        Ok(ss / (r * (r - 1.0)))
    }

    /// Contribution of level `tau` to the estimator variance,
    /// `(1/(R(R-1))) sum_r (Upsilon_{tau,r} - mean)^2`.
    pub fn level_variance(&self, tau: usize) -> f64 {
        let r = self.num_shifts as f64;
        let mean = self.upsilon_bar(tau);
        let ss: f64 = (0..self.num_shifts)
            .map(|i| {
                let d = self.upsilon(tau, i) - mean;
                d * d
            })
            .sum();
        ss / (r * (r - 1.0))
    }

    /// Least-squares decay rate of `|upsilon_bar|` across levels `>= 1`:
    /// `|Ubar_l| ~ c * rho^{-alpha l}`. `None` when fewer than two usable
    /// points remain or the fitted rate is not positive.
    pub fn fit_alpha(&self, rho: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (1..self.levels.len())
            .filter_map(|l| {
                let u = self.upsilon_bar(l).abs();
                (u > 0.0).then(|| (l as f64, u.ln()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = num / den;
        let alpha = -slope / rho.ln();
        (alpha > 0.0 && alpha.is_finite()).then_some(alpha)
    }

    /// The fitted rate with the conservative fallback applied.
    pub fn alpha_or_floor(&self, rho: f64) -> f64 {
        self.fit_alpha(rho).unwrap_or(0.5)
    }

    /// Bias estimate `|Ubar_L| / (rho^alpha + 1)`; needs at least 3 levels
    /// so the rate fit has something to work with.
    pub fn bias_estimate(&self, rho: f64) -> Result<f64> {
        if self.levels.len() < 3 {
            return Err(Error::TooFewLevels {
                got: self.levels.len(),
            });
        }
        let last = self.upsilon_bar(self.levels.len() - 1).abs();
        if last == 0.0 {
            return Ok(0.0);
        }
        let alpha = self.alpha_or_floor(rho);
        Ok(last / (rho.powf(alpha) + 1.0))
    }

    /// Average cost of one fresh solve at `level`, in work units.
    pub fn work_per_solve(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves == 0 {
            0.0
        } else {
            slot.work as f64 / slot.solves as f64
        }
    }

    /// Average wall-clock seconds of one fresh solve at `level`.
    pub fn wall_per_solve(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves == 0 {
            0.0
        } else {
            slot.wall_secs / slot.solves as f64
        }
    }

    pub fn solves(&self, level: usize) -> u64 {
        self.levels[level].solves
    }

    pub fn total_work(&self) -> u64 {
        self.levels.iter().map(|s| s.work).sum()
    }

    pub fn total_wall_secs(&self) -> f64 {
        self.levels.iter().map(|s| s.wall_secs).sum()
    }

    /// Mean of `F_level` over the fresh solves at `level`.
    pub fn mean_f(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves == 0 {
            0.0
        } else {
            slot.sum_f / slot.solves as f64
        }
    }

    /// Sample variance of `F_level` over the fresh solves at `level`.
    pub fn var_f(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves < 2 {
            return 0.0;
        }
        let n = slot.solves as f64;
        ((slot.sum_f_sq - slot.sum_f * slot.sum_f / n) / (n - 1.0)).max(0.0)
    }

    /// Mean of the diagonal difference `F_l - F_{l-1}` at `level`.
    pub fn mean_diff(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves == 0 {
            0.0
        } else {
            slot.sum_diff / slot.solves as f64
        }
    }

    /// Sample variance of the diagonal difference at `level`.
    pub fn var_diff(&self, level: usize) -> f64 {
        let slot = &self.levels[level];
        if slot.solves < 2 {
            return 0.0;
        }
        let n = slot.solves as f64;
        ((slot.sum_diff_sq - slot.sum_diff * slot.sum_diff / n) / (n - 1.0)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fills an accumulator so that the per-shift estimates `Q_r` take the
    /// prescribed values on a single level.
    fn single_level_acc(values: &[f64]) -> DifferenceAccumulator {
        let mut acc = DifferenceAccumulator::new(values.len(), false).unwrap();
        acc.begin_batch(0, 1);
        for (r, &v) in values.iter().enumerate() {
            acc.record_solve(0, r, &[v], 1, 0.0);
        }
        acc.finish_batch(0);
        acc
    }

    #[test]
    fn variance_over_shifts_arithmetic() {
        let acc = single_level_acc(&[1.0, 2.0, 3.0]);
        assert!((acc.variance_over_shifts().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let equal = single_level_acc(&[5.0, 5.0, 5.0, 5.0]);
        assert_eq!(equal.variance_over_shifts().unwrap(), 0.0);
    }

    #[test]
    fn single_level_variance_collapses() {
        let acc = single_level_acc(&[1.0, 2.0, 3.0]);
        assert!((acc.level_variance(0) - acc.variance_over_shifts().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn telescoping_structure_recycle() {
        // One level-2 solve updates exactly three target sums.
        let mut acc = DifferenceAccumulator::new(2, true).unwrap();
        acc.ensure_level(2);
        acc.begin_batch(2, 1);
        acc.record_solve(2, 0, &[1.0, 0.5, 0.25], 10, 0.0);
        acc.record_solve(2, 1, &[1.0, 0.5, 0.25], 10, 0.0);
        acc.finish_batch(2);
        for tau in 0..=2 {
            assert_eq!(acc.effective_points(tau), 1);
        }
        assert!((acc.upsilon(0, 0) - 1.0).abs() < 1e-15);
        assert!((acc.upsilon(1, 0) - 0.5).abs() < 1e-15);
        assert!((acc.upsilon(2, 0) - 0.25).abs() < 1e-15);
        // Level 0 and 1 were never sampled directly; their counts are zero
        // but the recycled contributions cover them.
        assert_eq!(acc.points(0), 0);
        assert_eq!(acc.points(1), 0);
        assert!((acc.estimator_value().unwrap() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn constant_integrand_telescopes_to_constant() {
        // F_l == c on every level: differences vanish above level 0 and the
        // estimate equals c in both modes.
        for recycle in [false, true] {
            let mut acc = DifferenceAccumulator::new(3, recycle).unwrap();
            acc.ensure_level(1);
            acc.begin_batch(0, 4);
            for r in 0..3 {
                for _ in 0..4 {
                    acc.record_solve(0, r, &[2.5], 1, 0.0);
                }
            }
            acc.finish_batch(0);
            acc.begin_batch(1, 2);
            for r in 0..3 {
                for _ in 0..2 {
                    acc.record_solve(1, r, &[2.5, 0.0], 2, 0.0);
                }
            }
            acc.finish_batch(1);
            assert!((acc.estimator_value().unwrap() - 2.5).abs() < 1e-14);
            assert_eq!(acc.variance_over_shifts().unwrap(), 0.0);
            assert_eq!(acc.level_variance(0), 0.0);
            assert_eq!(acc.level_variance(1), 0.0);
        }
    }

    #[test]
    fn empty_accumulator_is_an_error() {
        let acc = DifferenceAccumulator::new(2, false).unwrap();
        assert!(matches!(
            acc.estimator_value(),
            Err(Error::EmptyAccumulator { .. })
        ));
        let mut acc = DifferenceAccumulator::new(2, false).unwrap();
        acc.ensure_level(1);
        acc.begin_batch(0, 1);
        acc.record_solve(0, 0, &[1.0], 1, 0.0);
        acc.record_solve(0, 1, &[1.0], 1, 0.0);
        acc.finish_batch(0);
        // Level 1 exists but has no samples and no recycled cover.
        assert!(matches!(
            acc.estimator_value(),
            Err(Error::EmptyAccumulator { level: 1 })
        ));
    }

    #[test]
    fn bias_estimate_examples() {
        // Exact geometric decay 4^{-l} gives alpha = 2 and
        // bias = |Ubar_L| / (rho^2 + 1).
        let mut acc = DifferenceAccumulator::new(2, false).unwrap();
        acc.ensure_level(3);
        for l in 0..=3 {
            acc.begin_batch(l, 1);
            let d = 0.48 * 0.25f64.powi(l as i32);
            let mut diffs = vec![0.0; l + 1];
            diffs[l] = d;
            acc.record_solve(l, 0, &diffs, 1, 0.0);
            acc.record_solve(l, 1, &diffs, 1, 0.0);
            acc.finish_batch(l);
        }
        let alpha = acc.fit_alpha(2.0).unwrap();
        assert!((alpha - 2.0).abs() < 1e-10, "alpha {alpha}");
        let expected = acc.upsilon_bar(3).abs() / 5.0;
        assert!((acc.bias_estimate(2.0).unwrap() - expected).abs() < 1e-15);
        // Plugging the spec numbers into the same formula: 0.03 / 5.
        assert!((0.03 / (2.0f64.powf(2.0) + 1.0) - 0.006).abs() < 1e-15);
    }

    #[test]
    fn bias_zero_when_top_difference_vanishes() {
        let mut acc = DifferenceAccumulator::new(2, false).unwrap();
        acc.ensure_level(2);
        for l in 0..=2 {
            acc.begin_batch(l, 1);
            let d = if l == 2 { 0.0 } else { 0.1 };
            let mut diffs = vec![0.0; l + 1];
            diffs[l] = d;
            acc.record_solve(l, 0, &diffs, 1, 0.0);
            acc.record_solve(l, 1, &diffs, 1, 0.0);
            acc.finish_batch(l);
        }
        assert_eq!(acc.bias_estimate(2.0).unwrap(), 0.0);
    }

    #[test]
    fn bias_requires_three_levels() {
        let mut acc = DifferenceAccumulator::new(2, false).unwrap();
        acc.ensure_level(1);
        assert!(matches!(
            acc.bias_estimate(2.0),
            Err(Error::TooFewLevels { got: 2 })
        ));
    }

    #[test]
    fn degenerate_alpha_falls_back() {
        // Growing differences produce a negative fitted rate; the floor
        // kicks in.
        let mut acc = DifferenceAccumulator::new(2, false).unwrap();
        acc.ensure_level(3);
        for l in 0..=3 {
            acc.begin_batch(l, 1);
            let mut diffs = vec![0.0; l + 1];
            diffs[l] = 4.0f64.powi(l as i32);
            acc.record_solve(l, 0, &diffs, 1, 0.0);
            acc.record_solve(l, 1, &diffs, 1, 0.0);
            acc.finish_batch(l);
        }
        assert!(acc.fit_alpha(2.0).is_none());
        assert_eq!(acc.alpha_or_floor(2.0), 0.5);
    }

    #[test]
    fn recycled_fraction_accounting() {
        let mut acc = DifferenceAccumulator::new(2, true).unwrap();
        acc.ensure_level(2);
        let counts = [8u64, 4, 2];
        for (l, &n) in counts.iter().enumerate() {
            acc.begin_batch(l, n);
            for r in 0..2 {
                for _ in 0..n {
                    acc.record_solve(l, r, &vec![1.0; l + 1], 1 << l, 0.0);
                }
            }
            acc.finish_batch(l);
        }
        assert_eq!(acc.effective_points(0), 14);
        assert_eq!(acc.effective_points(1), 6);
        assert_eq!(acc.effective_points(2), 2);
        assert!((acc.recycled_fraction(0) - 6.0 / 14.0).abs() < 1e-15);
        assert!((acc.recycled_fraction(1) - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(acc.recycled_fraction(2), 0.0);
        // Work is charged to the solve's own level.
        assert_eq!(acc.work_per_solve(2), 4.0);
        assert_eq!(acc.solves(1), 8);
    }
}
