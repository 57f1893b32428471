//! Rate fitting and cost-model predictions.
//!
//! Four rates characterize a run: `alpha` (bias decay in the mesh size),
//! `beta` (decay of the difference variances), `gamma` (growth of the
//! per-sample cost) and `1/lambda` (decay of the shift variance in the
//! sample count). From `beta`, `gamma` and `lambda` the cost ratio of the
//! recycling estimator relative to the plain one follows in closed form,
//! along with the shape of the optimal sample schedule.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fitted rates and intercepts, with fit residuals for diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RateEstimates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_gamma: f64,
    pub c_lambda: f64,
    /// Root-mean-square log-residuals of the alpha/beta/gamma/lambda fits.
    pub residuals: [f64; 4],
    /// Whether level 0 was dropped from the beta fit (coarse-grid artifact
    /// when the difference variance is not yet decreasing).
    pub level0_excluded: bool,
}

/// Input history for `estimate_rates`.
#[derive(Clone, Debug, Default)]
pub struct RunHistory {
    /// Mesh sizes `h_l`.
    pub mesh_sizes: Vec<f64>,
    /// `|Ubar_l|`, the shift-averaged difference estimates.
    pub upsilon_bars: Vec<f64>,
    /// Sample variances of the differences `F_l - F_{l-1}`.
    pub diff_variances: Vec<f64>,
    /// Per-sample costs `C_l`.
    pub costs: Vec<f64>,
    /// Per-level shift-variance observations `(N_l, V_l(N))`.
    pub variance_curves: Vec<Vec<(u64, f64)>>,
}

/// Least-squares fit of `log y` against `log x`; returns `(slope,
/// intercept)` with `y ~ intercept * x^slope`, plus the RMS log-residual.
pub fn fit_rate_with_residual(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter(
            "rate fit needs at least 2 points".into(),
        ));
    }
    if x.iter().chain(y.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "rate fit needs strictly positive data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "rate fit needs at least two distinct x values".into(),
        ));
    }
    let slope = num / den;
    let intercept = (my - slope * mx).exp();
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let e = b - (my + slope * (a - mx));
            e * e
        })
        .sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Least-squares slope of `log y` vs `log x` (see
/// `fit_rate_with_residual`).
pub fn fit_rate(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (slope, intercept, _) = fit_rate_with_residual(x, y)?;
    Ok((slope, intercept))
}

/// Minimum number of observations for a usable per-level lambda fit.
const MIN_LAMBDA_POINTS: usize = 4;

/// Fits all four rates from a run history. `alpha` comes from
/// `|Ubar_l| ~ h_l^alpha` (levels >= 1), `beta` from
/// `V_l ~ h_{l-1}^beta`, `gamma` from `C_l ~ h_l^{-gamma}` and `lambda`
/// per level from `V(N) ~ N^{-1/lambda}`, averaged over levels with enough
/// observations.
pub fn estimate_rates(history: &RunHistory) -> Result<RateEstimates> {
    let levels = history.mesh_sizes.len();
    if levels < 3 {
        return Err(Error::TooFewLevels { got: levels });
    }
    if history.upsilon_bars.len() != levels
        || history.diff_variances.len() != levels
        || history.costs.len() != levels
    {
        return Err(Error::DimensionMismatch {
            expected: levels,
            got: history.upsilon_bars.len(),
        });
    }
    let rho = history.mesh_sizes[0] / history.mesh_sizes[1];

    // alpha: |Ubar_l| vs h_l for l >= 1.
    let hx: Vec<f64> = history.mesh_sizes[1..].to_vec();
    let uy: Vec<f64> = history.upsilon_bars[1..].to_vec();
    let (a_slope, c_alpha, a_res) = fit_rate_with_residual(&hx, &uy)?;

    // beta: V_l vs h_{l-1}, with the extended h_{-1} = rho * h_0 for the
    // level-0 difference. Level 0 is dropped when its variance is below
    // level 1's (coarse grid too poor to resolve the difference).
    let level0_excluded = history.diff_variances[0] < history.diff_variances[1];
    let start = usize::from(level0_excluded);
    let bx: Vec<f64> = (start..levels)
        .map(|l| {
            if l == 0 {
                rho * history.mesh_sizes[0]
            } else {
                history.mesh_sizes[l - 1]
            }
        })
        .collect();
    let by: Vec<f64> = history.diff_variances[start..].to_vec();
    let (b_slope, c_beta, b_res) = fit_rate_with_residual(&bx, &by)?;

    // gamma: C_l vs h_l; the growth exponent is minus the log-log slope.
    let (g_slope, c_gamma, g_res) = fit_rate_with_residual(&history.mesh_sizes, &history.costs)?;

    // lambda: per-level slope of log V vs log N, excluding levels with too
    // few doublings; reported as the average of the per-level lambdas.
    let mut lambdas = Vec::new();
    let mut intercepts = Vec::new();
    let mut lam_res = Vec::new();
    for curve in &history.variance_curves {
        let pts: Vec<(f64, f64)> = curve
            .iter()
            .filter(|&&(_, v)| v > 0.0)
            .map(|&(n, v)| (n as f64, v))
            .collect();
        if pts.len() < MIN_LAMBDA_POINTS {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (slope, intercept, res) = fit_rate_with_residual(&xs, &ys)?;
        if slope < 0.0 {
            lambdas.push(-1.0 / slope);
            intercepts.push(intercept);
            lam_res.push(res);
        }
    }
    let lambda = if lambdas.is_empty() {
        f64::NAN
    } else {
        lambdas.iter().sum::<f64>() / lambdas.len() as f64
    };
    let c_lambda = if intercepts.is_empty() {
        f64::NAN
    } else {
        // Geometric mean; the per-level prefactors differ by the variance
        // offsets between levels.
        (intercepts.iter().map(|c| c.ln()).sum::<f64>() / intercepts.len() as f64).exp()
    };
    let lambda_res = if lam_res.is_empty() {
        f64::NAN
    } else {
        lam_res.iter().sum::<f64>() / lam_res.len() as f64
    };

    Ok(RateEstimates {
        alpha: a_slope,
        beta: b_slope,
        gamma: -g_slope,
        lambda,
        c_alpha,
        c_beta,
        c_gamma,
        c_lambda,
        residuals: [a_res, b_res, g_res, lambda_res],
        level0_excluded,
    })
}

fn check_rates(beta: f64, gamma: f64, lambda: f64, rho: f64) -> Result<()> {
    if !(beta > 0.0 && gamma > 0.0 && lambda > 0.0 && rho > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rates must satisfy beta, gamma, lambda > 0 and rho > 1 \
             (got beta={beta}, gamma={gamma}, lambda={lambda}, rho={rho})"
        )));
    }
    Ok(())
}

/// Predicted cost of the recycling estimator relative to the plain one,
/// `1 - rho^{-(beta+gamma) lambda/(lambda+1)}`; values below 1 mean
/// recycling is cheaper.
pub fn predicted_cost_reduction(beta: f64, gamma: f64, lambda: f64, rho: f64) -> Result<f64> {
    check_rates(beta, gamma, lambda, rho)?;
    Ok(1.0 - rho.powf(-(beta + gamma) * lambda / (lambda + 1.0)))
}

/// The shape of the optimal sample schedule,
/// `N_l ∝ (h_l^{beta+gamma})^{lambda/(lambda+1)}`, normalized to
/// `N_0 = 1`. The unknown multiplier-dependent prefactor is deliberately
/// not computed.
pub fn predicted_nsamples_shape(
    beta: f64,
    gamma: f64,
    lambda: f64,
    rho: f64,
    levels: usize,
) -> Result<Vec<f64>> {
    check_rates(beta, gamma, lambda, rho)?;
    let ratio = rho.powf(-(beta + gamma) * lambda / (lambda + 1.0));
    Ok((0..=levels).map(|l| ratio.powi(l as i32)).collect())
}

/// Numerically sums the cost of a recycled schedule against the plain one
/// under the proposition's accounting: every level's fresh fraction is
/// `N_l - N_{l+1}` with the schedule extended one level past `L`, and
/// `C_l = h_l^{-gamma}`. Cross-checks the closed form.
pub fn simulated_recycling_cost_ratio(
    beta: f64,
    gamma: f64,
    lambda: f64,
    rho: f64,
    levels: usize,
) -> Result<f64> {
    check_rates(beta, gamma, lambda, rho)?;
    let schedule = predicted_nsamples_shape(beta, gamma, lambda, rho, levels + 1)?;
    let cost = |l: usize| rho.powf(gamma * l as f64);
    let mut fresh = 0.0;
    let mut full = 0.0;
    for l in 0..=levels {
        fresh += (schedule[l] - schedule[l + 1]) * cost(l);
        full += schedule[l] * cost(l);
    }
    Ok(fresh / full)
}

/// Speedup triple `(S1, S2, S3)` from three costs at the same tolerance:
/// plain quasi-Monte Carlo over Monte Carlo, recycling over Monte Carlo,
/// and recycling over plain quasi-Monte Carlo. `S2 = S1 * S3` by
/// construction.
pub fn speedups(mlmc_cost: f64, mlqmc_cost: f64, mg_mlqmc_cost: f64) -> Result<(f64, f64, f64)> {
    if !(mlmc_cost > 0.0 && mlqmc_cost > 0.0 && mg_mlqmc_cost > 0.0) {
        return Err(Error::InvalidParameter(
            "speedups need positive costs".into(),
        ));
    }
    Ok((
        mlmc_cost / mlqmc_cost,
        mlmc_cost / mg_mlqmc_cost,
        mlqmc_cost / mg_mlqmc_cost,
    ))
}
