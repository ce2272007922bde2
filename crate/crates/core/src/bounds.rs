//! Fundamental limits on the mean square error versus the number of
//! sensors and the length of the observation interval.
//!
//! With `g(k, mu) = (1 - mu^{2(k+1)}) / (1 - mu^2)` and `i in {0, k}`:
//!
//! ```text
//! n sigma^2 l_i / (|S| g(k, mu) + sigma^2 sigma_0^{-2})  <=  mmse(x_i)  <=  n u_i
//! ```
//!
//! with `l_0 = 1`, `u_0 = sigma_0^2`, `l_k = lambda_min(L_k^T L_k)` and
//! `u_k = (k + 1) lambda_max(L_k^T L_k) max(sigma_0^2, sigma_w^2)`.
//! The minimum sensor count and interval length for an error level `alpha`
//! both rearrange the lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::stacked::StackedMaps;
use crate::system::{LtvSystem, NoisePriorSummary};

/// `mu` closer than this to 1 is rejected.
pub const MU_ONE_TOL: f64 = 1e-9;
/// `l_k` at or below this makes the `x_k` lower bound vacuous.
pub const VACUOUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundTarget {
    X0,
    Xk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub target: BoundTarget,
    pub lower: f64,
    pub upper: f64,
    pub l_i: f64,
    pub u_i: f64,
    /// Set when `l_i <= 1e-12`; `lower` is then reported as 0.
    pub vacuous: bool,
}

fn check_mu(mu: f64) -> Result<()> {
    if (mu - 1.0).abs() < MU_ONE_TOL {
        Err(Error::MuEqualsOne(mu))
    } else {
        Ok(())
    }
}

/// `sum_{m=0..=k} mu^{2m}` in closed form.
fn geometric_gain(mu: f64, k: usize) -> f64 {
    let mu2 = mu * mu;
    (1.0 - mu2.powi(k as i32 + 1)) / (1.0 - mu2)
}

/// `(l_k, lambda_max)` of the Gram matrix `L_k^T L_k`.
pub fn final_map_gram_extremes(maps: &StackedMaps) -> (f64, f64) {
    let lk = maps.last();
    let gram = lk.transpose() * lk;
    let (lo, hi) = linalg::sym_eigen_extremes(&gram);
    (lo.max(0.0), hi)
}

pub fn mmse_bounds(
    system: &LtvSystem,
    summary: &NoisePriorSummary,
    maps: &StackedMaps,
    n_sensors: usize,
    target: BoundTarget,
) -> Result<BoundsReport> {
    check_mu(summary.mu)?;
    let n = system.n() as f64;
    let k = system.k();
    let sigma2 = system.sigma().powi(2);
    let (l_i, u_i) = match target {
        BoundTarget::X0 => (1.0, summary.sigma0_sq),
        BoundTarget::Xk => {
            let (lo, hi) = final_map_gram_extremes(maps);
            (lo, (k + 1) as f64 * hi * summary.sigma0_sq.max(summary.sigmaw_sq))
        }
    };
    let vacuous = l_i <= VACUOUS_TOL;
    let lower = if vacuous {
        0.0
    } else {
        n * sigma2 * l_i / (n_sensors as f64 * geometric_gain(summary.mu, k) + sigma2 * summary.sigma0_inv_sq)
    };
    Ok(BoundsReport { target, lower, upper: n * u_i, l_i, u_i, vacuous })
}

/// Factor shared by both trade-off functions: `n sigma^2 l_i / alpha - sigma^2 sigma_0^{-2}`.
fn excess(summary: &NoisePriorSummary, alpha: f64, n: usize, sigma: f64, l_i: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let sigma2 = sigma * sigma;
    Ok(n as f64 * sigma2 * l_i / alpha - sigma2 * summary.sigma0_inv_sq)
}

/// Minimum number of sensors any set reaching `mmse(x_i) = alpha` must have.
///
/// Real-valued; non-positive values impose no constraint.
pub fn min_sensors_for_error(
    summary: &NoisePriorSummary,
    alpha: f64,
    k: usize,
    n: usize,
    sigma: f64,
    l_i: f64,
) -> Result<f64> {
    check_mu(summary.mu)?;
    Ok(excess(summary, alpha, n, sigma, l_i)? / geometric_gain(summary.mu, k))
}

/// Minimum horizon `k` with which `n_sensors` sensors can reach `mmse(x_i) = alpha`.
pub fn min_interval_for_error(
    summary: &NoisePriorSummary,
    alpha: f64,
    n: usize,
    sigma: f64,
    n_sensors: usize,
    l_i: f64,
) -> Result<f64> {
    check_mu(summary.mu)?;
    if summary.mu == 0.0 {
        return Err(Error::InvalidParameter("mu = 0 has no interval trade-off".into()));
    }
    if n_sensors == 0 {
        return Err(Error::InvalidParameter("at least one sensor is required".into()));
    }
    let mu2 = summary.mu * summary.mu;
    let arg = 1.0 - excess(summary, alpha, n, sigma, l_i)? * (1.0 - mu2) / n_sensors as f64;
    if !(arg > 0.0) {
        return Err(Error::InfeasibleAlpha);
    }
    Ok(arg.ln() / (2.0 * summary.mu.ln()) - 1.0)
}
