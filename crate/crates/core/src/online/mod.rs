//! Online estimators with a martingale + Cesàro-remainder decomposition.
//!
//! Both estimators average a sequence of plug-in corrections built from
//! estimators fitted on the past. Nuisance estimates are the truth plus a
//! perturbation decaying at a known rate, and all conditional expectations
//! are integrated against the known data-generating process, so the
//! decomposition `estimate − truth = martingale_part + remainder_avg` can be
//! checked path by path.

mod bayes;
mod mar;
mod models;
mod quadrature;

pub use bayes::{run_bayes_risk, BayesRiskDgp, BayesRiskRun, BayesRiskSteps, EstimatorSchedule};
pub use mar::{run_mar_mean, MarDgp, MarRun, MarStep, MarSteps, NuisanceSchedule};
pub use models::{amplitude, perturbation, SmoothModel};
pub use quadrature::{axis_rule, default_cells, tensor_rule};

use serde::Serialize;

use crate::{Error, Result};

/// Decomposition at one prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefixPoint {
    pub n: u64,
    pub estimate: f64,
    /// `estimate − truth`.
    pub error: f64,
    pub martingale_part: f64,
    pub remainder_avg: f64,
    /// `error − martingale_part − remainder_avg`.
    pub residual: f64,
}

/// `1, 2, 4, …` up to `n`, with `n` appended when it is not a power of two.
pub fn dyadic_grid(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64)
        .map(|k| 1u64 << k)
        .take_while(|&p| p <= n)
        .collect();
    if n > 0 && !n.is_power_of_two() {
        out.push(n);
    }
    out
}

/// Two-sided Azuma–Hoeffding level `c·√(2 ln(2/conf) / n)` for a mean of
/// `n` martingale differences bounded by `c`.
pub fn azuma_bound(n: u64, diff_bound: f64, conf: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if !(diff_bound.is_finite() && diff_bound > 0.0) {
        return Err(Error::param("diff_bound", format!("diff_bound must be > 0, got {diff_bound}")));
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::param("conf", format!("conf must lie in (0, 1), got {conf}")));
    }
    Ok(diff_bound * (2.0 * (2.0 / conf).ln() / n as f64).sqrt())
}
