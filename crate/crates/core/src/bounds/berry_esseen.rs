//! Berry–Esseen lower margin for the block-Bernoulli counterexample.

use serde::Serialize;

use super::normal::normal_sf;
use crate::{Error, Result};

/// Normal approximation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalApprox {
    /// Universal constant of the i.i.d. Berry–Esseen inequality.
    pub be_constant: f64,
    /// Absolute accuracy of [`super::normal_cdf`].
    pub phi_abs_tol: f64,
}

impl Default for NormalApprox {
    fn default() -> Self {
        Self {
            be_constant: 0.4748,
            phi_abs_tol: 1e-7,
        }
    }
}

/// Intermediate quantities of [`berry_esseen_margin`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeMargin {
    /// Bernoulli parameter on the block `[n/2, n−1]`.
    pub p: f64,
    /// Standardized threshold of the block mean.
    pub z: f64,
    /// `C_BE · ρ / (σ³ √(n/2))`.
    pub penalty: f64,
    /// `clamp(1 − Φ(z) − penalty, 0, 1)`.
    pub margin: f64,
}

/// Lower bound on `P(X̄_{n/2:n−1} ≥ 2 n^{−β} M)` with the default constant.
pub fn berry_esseen_margin(n: u64, alpha: f64, beta: f64, m: f64) -> Result<f64> {
    Ok(berry_esseen_detail(n, alpha, beta, m, &NormalApprox::default())?.margin)
}

/// Full computation behind [`berry_esseen_margin`].
///
/// The block `[n/2, n−1]` holds `n/2` i.i.d. Bernoulli(p) terms with
/// `p = (n/2)^{−α}`; the threshold for their mean is `2Mn^{−β}`.
pub fn berry_esseen_detail(
    n: u64,
    alpha: f64,
    beta: f64,
    m: f64,
    approx: &NormalApprox,
) -> Result<BeMargin> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::domain(format!("n must be a power of two >= 4, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(beta > alpha && beta < 1.0) {
        return Err(Error::param("beta", format!("beta must lie in (alpha, 1), got {beta}")));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::param("m", format!("M must be > 0, got {m}")));
    }
    let half = (n / 2) as f64;
    let p = half.powf(-alpha);
    if p >= 1.0 {
        return Err(Error::domain(format!("block probability {p} must be < 1")));
    }
    let var = p * (1.0 - p);
    let sigma = var.sqrt();
    let rho = var * ((1.0 - p).powi(2) + p * p);
    let threshold = 2.0 * m * (n as f64).powf(-beta);
    let z = half.sqrt() / sigma * (threshold - p);
    let penalty = approx.be_constant * rho / (sigma.powi(3) * half.sqrt());
    let margin = (normal_sf(z) - penalty).clamp(0.0, 1.0);
    Ok(BeMargin {
        p,
        z,
        penalty,
        margin,
    })
}
