//! Interval estimates for proportions and means.

use serde::Serialize;

use crate::bounds::normal_quantile;
use crate::cesaro::CompensatedSum;
use crate::{Error, Result};

/// Two-sided normal critical value for `confidence`.
pub fn z_critical(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param(
            "confidence",
            format!("confidence must lie in (0, 1), got {confidence}"),
        ));
    }
    Ok(normal_quantile(0.5 + confidence / 2.0))
}

/// An estimated probability with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub successes: u64,
    pub replications: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    pub fn new(successes: u64, replications: u64, confidence: f64) -> Result<Self> {
        if replications == 0 || successes > replications {
            return Err(Error::domain(format!(
                "invalid count {successes}/{replications}"
            )));
        }
        let z = z_critical(confidence)?;
        let (low, high) = wilson(successes, replications, z);
        let p_hat = successes as f64 / replications as f64;
        Ok(Self {
            p_hat,
            successes,
            replications,
            ci_low: low.min(p_hat),
            ci_high: high.max(p_hat),
        })
    }

    /// Binomial standard error `√(p̂(1−p̂)/R)`.
    pub fn se(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.replications as f64).sqrt()
    }
}

/// Wilson score interval, clamped to `[0, 1]`.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean with standard error and a normal interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub count: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MeanEstimate {
    /// Summarize `values` in the given order.
    pub fn from_values(values: &[f64], confidence: f64) -> Result<Self> {
        let z = z_critical(confidence)?;
        if values.is_empty() {
            return Err(Error::domain("mean of no values"));
        }
        let n = values.len() as f64;
        let sum: CompensatedSum = values.iter().copied().collect();
        let mean = sum.value() / n;
        let ss: CompensatedSum = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
        let var = if values.len() > 1 { ss.value() / (n - 1.0) } else { 0.0 };
        let se = (var / n).sqrt();
        Ok(Self {
            mean,
            se,
            count: values.len() as u64,
            ci_low: mean - z * se,
            ci_high: mean + z * se,
        })
    }

    /// The same estimate multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            se: self.se * c,
            count: self.count,
            ci_low: self.ci_low * c,
            ci_high: self.ci_high * c,
        }
    }
}

/// `√(se₁² + se₂²)`.
pub fn pooled_se(se1: f64, se2: f64) -> f64 {
    se1.hypot(se2)
}

/// `a ≤ b + k·pooled_se`.
pub fn le_within(a: f64, b: f64, se_a: f64, se_b: f64, k: f64) -> bool {
    a <= b + k * pooled_se(se_a, se_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_values() {
        assert!((z_critical(0.95).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!(z_critical(1.0).is_err());
    }

    #[test]
    fn wilson_contains_p_hat() {
        for s in [0u64, 1, 5, 50, 99, 100] {
            let t = TailEstimate::new(s, 100, 0.95).unwrap();
            assert!(t.ci_low <= t.p_hat && t.p_hat <= t.ci_high);
            assert!(t.ci_low >= 0.0 && t.ci_high <= 1.0);
            assert_eq!(t.p_hat, s as f64 / 100.0);
        }
        let t = TailEstimate::new(0, 100, 0.95).unwrap();
        assert_eq!(t.ci_low, 0.0);
        assert!(t.ci_high > 0.0 && t.ci_high < 0.05);
    }

    #[test]
    fn wilson_known_value() {
        // 10/100 at 95%: (0.05522, 0.17436)
        let (lo, hi) = wilson(10, 100, z_critical(0.95).unwrap());
        assert!((lo - 0.055_223).abs() < 1e-5, "{lo}");
        assert!((hi - 0.174_366).abs() < 1e-5, "{hi}");
    }

    #[test]
    fn mean_estimate() {
        let m = MeanEstimate::from_values(&[1.0, 2.0, 3.0, 4.0], 0.95).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(m.ci_low < 2.5 && m.ci_high > 2.5);
    }
}
