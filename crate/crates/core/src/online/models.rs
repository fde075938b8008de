//! Smooth regression functions on `[0, 1]^d` and the perturbation profile.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A known smooth function of the covariate.
///
/// `s = mean(x)` for the linear and logistic forms; the sinusoidal form
/// uses `∏_j sin(2π x_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothModel {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    Sinusoidal { center: f64, amplitude: f64 },
    Logistic { intercept: f64, slope: f64 },
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl SmoothModel {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            SmoothModel::Constant { value } => value,
            SmoothModel::Linear { intercept, slope } => intercept + slope * mean(x),
            SmoothModel::Sinusoidal { center, amplitude } => {
                center + amplitude * x.iter().map(|&t| (TAU * t).sin()).product::<f64>()
            }
            SmoothModel::Logistic { intercept, slope } => logistic(intercept + slope * mean(x)),
        }
    }

    /// Exact `(inf, sup)` over `[0, 1]^d`.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            SmoothModel::Constant { value } => (value, value),
            SmoothModel::Linear { intercept, slope } => {
                let (a, b) = (intercept, intercept + slope);
                (a.min(b), a.max(b))
            }
            SmoothModel::Sinusoidal { center, amplitude } => {
                (center - amplitude.abs(), center + amplitude.abs())
            }
            SmoothModel::Logistic { intercept, slope } => {
                let (a, b) = (logistic(intercept), logistic(intercept + slope));
                (a.min(b), a.max(b))
            }
        }
    }

    /// Require the range to lie in `[lo, hi]`.
    pub(crate) fn check_range(&self, field: &'static str, lo: f64, hi: f64) -> Result<()> {
        let finite = match *self {
            SmoothModel::Constant { value } => value.is_finite(),
            SmoothModel::Linear { intercept, slope } | SmoothModel::Logistic { intercept, slope } => {
                intercept.is_finite() && slope.is_finite()
            }
            SmoothModel::Sinusoidal { center, amplitude } => center.is_finite() && amplitude.is_finite(),
        };
        let (a, b) = self.range();
        if !finite || a < lo || b > hi {
            return Err(Error::param(
                field,
                format!("{field} must map into [{lo}, {hi}], its range is [{a}, {b}]"),
            ));
        }
        Ok(())
    }
}

/// Perturbation profile `ξ(x) = ∏_j cos(2π x_j)`, bounded by 1.
#[inline]
pub fn perturbation(x: &[f64]) -> f64 {
    x.iter().map(|&t| (TAU * t).cos()).product()
}

/// `max(i, 1)^{−rate} · scale`; index 0 reuses the index-1 amplitude.
#[inline]
pub fn amplitude(i: u64, rate: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        (i.max(1) as f64).powf(-rate) * scale
    }
}
