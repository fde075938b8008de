//! Deterministic Cesàro arithmetic.
//!
//! Every sum goes through [`CompensatedSum`] (Neumaier's variant of Kahan
//! summation), so a prefix of 10⁸ terms keeps a relative error near machine
//! precision. Running means are updated incrementally: one pass over an
//! `n`-prefix yields all `n` scaled means.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Streaming Cesàro mean of a sequence observed one term at a time.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMean {
    sum: CompensatedSum,
    count: u64,
}

impl RunningMean {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.count += 1;
    }

    /// Number of terms seen so far.
    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    /// `x̄_n`; `NaN` before the first term.
    #[inline]
    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// `n^β · x̄_n`.
    #[inline]
    pub fn scaled(&self, rate: ScaledRate) -> f64 {
        rate.factor(self.count) * self.mean()
    }
}

/// A finite, nonempty realization `x_1, …, x_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RealSeq(Vec<f64>);

impl RealSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sequence must be nonempty"));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "entry {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealSeq {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for RealSeq {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealSeq {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Rate exponent `β ≥ 0` applied as `n^β`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ScaledRate(f64);

impl ScaledRate {
    pub const ZERO: ScaledRate = ScaledRate(0.0);

    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
        }
        Ok(Self(beta))
    }

    pub fn beta(self) -> f64 {
        self.0
    }

    /// `n^β`, exactly 1 when `β = 0`.
    #[inline]
    pub fn factor(self, n: u64) -> f64 {
        if self.0 == 0.0 {
            1.0
        } else {
            (n as f64).powf(self.0)
        }
    }
}

impl TryFrom<f64> for ScaledRate {
    type Error = Error;

    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<ScaledRate> for f64 {
    fn from(rate: ScaledRate) -> f64 {
        rate.0
    }
}

/// `(1/n) Σ xs[i]`.
pub fn cesaro_mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::domain("cesaro_mean of an empty sequence"));
    }
    let sum: CompensatedSum = xs.iter().copied().collect();
    Ok(sum.value() / xs.len() as f64)
}

/// Running scaled means `(n^β · x̄_n)` for `n = 1..=len`, in one pass.
pub fn scaled_cesaro(xs: &[f64], rate: ScaledRate) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::domain("scaled_cesaro of an empty sequence"));
    }
    let mut running = RunningMean::new();
    Ok(xs
        .iter()
        .map(|&x| {
            running.push(x);
            running.scaled(rate)
        })
        .collect())
}

/// Mean over the 1-based inclusive index range `[n1, n2]`.
pub fn block_mean(xs: &[f64], n1: usize, n2: usize) -> Result<f64> {
    if n1 < 1 || n1 > n2 || n2 > xs.len() {
        return Err(Error::domain(format!(
            "block [{n1}, {n2}] invalid for a sequence of length {}",
            xs.len()
        )));
    }
    cesaro_mean(&xs[n1 - 1..n2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_small_sequence() {
        assert_eq!(cesaro_mean(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
    }

    #[test]
    fn constant_sequence_mean_is_the_constant() {
        for n in [1usize, 7, 1000, 12345] {
            let xs = vec![0.3; n];
            assert!((cesaro_mean(&xs).unwrap() - 0.3).abs() < 1e-16);
        }
    }

    #[test]
    fn empty_inputs_are_domain_errors() {
        assert!(matches!(cesaro_mean(&[]), Err(Error::Domain(_))));
        assert!(matches!(scaled_cesaro(&[], ScaledRate::ZERO), Err(Error::Domain(_))));
        assert!(matches!(RealSeq::new(vec![]), Err(Error::Domain(_))));
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert!(RealSeq::new(vec![1.0, f64::NAN]).is_err());
        assert!(RealSeq::new(vec![f64::INFINITY]).is_err());
        assert!(RealSeq::new(vec![1.0, -2.5]).is_ok());
    }

    #[test]
    fn scaled_identity_at_beta_zero() {
        let out = scaled_cesaro(&[1.0, 1.0, 1.0], ScaledRate::ZERO).unwrap();
        assert_eq!(out, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn scaled_with_beta_one() {
        let out = scaled_cesaro(&[1.0, 0.0], ScaledRate::new(1.0).unwrap()).unwrap();
        assert_eq!(out, vec![1.0, 1.0]);
    }

    #[test]
    fn block_mean_values() {
        let xs = [5.0, 7.0, 9.0];
        assert_eq!(block_mean(&xs, 2, 3).unwrap(), 8.0);
        for k in 1..=3 {
            assert_eq!(block_mean(&xs, k, k).unwrap(), xs[k - 1]);
        }
    }

    #[test]
    fn block_mean_rejects_bad_ranges() {
        let xs = [1.0, 2.0, 3.0];
        assert!(block_mean(&xs, 0, 2).is_err());
        assert!(block_mean(&xs, 3, 2).is_err());
        assert!(block_mean(&xs, 2, 4).is_err());
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(ScaledRate::new(-0.1).is_err());
        assert!(ScaledRate::new(f64::NAN).is_err());
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut s = CompensatedSum::new();
        s.extend([1e16, 1.0, -1e16]);
        assert_eq!(s.value(), 1.0);
    }
}
