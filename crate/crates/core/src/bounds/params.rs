use serde::{Deserialize, Serialize};

use super::integral::factorial;
use crate::{Error, Result};

/// Constants of the exponential deviation premise
/// `P(X_n ≥ C₀ n^{-β} + x) ≤ C₁ exp(-C₂ n x^γ)`, plus the free exponent `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBoundParams {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Constants derived from a validated [`TailBoundParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// `κ = 1/(1 − γδ)`, always > 1.
    pub kappa: f64,
    /// Integer exponent `⌈κ − 1⌉ ≥ 1` used to dominate `u^{κ−1}`.
    pub q: u32,
    /// Exponent `α = γ(1−δ) / {γ(1−δ) + (1−γδ)}` of the Cesàro bound.
    pub alpha_exp: f64,
    /// `C₃ = κ·(q+1)!·max{C₂⁻¹, C₂^{-(q+1)}} + 1`.
    pub c3: f64,
    /// `C′₁ = C₁·C₃`.
    pub c1_prime: f64,
    /// `C₄ = C₁·(2·C₃ + 1)`.
    pub c4: f64,
}

/// Validated premise constants with their derived constants.
///
/// The only way to obtain one is [`TailBoundParams::validate`], so every
/// method below may assume the premise inequalities hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    params: TailBoundParams,
    derived: DerivedConstants,
}

/// Threshold and probability bound for the Cesàro mean at one `(n, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CesaroTail {
    pub threshold: f64,
    pub prob_bound: f64,
}

fn finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{field} must be finite, got {v}")))
    }
}

impl TailBoundParams {
    pub fn validate(&self) -> Result<TailBound> {
        let TailBoundParams {
            c0,
            c1,
            c2,
            beta,
            gamma,
            delta,
        } = *self;
        for (field, v) in [
            ("c0", c0),
            ("c1", c1),
            ("c2", c2),
            ("beta", beta),
            ("gamma", gamma),
            ("delta", delta),
        ] {
            finite(field, v)?;
        }
        if c0 < 0.0 {
            return Err(Error::param("c0", format!("c0 must be >= 0, got {c0}")));
        }
        if c1 <= 0.0 {
            return Err(Error::param("c1", format!("c1 must be > 0, got {c1}")));
        }
        if c2 <= 0.0 {
            return Err(Error::param("c2", format!("c2 must be > 0, got {c2}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::param("beta", format!("beta must lie in (0, 1), got {beta}")));
        }
        if gamma <= 0.0 {
            return Err(Error::param("gamma", format!("gamma must be > 0, got {gamma}")));
        }
        if beta * gamma >= 1.0 {
            return Err(Error::param(
                "gamma",
                format!(
                    "gamma must be < 1/beta (beta*gamma = {} >= 1, the premise cannot propagate)",
                    beta * gamma
                ),
            ));
        }
        if delta <= beta {
            return Err(Error::param(
                "delta",
                format!("delta must exceed beta (delta = {delta}, beta = {beta})"),
            ));
        }
        let upper = (1.0 / gamma).min(1.0);
        if delta >= upper || gamma * delta >= 1.0 {
            return Err(Error::param(
                "delta",
                format!("delta must be < min(1/gamma, 1) = {upper}, got {delta}"),
            ));
        }

        let slack = 1.0 - gamma * delta;
        let kappa = 1.0 / slack;
        let q = ((kappa - 1.0).ceil() as u32).max(1);
        let alpha_exp = gamma * (1.0 - delta) / (gamma * (1.0 - delta) + slack);
        let qf = f64::from(q);
        let c3 = kappa * factorial(q + 1) * (1.0 / c2).max(c2.powf(-(qf + 1.0))) + 1.0;
        let derived = DerivedConstants {
            kappa,
            q,
            alpha_exp,
            c3,
            c1_prime: c1 * c3,
            c4: c1 * (2.0 * c3 + 1.0),
        };
        Ok(TailBound {
            params: *self,
            derived,
        })
    }
}

/// Free-function form of [`TailBoundParams::validate`].
pub fn validate_params(p: &TailBoundParams) -> Result<TailBound> {
    p.validate()
}

fn require_y(y: f64) -> Result<()> {
    if y.is_finite() && y >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("y must be >= 1, got {y}")))
    }
}

impl TailBound {
    pub fn params(&self) -> &TailBoundParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn alpha_exponent(&self) -> f64 {
        self.derived.alpha_exp
    }

    /// `1 − γδ`, the exponent of `m` inside the uniform bound.
    fn slack(&self) -> f64 {
        1.0 - self.params.gamma * self.params.delta
    }

    /// Premise bound `min(1, C₁ exp(−C₂ n x^γ))`.
    pub fn premise_tail(&self, n: u64, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::domain(format!("x must be > 0, got {x}")));
        }
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        let p = &self.params;
        let log = p.c1.ln() - p.c2 * n as f64 * x.powf(p.gamma);
        Ok(log.exp().min(1.0))
    }

    /// `C′₁ · m · exp(−C₂ m^{1−γδ} y^γ)` before clamping.
    pub fn uniform_tail_bound_unclamped(&self, m: f64, y: f64) -> Result<f64> {
        require_y(y)?;
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::domain(format!("m must be >= 1, got {m}")));
        }
        let p = &self.params;
        let log = self.derived.c1_prime.ln() + m.ln()
            - p.c2 * m.powf(self.slack()) * y.powf(p.gamma);
        Ok(log.exp())
    }

    /// Bound on `P(∃k ≥ m+1: X_k ≥ C₀k^{−β} + k^{−δ}y)`, clamped to 1.
    pub fn uniform_tail_bound(&self, m: u64, y: f64) -> Result<f64> {
        if m == 0 {
            return Err(Error::domain("m must be >= 1"));
        }
        Ok(self.uniform_tail_bound_unclamped(m as f64, y)?.min(1.0))
    }

    /// Threshold `C₀/(1−β) n^{−β} + 3/(1−δ) n^{−δ} y` and the probability
    /// bound `min(1, C₄ n^α exp(−C₂ n^{α(1−γδ)} y^γ))` on exceeding it.
    pub fn cesaro_tail_bound(&self, n: u64, y: f64) -> Result<CesaroTail> {
        require_y(y)?;
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        let p = &self.params;
        let d = &self.derived;
        let nf = n as f64;
        let threshold = p.c0 / (1.0 - p.beta) * nf.powf(-p.beta)
            + 3.0 / (1.0 - p.delta) * nf.powf(-p.delta) * y;
        let log = d.c4.ln() + d.alpha_exp * nf.ln()
            - p.c2 * nf.powf(d.alpha_exp * self.slack()) * y.powf(p.gamma);
        Ok(CesaroTail {
            threshold,
            prob_bound: log.exp().min(1.0),
        })
    }

    /// Smallest `n₀` such that the Cesàro probability bound is
    /// non-increasing in `n` on `[n₀, ∞)` for every `y ≥ 1`.
    ///
    /// The log-derivative in `n` is `(α − α(1−γδ)·C₂ n^{α(1−γδ)} y^γ)/n`,
    /// non-positive once `C₂(1−γδ) n^{α(1−γδ)} ≥ 1`.
    pub fn monotone_from(&self) -> u64 {
        let s = self.slack();
        let e = self.derived.alpha_exp * s;
        let n0 = (1.0 / (self.params.c2 * s)).powf(1.0 / e).ceil();
        if n0.is_finite() {
            n0.max(1.0) as u64
        } else {
            u64::MAX
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, gamma: f64, delta: f64) -> TailBoundParams {
        TailBoundParams {
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            beta,
            gamma,
            delta,
        }
    }

    fn reference() -> TailBound {
        params(0.5, 1.0, 0.75).validate().unwrap()
    }

    #[test]
    fn accepts_strict_interior() {
        assert!(params(0.5, 1.0, 0.75).validate().is_ok());
    }

    #[test]
    fn rejects_gamma_at_or_above_inverse_beta() {
        let err = params(0.5, 2.5, 0.3).validate().unwrap_err().to_string();
        assert!(err.contains("gamma must be < 1/beta"), "{err}");
        let err = params(0.5, 2.0, 0.3).validate().unwrap_err().to_string();
        assert!(err.contains("gamma must be < 1/beta"), "{err}");
    }

    #[test]
    fn rejects_delta_on_beta_boundary() {
        let err = params(0.5, 1.0, 0.5).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParam { field: "delta", .. }));
        assert!(err.to_string().contains("delta must exceed beta"));
    }

    #[test]
    fn rejects_delta_at_upper_window() {
        let err = params(0.5, 1.0, 1.0).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParam { field: "delta", .. }));
        let err = params(0.3, 2.0, 0.5).validate().unwrap_err();
        assert!(matches!(err, Error::InvalidParam { field: "delta", .. }));
    }

    #[test]
    fn rejects_bad_scalars() {
        let mut p = params(0.5, 1.0, 0.75);
        p.c0 = -1.0;
        assert!(p.validate().is_err());
        p.c0 = 0.0;
        p.c1 = 0.0;
        assert!(p.validate().is_err());
        p.c1 = 1.0;
        p.c2 = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn alpha_exponent_values() {
        let a = |g: f64, d: f64| params(0.4, g, d).validate().unwrap().alpha_exponent();
        assert!((a(1.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((a(0.5, 0.5) - 0.25).abs() < 1e-15);
        assert!((a(1.0, 0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derived_constants_for_reference_params() {
        let d = *reference().derived();
        assert_eq!(d.kappa, 4.0);
        assert_eq!(d.q, 3);
        // 4 · 4! · max(1, 1) + 1
        assert_eq!(d.c3, 97.0);
        assert_eq!(d.c1_prime, 97.0);
        assert_eq!(d.c4, 195.0);
        assert!(d.c4 >= d.c1_prime);
    }

    #[test]
    fn premise_tail_examples() {
        let tb = reference();
        assert!((tb.premise_tail(1, std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);

        let mut p = *tb.params();
        p.c1 = 10.0;
        let tb10 = p.validate().unwrap();
        assert_eq!(tb10.premise_tail(10, 0.01).unwrap(), 1.0);

        let mut p = *tb.params();
        p.c2 = 2.0;
        p.gamma = 0.5;
        p.delta = 0.75;
        let tb = p.validate().unwrap();
        let v = tb.premise_tail(100, 4.0).unwrap();
        assert_eq!(v, (-400.0f64).exp());
    }

    #[test]
    fn premise_tail_rejects_nonpositive_x() {
        assert!(matches!(reference().premise_tail(3, 0.0), Err(Error::Domain(_))));
        assert!(matches!(reference().premise_tail(3, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_bound_example() {
        let tb = reference();
        let raw = tb.uniform_tail_bound_unclamped(16.0, 2.0).unwrap();
        let expected = 97.0 * 16.0 * (-(16f64.powf(0.25)) * 2.0).exp();
        assert!((raw - expected).abs() <= 1e-12 * expected);
        assert_eq!(tb.uniform_tail_bound(16, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_bound_decays_in_y() {
        let tb = reference();
        let mut last = f64::INFINITY;
        for y in [1.0, 10.0, 100.0, 600.0] {
            let v = tb.uniform_tail_bound_unclamped(1.0, y).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(last > 0.0 && last < 1e-200);
        assert!(tb.uniform_tail_bound(1, 0.5).is_err());
        assert!(tb.uniform_tail_bound(0, 2.0).is_err());
    }

    #[test]
    fn cesaro_threshold_example() {
        let tb = reference();
        let out = tb.cesaro_tail_bound(256, 1.0).unwrap();
        let expected = 2.0 * 256f64.powf(-0.5) + 12.0 * 256f64.powf(-0.75);
        assert!((out.threshold - expected).abs() < 1e-15);
        let raw = 195.0 * 16.0 * (-(256f64.powf(0.125))).exp();
        assert_eq!(out.prob_bound, raw.min(1.0));
    }

    #[test]
    fn zero_offset_threshold() {
        let mut p = *reference().params();
        p.c0 = 0.0;
        let tb = p.validate().unwrap();
        for n in [1u64, 7, 1000] {
            for y in [1.0, 3.5] {
                let t = tb.cesaro_tail_bound(n, y).unwrap().threshold;
                assert_eq!(t, 3.0 / (1.0 - 0.75) * (n as f64).powf(-0.75) * y);
            }
        }
    }

    #[test]
    fn cesaro_bound_monotone_in_y() {
        let tb = reference();
        for n in [1u64, 64, 4096, 1 << 20, 1 << 40] {
            let vals: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
                .iter()
                .map(|&y| tb.cesaro_tail_bound(n, y).unwrap().prob_bound)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
        }
    }

    #[test]
    fn monotone_from_threshold_for_reference() {
        let tb = reference();
        // (1/(C₂·0.25))^{1/0.125} = 4^8
        assert_eq!(tb.monotone_from(), 65536);
    }
}
