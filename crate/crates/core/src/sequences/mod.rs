//! Seedable generators for the random-sequence families.
//!
//! | family            | `X_i`                                                        |
//! |-------------------|--------------------------------------------------------------|
//! | `counterexample`  | `b · Bernoulli(p_{i,α})`, `p_{i,α} = (2^{⌊log₂ i⌋})^{−α}`    |
//! | `power_law`       | `i^{−r} · U_i`, `U_i ~ U[0, spread]`                         |
//! | `exp_tail`        | `C₀ i^{−β} + E_i`, `E_i ~ Exp(C₂ i)`                         |
//! | `supermartingale` | `X_1 = x₀`, `X_{i+1} = X_i V_i`, `V_i ~ U[0, 2c(1+1/i)^{−β}]` |
//! | `borel_cantelli`  | `i^{−β} Z_i`, `P(Z_i > x) = min(1, i^{−(1+a)} x^{−s})`       |
//!
//! Paths are infinite iterators; index `i` always consumes the `i`-th `u64`
//! of the stream (the supermartingale's first draw is discarded).

mod rng;

pub use rng::{unit, unit_open0, Seed};

use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::bounds::TailBoundParams;
use crate::cesaro::RealSeq;
use crate::{Error, Result};

/// Parameters of the block-Bernoulli counterexample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub bound_b: f64,
}

fn one() -> f64 {
    1.0
}

impl CounterexampleSpec {
    pub fn new(alpha: f64, beta: f64, bound_b: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            beta,
            bound_b,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.beta > self.alpha && self.beta < 1.0) {
            return Err(Error::param(
                "beta",
                format!("beta must lie in (alpha, 1), got {} with alpha = {}", self.beta, self.alpha),
            ));
        }
        if !(self.bound_b.is_finite() && self.bound_b > 0.0) {
            return Err(Error::param("bound_b", format!("bound_b must be > 0, got {}", self.bound_b)));
        }
        Ok(())
    }
}

/// A random-sequence family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Counterexample(CounterexampleSpec),
    PowerLaw { r: f64, spread: f64 },
    ExpTail(TailBoundParams),
    Supermartingale { beta: f64, contraction: f64, x0: f64 },
    BorelCantelli { beta: f64, a: f64, s: f64 },
}

fn nonneg(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("{field} must be finite and >= 0, got {v}")))
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("{field} must be finite and > 0, got {v}")))
    }
}

impl SequenceSpec {
    /// Family name as used in configs and result files.
    pub fn family(&self) -> &'static str {
        match self {
            SequenceSpec::Counterexample(_) => "counterexample",
            SequenceSpec::PowerLaw { .. } => "power_law",
            SequenceSpec::ExpTail(_) => "exp_tail",
            SequenceSpec::Supermartingale { .. } => "supermartingale",
            SequenceSpec::BorelCantelli { .. } => "borel_cantelli",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SequenceSpec::Counterexample(spec) => spec.validate(),
            SequenceSpec::PowerLaw { r, spread } => {
                positive("r", r)?;
                nonneg("spread", spread)
            }
            SequenceSpec::ExpTail(p) => {
                p.validate()?;
                if p.gamma != 1.0 || p.c1 != 1.0 {
                    return Err(Error::Unsupported(format!(
                        "exp_tail sampling needs gamma = 1 and c1 = 1, got gamma = {}, c1 = {}",
                        p.gamma, p.c1
                    )));
                }
                Ok(())
            }
            SequenceSpec::Supermartingale {
                beta,
                contraction,
                x0,
            } => {
                nonneg("beta", beta)?;
                if !(contraction > 0.0 && contraction <= 1.0) {
                    return Err(Error::param(
                        "contraction",
                        format!("contraction must lie in (0, 1], got {contraction}"),
                    ));
                }
                nonneg("x0", x0)
            }
            SequenceSpec::BorelCantelli { beta, a, s } => {
                nonneg("beta", beta)?;
                positive("a", a)?;
                positive("s", s)
            }
        }
    }

    /// Infinite path `X_1, X_2, …` for `seed`.
    pub fn path(&self, seed: Seed) -> Result<Path> {
        self.validate()?;
        let kind = match *self {
            SequenceSpec::Counterexample(c) => Kind::Counterexample {
                alpha: c.alpha,
                b: c.bound_b,
                block_end: 1,
                p: 1.0,
            },
            SequenceSpec::PowerLaw { r, spread } => Kind::PowerLaw { r, spread },
            SequenceSpec::ExpTail(p) => Kind::ExpTail {
                c0: p.c0,
                beta: p.beta,
                c2: p.c2,
            },
            SequenceSpec::Supermartingale {
                beta,
                contraction,
                x0,
            } => Kind::Supermartingale {
                beta,
                contraction,
                x: x0,
            },
            SequenceSpec::BorelCantelli { beta, a, s } => Kind::BorelCantelli {
                scale_exp: -beta - (1.0 + a) / s,
                inv_s: 1.0 / s,
            },
        };
        Ok(Path {
            kind,
            rng: seed.rng(),
            index: 0,
        })
    }

    /// First `n` terms of the path.
    pub fn sample(&self, n: usize, seed: Seed) -> Result<RealSeq> {
        if n == 0 {
            return Err(Error::domain("path length must be >= 1"));
        }
        RealSeq::new(self.path(seed)?.take(n).collect())
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Counterexample {
        alpha: f64,
        b: f64,
        block_end: u64,
        p: f64,
    },
    PowerLaw {
        r: f64,
        spread: f64,
    },
    ExpTail {
        c0: f64,
        beta: f64,
        c2: f64,
    },
    Supermartingale {
        beta: f64,
        contraction: f64,
        x: f64,
    },
    BorelCantelli {
        scale_exp: f64,
        inv_s: f64,
    },
}

/// Streaming realization of a [`SequenceSpec`].
#[derive(Debug, Clone)]
pub struct Path {
    kind: Kind,
    rng: ChaCha8Rng,
    index: u64,
}

impl Path {
    /// Index of the last term returned (0 before the first call).
    pub fn index(&self) -> u64 {
        self.index
    }
}

impl Iterator for Path {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        self.index += 1;
        let i = self.index;
        let word = self.rng.next_u64();
        let x = match &mut self.kind {
            Kind::Counterexample {
                alpha,
                b,
                block_end,
                p,
            } => {
                if i > *block_end {
                    let start = 1u64 << (63 - i.leading_zeros());
                    *block_end = start.saturating_mul(2) - 1;
                    *p = (start as f64).powf(-*alpha);
                }
                if unit(word) < *p {
                    *b
                } else {
                    0.0
                }
            }
            Kind::PowerLaw { r, spread } => (i as f64).powf(-*r) * (*spread * unit(word)),
            Kind::ExpTail { c0, beta, c2 } => {
                let fi = i as f64;
                *c0 * fi.powf(-*beta) - unit_open0(word).ln() / (*c2 * fi)
            }
            Kind::Supermartingale {
                beta,
                contraction,
                x,
            } => {
                if i > 1 {
                    let prev = (i - 1) as f64;
                    let width = 2.0 * *contraction * (1.0 + 1.0 / prev).powf(-*beta);
                    *x *= width * unit(word);
                }
                *x
            }
            Kind::BorelCantelli { scale_exp, inv_s } => {
                (i as f64).powf(*scale_exp) * unit_open0(word).powf(-*inv_s)
            }
        };
        Some(x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (usize::MAX, None)
    }
}

/// `p_{n,α} = (2^{⌊log₂ n⌋})^{−α}`.
pub fn block_bernoulli_prob(n: u64, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let start = 1u64 << (63 - n.leading_zeros());
    Ok((start as f64).powf(-alpha))
}

pub fn sample_counterexample(spec: &CounterexampleSpec, n: usize, seed: Seed) -> Result<RealSeq> {
    SequenceSpec::Counterexample(*spec).sample(n, seed)
}

pub fn sample_exp_tail(p: &TailBoundParams, n_max: usize, seed: Seed) -> Result<RealSeq> {
    SequenceSpec::ExpTail(*p).sample(n_max, seed)
}

pub fn sample_power_law(r: f64, spread: f64, n_max: usize, seed: Seed) -> Result<RealSeq> {
    SequenceSpec::PowerLaw { r, spread }.sample(n_max, seed)
}

pub fn sample_supermartingale(
    beta: f64,
    contraction: f64,
    x0: f64,
    n_max: usize,
    seed: Seed,
) -> Result<RealSeq> {
    SequenceSpec::Supermartingale {
        beta,
        contraction,
        x0,
    }
    .sample(n_max, seed)
}

pub fn sample_borel_cantelli(beta: f64, a: f64, s: f64, n_max: usize, seed: Seed) -> Result<RealSeq> {
    SequenceSpec::BorelCantelli { beta, a, s }.sample(n_max, seed)
}
