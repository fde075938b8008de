//! Rates of convergence for Cesàro means of random sequences.
//!
//! The crate is a small laboratory around one question: if `n^β X_n`
//! converges to zero in some stochastic sense, what can be said about
//! `n^β X̄_n`, where `X̄_n` is the running average of the first `n` terms?
//!
//! - [`cesaro`]: deterministic running means, block means and scaled means.
//! - [`bounds`]: closed-form tail bounds, the `I_q` integral, normal CDF and
//!   the Berry–Esseen margin for the block-Bernoulli counterexample.
//! - [`sequences`]: seedable generators for every sequence family studied.
//! - [`mc`]: a deterministic, parallel Monte Carlo engine and its diagnostics.
//! - [`online`]: online Bayes-risk and missing-at-random mean estimators with
//!   their martingale + remainder decompositions.
//! - [`cli`]: JSON experiment configs, dispatch and result files.

pub mod bounds;
pub mod cesaro;
pub mod cli;
mod error;
pub mod mc;
pub mod online;
pub mod sequences;

pub use error::{Error, Result};
