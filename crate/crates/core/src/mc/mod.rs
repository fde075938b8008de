//! Reproducible parallel Monte Carlo.
//!
//! Replication `r` samples its path from stream `r` of the configured seed,
//! so each replication's output is a pure function of `(seed, r)`. Workers
//! return per-replication summaries that are collected in replication order
//! and reduced sequentially; results are bitwise identical for any worker
//! count.

mod diagnostics;
mod result;
mod stats;

pub use diagnostics::{
    aui_tail_diagnostic, bound_vs_empirical, counterexample_sweep, estimate_scaled_l1,
    estimate_tail_prob, path_sup_diagnostic, supermartingale_condition_check,
};
pub use result::{rows_from_csv, ExperimentResult, Flag, ResultRow, CSV_COLUMNS};
pub use stats::{le_within, pooled_se, wilson, z_critical, MeanEstimate, TailEstimate};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sequences::Seed;
use crate::{Error, Result};

/// Minimum replication count for interval-reporting operations.
pub const MIN_REPLICATIONS: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub replications: u64,
    pub seed: u64,
    /// Strictly increasing sample sizes; unused by operations with their own grid.
    #[serde(default)]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_confidence() -> f64 {
    0.95
}

fn default_workers() -> usize {
    1
}

impl MonteCarloConfig {
    pub fn new(replications: u64, seed: u64) -> Self {
        Self {
            replications,
            seed,
            n_grid: Vec::new(),
            confidence: default_confidence(),
            workers: default_workers(),
        }
    }

    pub fn with_n_grid(mut self, n_grid: Vec<u64>) -> Self {
        self.n_grid = n_grid;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Config(format!(
                "replications must be >= {MIN_REPLICATIONS}, got {}",
                self.replications
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        check_grid("n_grid", &self.n_grid)
    }

    /// `n_grid`, required to be nonempty.
    fn grid(&self) -> Result<&[u64]> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must be nonempty".into()));
        }
        Ok(&self.n_grid)
    }
}

/// Entries must be `>= 1` and strictly increasing.
pub(crate) fn check_grid(name: &str, grid: &[u64]) -> Result<()> {
    if grid.first() == Some(&0) {
        return Err(Error::Config(format!("{name} entries must be >= 1")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{name} must be strictly increasing, got {grid:?}")));
    }
    Ok(())
}

/// Run `f` once per replication on `workers` threads; outputs are returned
/// in replication order.
pub fn replicate<T, F>(cfg: &MonteCarloConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Seed) -> Result<T> + Sync,
{
    run_streams(cfg.seed, cfg.replications, cfg.workers, f)
}

pub(crate) fn run_streams<T, F>(seed: u64, replications: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Seed) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|r| {
                f(Seed::new(seed, r)).map_err(|e| Error::Worker {
                    replication: r,
                    message: e.to_string(),
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(MonteCarloConfig::new(30, 0).validate().is_ok());
        assert!(MonteCarloConfig::new(29, 0).validate().is_err());
        let c = MonteCarloConfig::new(30, 0).with_n_grid(vec![1, 5, 5]);
        assert!(c.validate().is_err());
        let c = MonteCarloConfig::new(30, 0).with_workers(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn replicate_preserves_order() {
        let cfg = MonteCarloConfig::new(100, 3).with_workers(4);
        let out = replicate(&cfg, |s| Ok(s.stream_id)).unwrap();
        assert_eq!(out, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn worker_error_names_replication() {
        let cfg = MonteCarloConfig::new(50, 3);
        let err = replicate(&cfg, |s| {
            if s.stream_id == 17 {
                Err(Error::domain("boom"))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Worker { replication: 17, .. }));
    }
}
