//! Batch front end: JSON configs in, CSV/JSON results and a manifest out.
//!
//! Exit codes: `0` success, `2` configuration error, `3` runtime error,
//! `4` a check raised a flag (analytic bound violated, supermartingale
//! condition failed, decomposition identity or Cauchy–Schwarz check failed).

mod config;
mod manifest;
mod run;

pub use config::{
    parse_config, to_json, AsDiagExp, AuiExp, BayesRiskExp, BoundTableExp, ConfigError,
    CounterexampleExp, Experiment, ExpboundExp, L1Exp, MarMeanExp, McSettings, OutputSettings,
    RunConfig, SupermartExp, SCHEMA_VERSION,
};
pub use manifest::{now_rfc3339, sha256_hex, OutputDigest, RunManifest};
pub use run::{
    apply_overrides, bound_table, execute, load_config, run, Overrides, RunError, RunOutcome,
    CS_TOL, DEFAULT_OUT_DIR, EXIT_CONFIG, EXIT_FLAGGED, EXIT_OK, EXIT_RUNTIME, IDENTITY_TOL,
};
