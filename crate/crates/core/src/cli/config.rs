//! Experiment configuration files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 1,
//!   "monte_carlo": { "replications": 400, "workers": 1, "confidence": 0.95 },
//!   "output": { "dir": "results", "name": "counterexample" },
//!   "experiment": { "kind": "counterexample", "alpha": 0.4, "beta": 0.6,
//!                   "m": 1.0, "k_grid": [8, 9, 10, 11, 12, 13, 14, 15, 16] }
//! }
//! ```
//!
//! Unknown fields are rejected at every level. Errors carry the dotted path
//! of the offending field.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::TailBoundParams;
use crate::mc::{MonteCarloConfig, MIN_REPLICATIONS};
use crate::online::{EstimatorSchedule, NuisanceSchedule, SmoothModel};
use crate::sequences::{CounterexampleSpec, SequenceSpec};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McSettings>,
    pub output: OutputSettings,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub replications: u64,
    #[serde(default = "one_worker")]
    pub workers: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn one_worker() -> usize {
    1
}

fn default_confidence() -> f64 {
    0.95
}

fn one() -> f64 {
    1.0
}

fn one_dim() -> usize {
    1
}

fn default_azuma_conf() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub name: String,
}

/// The experiment to run, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Counterexample(CounterexampleExp),
    L1(L1Exp),
    AsDiag(AsDiagExp),
    Aui(AuiExp),
    Supermart(SupermartExp),
    Expbound(ExpboundExp),
    BayesRisk(BayesRiskExp),
    MarMean(MarMeanExp),
    BoundTable(BoundTableExp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleExp {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub bound_b: f64,
    pub m: f64,
    pub k_grid: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1Exp {
    pub sequence: SequenceSpec,
    pub beta: f64,
    pub n_grid: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsDiagExp {
    pub sequence: SequenceSpec,
    pub beta: f64,
    pub m_grid: Vec<u64>,
    pub n_cap: u64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuiExp {
    pub sequence: SequenceSpec,
    pub beta: f64,
    pub q: f64,
    pub n_grid: Vec<u64>,
    pub x_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupermartExp {
    pub sequence: SequenceSpec,
    pub beta: f64,
    pub n_grid: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpboundExp {
    pub params: TailBoundParams,
    pub n_grid: Vec<u64>,
    pub y_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesRiskExp {
    pub eta: SmoothModel,
    #[serde(default = "one_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    pub schedule: EstimatorSchedule,
    pub n: u64,
    #[serde(default = "default_azuma_conf")]
    pub azuma_conf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarMeanExp {
    pub g: SmoothModel,
    pub q_bar: SmoothModel,
    pub g_floor: f64,
    #[serde(default = "one_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    pub schedule: NuisanceSchedule,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundTableExp {
    pub params: TailBoundParams,
    pub n_grid: Vec<u64>,
    pub y_grid: Vec<f64>,
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Counterexample(_) => "counterexample",
            Experiment::L1(_) => "l1",
            Experiment::AsDiag(_) => "as_diag",
            Experiment::Aui(_) => "aui",
            Experiment::Supermart(_) => "supermart",
            Experiment::Expbound(_) => "expbound",
            Experiment::BayesRisk(_) => "bayes_risk",
            Experiment::MarMean(_) => "mar_mean",
            Experiment::BoundTable(_) => "bound_table",
        }
    }

    /// Whether the experiment samples random paths.
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Experiment::BoundTable(_))
    }
}

/// A configuration problem located by a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn cerr(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

fn join(prefix: &str, field: &str) -> String {
    match (prefix.is_empty(), field.is_empty()) {
        (true, _) => field.to_owned(),
        (_, true) => prefix.to_owned(),
        _ => format!("{prefix}.{field}"),
    }
}

/// Attach a path to a library error; named parameters extend the prefix.
fn lift(prefix: &str, e: Error) -> ConfigError {
    match e {
        Error::InvalidParam { field, reason } => cerr(join(prefix, field), reason),
        other => cerr(prefix, other.to_string()),
    }
}

fn path_string(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." {
        String::new()
    } else {
        s
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| cerr("", format!("malformed JSON: {e}")))?;
    let cfg: RunConfig = match serde_path_to_error::deserialize(&value) {
        Ok(cfg) => cfg,
        Err(e) => {
            let path = path_string(e.path());
            if path == "experiment" {
                if let Some(better) = diagnose_experiment(&value["experiment"]) {
                    return Err(better);
                }
            }
            return Err(cerr(path, e.into_inner().to_string()));
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Re-parse the experiment body as its concrete variant to recover the
/// inner field path that tagged deserialization loses.
fn diagnose_experiment(value: &serde_json::Value) -> Option<ConfigError> {
    let mut body = value.as_object()?.clone();
    let kind = body.remove("kind")?;
    let body = serde_json::Value::Object(body);
    fn inner<T: serde::de::DeserializeOwned>(body: &serde_json::Value) -> Option<ConfigError> {
        serde_path_to_error::deserialize::<_, T>(body).err().map(|e| {
            cerr(
                join("experiment", &path_string(e.path())),
                e.into_inner().to_string(),
            )
        })
    }
    match kind.as_str()? {
        "counterexample" => inner::<CounterexampleExp>(&body),
        "l1" => inner::<L1Exp>(&body),
        "as_diag" => inner::<AsDiagExp>(&body),
        "aui" => inner::<AuiExp>(&body),
        "supermart" => inner::<SupermartExp>(&body),
        "expbound" => inner::<ExpboundExp>(&body),
        "bayes_risk" => inner::<BayesRiskExp>(&body),
        "mar_mean" => inner::<MarMeanExp>(&body),
        "bound_table" => inner::<BoundTableExp>(&body),
        _ => None,
    }
}

/// Serialize a configuration; [`parse_config`] inverts this exactly.
pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configs always serialize")
}

fn check_grid(path: &str, grid: &[u64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(cerr(path, "must be nonempty"));
    }
    crate::mc::check_grid(path, grid).map_err(|e| lift(path, e))
}

fn check_positive_list(path: &str, xs: &[f64], min: f64) -> Result<(), ConfigError> {
    if xs.is_empty() {
        return Err(cerr(path, "must be nonempty"));
    }
    if let Some((i, x)) = xs.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= min && **x > 0.0)) {
        return Err(cerr(format!("{path}[{i}]"), format!("must be finite and >= {min} (and > 0), got {x}")));
    }
    Ok(())
}

fn check_rate(path: &str, beta: f64) -> Result<(), ConfigError> {
    match crate::cesaro::ScaledRate::new(beta) {
        Ok(_) => Ok(()),
        Err(Error::InvalidParam { reason, .. }) => Err(cerr(path, reason)),
        Err(e) => Err(cerr(path, e.to_string())),
    }
}

fn check_sequence(seq: &SequenceSpec) -> Result<(), ConfigError> {
    seq.validate().map_err(|e| lift("experiment.sequence", e))
}

impl RunConfig {
    /// Monte Carlo settings as the engine consumes them.
    pub fn mc_config(&self, n_grid: Vec<u64>) -> MonteCarloConfig {
        let mc = self.monte_carlo.clone().unwrap_or(McSettings {
            replications: MIN_REPLICATIONS,
            workers: 1,
            confidence: 0.95,
        });
        MonteCarloConfig {
            replications: mc.replications,
            seed: self.seed,
            n_grid,
            confidence: mc.confidence,
            workers: mc.workers,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cerr(
                "schema_version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let name = &self.output.name;
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(cerr("output.name", format!("`{name}` is not a plain file stem")));
        }
        match &self.monte_carlo {
            Some(mc) => {
                if mc.replications < MIN_REPLICATIONS {
                    return Err(cerr(
                        "monte_carlo.replications",
                        format!("must be >= {MIN_REPLICATIONS}, got {}", mc.replications),
                    ));
                }
                if mc.workers == 0 {
                    return Err(cerr("monte_carlo.workers", "must be >= 1"));
                }
                if !(mc.confidence > 0.0 && mc.confidence < 1.0) {
                    return Err(cerr(
                        "monte_carlo.confidence",
                        format!("must lie in (0, 1), got {}", mc.confidence),
                    ));
                }
            }
            None if self.experiment.is_stochastic() => {
                return Err(cerr(
                    "monte_carlo",
                    format!("required for `{}` experiments", self.experiment.kind()),
                ));
            }
            None => {}
        }
        self.validate_experiment()
    }

    fn validate_experiment(&self) -> Result<(), ConfigError> {
        match &self.experiment {
            Experiment::Counterexample(e) => {
                CounterexampleSpec {
                    alpha: e.alpha,
                    beta: e.beta,
                    bound_b: e.bound_b,
                }
                .validate()
                .map_err(|err| lift("experiment", err))?;
                if !(e.m.is_finite() && e.m > 0.0) {
                    return Err(cerr("experiment.m", format!("must be > 0, got {}", e.m)));
                }
                if e.k_grid.is_empty() {
                    return Err(cerr("experiment.k_grid", "must be nonempty"));
                }
                if e.k_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(cerr("experiment.k_grid", "must be strictly increasing"));
                }
                if e.k_grid[0] < 2 || *e.k_grid.last().unwrap() > 30 {
                    return Err(cerr("experiment.k_grid", "entries must lie in [2, 30]"));
                }
            }
            Experiment::L1(e) => {
                check_sequence(&e.sequence)?;
                check_rate("experiment.beta", e.beta)?;
                check_grid("experiment.n_grid", &e.n_grid)?;
            }
            Experiment::AsDiag(e) => {
                check_sequence(&e.sequence)?;
                check_rate("experiment.beta", e.beta)?;
                check_grid("experiment.m_grid", &e.m_grid)?;
                if *e.m_grid.last().unwrap() >= e.n_cap {
                    return Err(cerr("experiment.n_cap", "must exceed max(m_grid)"));
                }
                if !(e.epsilon.is_finite() && e.epsilon > 0.0) {
                    return Err(cerr("experiment.epsilon", format!("must be > 0, got {}", e.epsilon)));
                }
            }
            Experiment::Aui(e) => {
                check_sequence(&e.sequence)?;
                check_rate("experiment.beta", e.beta)?;
                if !(e.q.is_finite() && e.q >= 1.0) {
                    return Err(cerr("experiment.q", format!("must be >= 1, got {}", e.q)));
                }
                check_grid("experiment.n_grid", &e.n_grid)?;
                check_positive_list("experiment.x_grid", &e.x_grid, 0.0)?;
            }
            Experiment::Supermart(e) => {
                if !matches!(e.sequence, SequenceSpec::Supermartingale { .. }) {
                    return Err(cerr(
                        "experiment.sequence.family",
                        format!("must be `supermartingale`, got `{}`", e.sequence.family()),
                    ));
                }
                check_sequence(&e.sequence)?;
                check_rate("experiment.beta", e.beta)?;
                check_grid("experiment.n_grid", &e.n_grid)?;
            }
            Experiment::Expbound(e) => {
                e.params.validate().map_err(|err| lift("experiment.params", err))?;
                SequenceSpec::ExpTail(e.params)
                    .validate()
                    .map_err(|err| lift("experiment.params", err))?;
                check_grid("experiment.n_grid", &e.n_grid)?;
                check_positive_list("experiment.y_grid", &e.y_grid, 1.0)?;
            }
            Experiment::BoundTable(e) => {
                e.params.validate().map_err(|err| lift("experiment.params", err))?;
                check_grid("experiment.n_grid", &e.n_grid)?;
                check_positive_list("experiment.y_grid", &e.y_grid, 1.0)?;
            }
            Experiment::BayesRisk(e) => {
                if !(1..=2).contains(&e.dim) {
                    return Err(cerr("experiment.dim", format!("must be 1 or 2, got {}", e.dim)));
                }
                if e.cells == Some(0) {
                    return Err(cerr("experiment.cells", "must be >= 1"));
                }
                e.eta
                    .check_range("eta", 0.0, 1.0)
                    .map_err(|err| lift("experiment", err))?;
                e.schedule.validate().map_err(|err| lift("experiment.schedule", err))?;
                if e.n == 0 {
                    return Err(cerr("experiment.n", "must be >= 1"));
                }
                if !(e.azuma_conf > 0.0 && e.azuma_conf < 1.0) {
                    return Err(cerr("experiment.azuma_conf", "must lie in (0, 1)"));
                }
            }
            Experiment::MarMean(e) => {
                if !(1..=2).contains(&e.dim) {
                    return Err(cerr("experiment.dim", format!("must be 1 or 2, got {}", e.dim)));
                }
                if e.cells == Some(0) {
                    return Err(cerr("experiment.cells", "must be >= 1"));
                }
                if !(e.g_floor > 0.0 && e.g_floor <= 1.0) {
                    return Err(cerr("experiment.g_floor", format!("must lie in (0, 1], got {}", e.g_floor)));
                }
                e.g.check_range("g", e.g_floor, 1.0)
                    .map_err(|err| lift("experiment", err))?;
                e.q_bar
                    .check_range("q_bar", 0.0, 1.0)
                    .map_err(|err| lift("experiment", err))?;
                e.schedule.validate().map_err(|err| lift("experiment.schedule", err))?;
                if e.n == 0 {
                    return Err(cerr("experiment.n", "must be >= 1"));
                }
            }
        }
        Ok(())
    }
}
