//! Dispatch a configuration and write its result files.

use std::fmt;
use std::path::{Path, PathBuf};

use super::config::{
    parse_config, to_json, BayesRiskExp, ConfigError, Experiment, MarMeanExp, RunConfig,
};
use super::manifest::{now_rfc3339, sha256_hex, OutputDigest, RunManifest};
use crate::bounds::TailBoundParams;
use crate::cesaro::ScaledRate;
use crate::mc::{self, ExperimentResult, MeanEstimate, TailEstimate};
use crate::online::{self, default_cells, BayesRiskDgp, BayesRiskSteps, MarDgp, MarSteps};
use crate::sequences::{CounterexampleSpec, SequenceSpec};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_FLAGGED: i32 = 4;

/// Largest tolerated decomposition residual.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Slack for the Cauchy–Schwarz remainder check.
pub const CS_TOL: f64 = 1e-8;

pub const DEFAULT_OUT_DIR: &str = "results";

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Runtime(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// What a completed run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: ExperimentResult,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.result.flags.is_empty() {
            EXIT_OK
        } else {
            EXIT_FLAGGED
        }
    }

    /// The one-line stdout summary.
    pub fn summary(&self) -> String {
        format!(
            "{} {}: {} rows, {} flags -> {}",
            if self.result.flags.is_empty() { "ok" } else { "FLAGGED" },
            self.result.experiment,
            self.result.rows.len(),
            self.result.flags.len(),
            self.csv_path.display()
        )
    }
}

/// Read, parse and validate a config file.
pub fn load_config(path: &Path) -> std::result::Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        RunError::Config(ConfigError {
            path: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        })
    })?;
    Ok(parse_config(&text)?)
}

/// Apply overrides and re-validate.
pub fn apply_overrides(
    mut cfg: RunConfig,
    o: &Overrides,
) -> std::result::Result<RunConfig, ConfigError> {
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(w) = o.workers {
        if let Some(mc) = cfg.monte_carlo.as_mut() {
            mc.workers = w;
        }
    }
    if let Some(dir) = &o.out_dir {
        cfg.output.dir = Some(dir.to_string_lossy().into_owned());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Compute the result rows without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<ExperimentResult> {
    let mut res = match &cfg.experiment {
        Experiment::Counterexample(e) => {
            let spec = CounterexampleSpec::new(e.alpha, e.beta, e.bound_b)?;
            mc::counterexample_sweep(&spec, e.m, &e.k_grid, &cfg.mc_config(Vec::new()))?
        }
        Experiment::L1(e) => {
            mc::estimate_scaled_l1(&e.sequence, ScaledRate::new(e.beta)?, &cfg.mc_config(e.n_grid.clone()))?
        }
        Experiment::AsDiag(e) => mc::path_sup_diagnostic(
            &e.sequence,
            ScaledRate::new(e.beta)?,
            &e.m_grid,
            e.n_cap,
            e.epsilon,
            &cfg.mc_config(Vec::new()),
        )?,
        Experiment::Aui(e) => mc::aui_tail_diagnostic(
            &e.sequence,
            ScaledRate::new(e.beta)?,
            e.q,
            &e.x_grid,
            &cfg.mc_config(e.n_grid.clone()),
        )?,
        Experiment::Supermart(e) => mc::supermartingale_condition_check(
            &e.sequence,
            ScaledRate::new(e.beta)?,
            &cfg.mc_config(e.n_grid.clone()),
        )?,
        Experiment::Expbound(e) => mc::bound_vs_empirical(
            &e.params,
            &SequenceSpec::ExpTail(e.params),
            &e.y_grid,
            &cfg.mc_config(e.n_grid.clone()),
        )?,
        Experiment::BoundTable(e) => bound_table(&e.params, &e.n_grid, &e.y_grid, cfg.seed)?,
        Experiment::BayesRisk(e) => bayes_risk(e, cfg)?,
        Experiment::MarMean(e) => mar_mean(e, cfg)?,
    };
    res.metadata = serde_json::json!({ "config": cfg });
    if let Some(params) = analytic_params(&cfg.experiment) {
        let tb = params.validate()?;
        res.metadata["derived"] = serde_json::to_value(tb.derived())?;
    }
    Ok(res)
}

fn analytic_params(e: &Experiment) -> Option<&TailBoundParams> {
    match e {
        Experiment::BoundTable(b) => Some(&b.params),
        Experiment::Expbound(b) => Some(&b.params),
        _ => None,
    }
}

/// Analytic table of the Cesàro tail bound over `n_grid × y_grid`.
pub fn bound_table(
    params: &TailBoundParams,
    n_grid: &[u64],
    y_grid: &[f64],
    seed: u64,
) -> Result<ExperimentResult> {
    let tb = params.validate()?;
    let mut res = ExperimentResult::new("bound_table", "analytic", seed, 0);
    for &n in n_grid {
        for &y in y_grid {
            let b = tb.cesaro_tail_bound(n, y)?;
            res.push(n, Some(y), "threshold", b.threshold, None);
            res.push(n, Some(y), "prob_bound", b.prob_bound, None);
        }
    }
    Ok(res)
}

fn bayes_risk(e: &BayesRiskExp, cfg: &RunConfig) -> Result<ExperimentResult> {
    let mc_cfg = cfg.mc_config(Vec::new());
    mc_cfg.validate()?;
    let dgp = BayesRiskDgp::with_cells(e.eta, e.dim, e.cells.unwrap_or_else(|| default_cells(e.dim)))?;
    let steps = BayesRiskSteps::new(&dgp, &e.schedule, e.n)?;
    let runs = mc::replicate(&mc_cfg, |seed| Ok(steps.run(seed)))?;

    let mut res = ExperimentResult::new("bayes_risk", "bayes_risk", cfg.seed, mc_cfg.replications);
    res.push(e.n, None, "bayes_risk", dgp.bayes_risk(), None);
    for (j, p) in runs[0].points.iter().enumerate() {
        let n = p.n;
        res.push(n, None, "r_hat", p.estimate, None);
        res.push(n, None, "error", p.error, None);
        res.push(n, None, "martingale_part", p.martingale_part, None);
        res.push(n, None, "remainder_avg", p.remainder_avg, None);
        res.push(n, None, "identity_residual", p.residual, None);
        res.push(n, None, "excess_risk_step", steps.excess[(n - 1) as usize], None);

        let level = online::azuma_bound(n, runs[0].diff_bound, e.azuma_conf)?;
        let hits = runs
            .iter()
            .filter(|r| r.points[j].martingale_part.abs() > level)
            .count() as u64;
        let t = TailEstimate::new(hits, mc_cfg.replications, mc_cfg.confidence)?;
        res.push_tail(n, Some(level), "azuma_violation", &t);
        let m: Vec<f64> = runs.iter().map(|r| r.points[j].martingale_part).collect();
        res.push_mean(n, None, "martingale_part_mean", &MeanEstimate::from_values(&m, mc_cfg.confidence)?);
    }
    let worst = runs.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    res.push(e.n, None, "max_identity_residual", worst, None);
    if worst > IDENTITY_TOL {
        res.flag(e.n, None, "identity_residual", format!("decomposition residual {worst} exceeds {IDENTITY_TOL}"));
    }
    Ok(res)
}

fn mar_mean(e: &MarMeanExp, cfg: &RunConfig) -> Result<ExperimentResult> {
    let mc_cfg = cfg.mc_config(Vec::new());
    mc_cfg.validate()?;
    let dgp = MarDgp::with_cells(e.g, e.q_bar, e.g_floor, e.dim, e.cells.unwrap_or_else(|| default_cells(e.dim)))?;
    let steps = MarSteps::new(&dgp, &e.schedule, e.n)?;
    let runs = mc::replicate(&mc_cfg, |seed| Ok(steps.run(seed)))?;

    let mut res = ExperimentResult::new("mar_mean", "mar", cfg.seed, mc_cfg.replications);
    res.push(e.n, None, "psi_true", dgp.psi_true(), None);
    for (j, p) in runs[0].points.iter().enumerate() {
        let n = p.n;
        let step = &steps.steps[(n - 1) as usize];
        res.push(n, None, "psi_hat", p.estimate, None);
        res.push(n, None, "error", p.error, None);
        res.push(n, None, "martingale_part", p.martingale_part, None);
        res.push(n, None, "remainder_avg", p.remainder_avg, None);
        res.push(n, None, "scaled_remainder", (n as f64).sqrt() * p.remainder_avg, None);
        res.push(n, None, "identity_residual", p.residual, None);
        res.push(n, None, "remainder_step", step.remainder, None);
        res.push(n, None, "cs_bound_step", step.cs_bound, None);

        let root_n: Vec<f64> = runs
            .iter()
            .map(|r| (n as f64).sqrt() * r.points[j].error)
            .collect();
        let est = MeanEstimate::from_values(&root_n, mc_cfg.confidence)?;
        res.push_mean(n, None, "root_n_error_mean", &est);
        res.push(n, None, "root_n_error_var", est.se * est.se * est.count as f64, None);
    }
    let violations = steps
        .steps
        .iter()
        .filter(|s| s.remainder.abs() > s.cs_bound + CS_TOL)
        .count();
    res.push(e.n, None, "cs_violations", violations as f64, None);
    if violations > 0 {
        res.flag(e.n, None, "cs_violations", format!("{violations} steps violate the Cauchy–Schwarz bound"));
    }
    let worst = runs.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
    res.push(e.n, None, "max_identity_residual", worst, None);
    if worst > IDENTITY_TOL {
        res.flag(e.n, None, "identity_residual", format!("decomposition residual {worst} exceeds {IDENTITY_TOL}"));
    }
    Ok(res)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(cfg.output.dir.as_deref().unwrap_or(DEFAULT_OUT_DIR))
}

fn write(dir: &Path, file: String, bytes: &[u8]) -> Result<(PathBuf, OutputDigest)> {
    let path = dir.join(&file);
    std::fs::write(&path, bytes)?;
    Ok((
        path,
        OutputDigest {
            file,
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        },
    ))
}

/// Execute `cfg` and write `<name>.csv`, `<name>.json` and
/// `<name>.manifest.json` to the output directory.
pub fn run(cfg: &RunConfig) -> std::result::Result<RunOutcome, RunError> {
    cfg.validate()?;
    let started_at = now_rfc3339();
    let result = execute(cfg).map_err(|e| match e {
        Error::InvalidParam { field, reason } => RunError::Config(ConfigError {
            path: field.to_owned(),
            message: reason,
        }),
        Error::Config(message) => RunError::Config(ConfigError {
            path: String::new(),
            message,
        }),
        other => RunError::Runtime(other),
    })?;
    let dir = out_dir(cfg);
    let io = |e: Error| RunError::Runtime(e);
    std::fs::create_dir_all(&dir).map_err(|e| io(e.into()))?;
    let name = &cfg.output.name;
    let csv = result.to_csv().map_err(io)?;
    let json = result.to_json().map_err(io)?;
    let (csv_path, csv_digest) = write(&dir, format!("{name}.csv"), csv.as_bytes()).map_err(io)?;
    let (json_path, json_digest) = write(&dir, format!("{name}.json"), json.as_bytes()).map_err(io)?;
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        experiment: cfg.experiment.kind().to_owned(),
        config_sha256: sha256_hex(to_json(cfg).as_bytes()),
        seed: cfg.seed,
        started_at,
        finished_at: now_rfc3339(),
        outputs: vec![csv_digest, json_digest],
    };
    let manifest_path = dir.join(format!("{name}.manifest.json"));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io(e.into()))?;
    std::fs::write(&manifest_path, text).map_err(|e| io(e.into()))?;
    Ok(RunOutcome {
        result,
        csv_path,
        json_path,
        manifest_path,
        manifest,
    })
}
