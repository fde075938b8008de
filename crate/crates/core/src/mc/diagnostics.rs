//! Monte Carlo estimators for the convergence diagnostics.

use super::result::ExperimentResult;
use super::stats::{MeanEstimate, TailEstimate};
use super::{check_grid, replicate, MonteCarloConfig};
use crate::bounds::{berry_esseen_margin, TailBoundParams};
use crate::cesaro::{CompensatedSum, RunningMean, ScaledRate};
use crate::sequences::{CounterexampleSpec, SequenceSpec};
use crate::{Error, Result};

fn count(flags: impl Iterator<Item = bool>) -> u64 {
    flags.filter(|&b| b).count() as u64
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Running means `X̄_n` at each grid point, from one path.
fn means_on_grid(spec: &SequenceSpec, grid: &[u64], seed: crate::sequences::Seed) -> Result<Vec<f64>> {
    let mut path = spec.path(seed)?;
    let mut mean = RunningMean::new();
    let mut out = Vec::with_capacity(grid.len());
    for &n in grid {
        while mean.len() < n {
            mean.push(path.next().expect("paths are infinite"));
        }
        out.push(mean.mean());
    }
    Ok(out)
}

/// `P(n^β X̄_n ≥ M)` from `R` paths of length `n`.
pub fn estimate_tail_prob(
    spec: &SequenceSpec,
    beta: ScaledRate,
    n: u64,
    m: f64,
    cfg: &MonteCarloConfig,
) -> Result<TailEstimate> {
    cfg.validate()?;
    spec.validate()?;
    positive("M", m)?;
    if !cfg.n_grid.contains(&n) {
        return Err(Error::Config(format!("n = {n} is not in n_grid")));
    }
    let hits = replicate(cfg, |seed| {
        let xbar = means_on_grid(spec, &[n], seed)?[0];
        Ok(beta.factor(n) * xbar >= m)
    })?;
    TailEstimate::new(count(hits.into_iter()), cfg.replications, cfg.confidence)
}

/// `n^β E|X̄_n|` over `n_grid`, with `E|X̄_n|` and `(1/n)Σ E|X_i|` alongside.
///
/// Rows: `l1`, `scaled_l1`, `scaled_l1_se`, `mean_abs_terms`.
pub fn estimate_scaled_l1(
    spec: &SequenceSpec,
    beta: ScaledRate,
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    spec.validate()?;
    let grid = cfg.grid()?;
    let per_rep = replicate(cfg, |seed| {
        let mut path = spec.path(seed)?;
        let mut mean = RunningMean::new();
        let mut abs_mean = RunningMean::new();
        let mut out = Vec::with_capacity(grid.len());
        for &n in grid {
            while mean.len() < n {
                let x = path.next().expect("paths are infinite");
                mean.push(x);
                abs_mean.push(x.abs());
            }
            out.push((mean.mean().abs(), abs_mean.mean()));
        }
        Ok(out)
    })?;

    let mut res = ExperimentResult::new("l1", spec.family(), cfg.seed, cfg.replications);
    for (j, &n) in grid.iter().enumerate() {
        let l1: Vec<f64> = per_rep.iter().map(|v| v[j].0).collect();
        let terms: Vec<f64> = per_rep.iter().map(|v| v[j].1).collect();
        let l1 = MeanEstimate::from_values(&l1, cfg.confidence)?;
        let terms = MeanEstimate::from_values(&terms, cfg.confidence)?;
        let scaled = l1.scaled(beta.factor(n));
        res.push_mean(n, None, "l1", &l1);
        res.push_mean(n, None, "scaled_l1", &scaled);
        res.push(n, None, "scaled_l1_se", scaled.se, None);
        res.push_mean(n, None, "mean_abs_terms", &terms);
    }
    Ok(res)
}

/// Finite-horizon proxy for almost-sure convergence:
/// `P(max_{m ≤ k ≤ n_cap} k^β |X̄_k| > ε)` for each `m` in `m_grid`.
///
/// Each path is summarized by the last index where `k^β|X̄_k| > ε`, which
/// answers every `m` at once. Rows: `sup_exceed` (threshold = ε).
pub fn path_sup_diagnostic(
    spec: &SequenceSpec,
    beta: ScaledRate,
    m_grid: &[u64],
    n_cap: u64,
    epsilon: f64,
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    spec.validate()?;
    positive("epsilon", epsilon)?;
    check_grid("m_grid", m_grid)?;
    match m_grid.last() {
        None => return Err(Error::Config("m_grid must be nonempty".into())),
        Some(&m) if m >= n_cap => {
            return Err(Error::Config(format!("max(m_grid) = {m} must be < n_cap = {n_cap}")))
        }
        _ => {}
    }
    let last_exceed = replicate(cfg, |seed| {
        let mut path = spec.path(seed)?;
        let mut mean = RunningMean::new();
        let mut last = 0u64;
        for k in 1..=n_cap {
            mean.push(path.next().expect("paths are infinite"));
            if (beta.factor(k) * mean.mean()).abs() > epsilon {
                last = k;
            }
        }
        Ok(last)
    })?;

    let mut res = ExperimentResult::new("as_diag", spec.family(), cfg.seed, cfg.replications);
    for &m in m_grid {
        let hits = count(last_exceed.iter().map(|&l| l >= m));
        let t = TailEstimate::new(hits, cfg.replications, cfg.confidence)?;
        res.push_tail(m, Some(epsilon), "sup_exceed", &t);
    }
    Ok(res)
}

/// `n^{βq} P(n^β |X_n| > x)` over `n_grid × x_grid`.
///
/// Rows: `tail_prob` (Wilson interval) and `aui_tail` (the scaled value).
pub fn aui_tail_diagnostic(
    spec: &SequenceSpec,
    beta: ScaledRate,
    q: f64,
    x_grid: &[f64],
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    spec.validate()?;
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::Config(format!("q must be >= 1, got {q}")));
    }
    if x_grid.is_empty() {
        return Err(Error::Config("x_grid must be nonempty".into()));
    }
    for &x in x_grid {
        positive("x", x)?;
    }
    let grid = cfg.grid()?;
    let terms = replicate(cfg, |seed| {
        let mut path = spec.path(seed)?;
        let mut out = Vec::with_capacity(grid.len());
        let mut x = 0.0;
        for &n in grid {
            while path.index() < n {
                x = path.next().expect("paths are infinite");
            }
            out.push(x.abs());
        }
        Ok(out)
    })?;

    let mut res = ExperimentResult::new("aui", spec.family(), cfg.seed, cfg.replications);
    for (j, &n) in grid.iter().enumerate() {
        let scale = beta.factor(n);
        let weight = (n as f64).powf(beta.beta() * q);
        for &x in x_grid {
            let hits = count(terms.iter().map(|v| scale * v[j] > x));
            let t = TailEstimate::new(hits, cfg.replications, cfg.confidence)?;
            res.push_tail(n, Some(x), "tail_prob", &t);
            res.push(
                n,
                Some(x),
                "aui_tail",
                weight * t.p_hat,
                Some((weight * t.ci_low, weight * t.ci_high)),
            );
        }
    }
    Ok(res)
}

/// Checks `(1+1/n)^β E|X_{n+1}| ≤ E|X_n|` on the supermartingale family.
///
/// Rows per `n`:
/// - `ratio`: path average of the one-step ratio `(1+1/n)^β |X_{n+1}|/|X_n|`.
///   The multiplicative shock is independent of the past, so this has the
///   same mean as the marginal ratio and a usable standard error.
/// - `ratio_se`.
/// - `marginal_ratio`: `(1+1/n)^β Σ|X_{n+1}| / Σ|X_n|` with a delta-method
///   interval. Heavy-tailed in `n`; see `effective_sample_size`.
/// - `effective_sample_size`: `(Σ|X_n|)² / Σ|X_n|²`.
/// - `zero_paths`: paths with `X_n = 0` (excluded from `ratio`).
///
/// A flag is raised wherever `ratio > 1 + 3·SE`.
pub fn supermartingale_condition_check(
    spec: &SequenceSpec,
    beta: ScaledRate,
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    if !matches!(spec, SequenceSpec::Supermartingale { .. }) {
        return Err(Error::Unsupported(format!(
            "supermartingale check needs the supermartingale family, got {}",
            spec.family()
        )));
    }
    cfg.validate()?;
    spec.validate()?;
    let grid = cfg.grid()?;
    let pairs = replicate(cfg, |seed| {
        let mut path = spec.path(seed)?;
        let mut prev = 0.0;
        let mut out = Vec::with_capacity(grid.len());
        for &n in grid {
            while path.index() < n {
                prev = path.next().expect("paths are infinite");
            }
            let now = prev.abs();
            prev = path.next().expect("paths are infinite");
            out.push((now, prev.abs()));
        }
        Ok(out)
    })?;

    let mut res = ExperimentResult::new("supermart", spec.family(), cfg.seed, cfg.replications);
    let z = super::z_critical(cfg.confidence)?;
    for (j, &n) in grid.iter().enumerate() {
        let w = (1.0 + 1.0 / n as f64).powf(beta.beta());
        let ratios: Vec<f64> = pairs
            .iter()
            .map(|v| v[j])
            .filter(|&(a, _)| a > 0.0)
            .map(|(a, b)| w * b / a)
            .collect();
        let zeros = cfg.replications - ratios.len() as u64;
        if ratios.is_empty() {
            return Err(Error::domain(format!("every path is zero at n = {n}; ratio undefined")));
        }
        let ratio = MeanEstimate::from_values(&ratios, cfg.confidence)?;
        res.push_mean(n, None, "ratio", &ratio);
        res.push(n, None, "ratio_se", ratio.se, None);

        let xs: Vec<f64> = pairs.iter().map(|v| v[j].0).collect();
        let ys: Vec<f64> = pairs.iter().map(|v| v[j].1).collect();
        let r = cfg.replications as f64;
        let sx: CompensatedSum = xs.iter().copied().collect();
        let sy: CompensatedSum = ys.iter().copied().collect();
        let sxx: CompensatedSum = xs.iter().map(|x| x * x).collect();
        let (mx, my) = (sx.value() / r, sy.value() / r);
        let rhat = my / mx;
        let resid: CompensatedSum = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - rhat * x).powi(2))
            .collect();
        let se = (resid.value() / (r - 1.0)).sqrt() / (mx * r.sqrt());
        res.push(
            n,
            None,
            "marginal_ratio",
            w * rhat,
            Some((w * (rhat - z * se), w * (rhat + z * se))),
        );
        res.push(
            n,
            None,
            "effective_sample_size",
            sx.value() * sx.value() / sxx.value(),
            None,
        );
        res.push(n, None, "zero_paths", zeros as f64, None);

        if ratio.mean > 1.0 + 3.0 * ratio.se {
            res.flag(
                n,
                None,
                "ratio",
                format!(
                    "ratio {} exceeds 1 + 3 SE ({})",
                    ratio.mean,
                    1.0 + 3.0 * ratio.se
                ),
            );
        }
    }
    Ok(res)
}

/// Empirical exceedance of the Cesàro tail-bound threshold against the
/// analytic probability bound, over `n_grid × y_grid`.
///
/// Rows: `empirical_exceed` (Wilson interval) and `prob_bound`. A flag is
/// raised where the Wilson lower bound exceeds the analytic bound.
pub fn bound_vs_empirical(
    p: &TailBoundParams,
    spec: &SequenceSpec,
    y_grid: &[f64],
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    match spec {
        SequenceSpec::ExpTail(q) if q == p => {}
        _ => {
            return Err(Error::Unsupported(
                "bound_vs_empirical needs the exp_tail family built from the same parameters".into(),
            ))
        }
    }
    cfg.validate()?;
    spec.validate()?;
    let tb = p.validate()?;
    if y_grid.is_empty() {
        return Err(Error::Config("y_grid must be nonempty".into()));
    }
    if let Some(&y) = y_grid.iter().find(|y| !(y.is_finite() && **y >= 1.0)) {
        return Err(Error::Config(format!("y_grid entries must be >= 1, got {y}")));
    }
    let grid = cfg.grid()?;
    let means = replicate(cfg, |seed| means_on_grid(spec, grid, seed))?;

    let mut res = ExperimentResult::new("expbound", spec.family(), cfg.seed, cfg.replications);
    for (j, &n) in grid.iter().enumerate() {
        for &y in y_grid {
            let bound = tb.cesaro_tail_bound(n, y)?;
            let hits = count(means.iter().map(|v| v[j] >= bound.threshold));
            let t = TailEstimate::new(hits, cfg.replications, cfg.confidence)?;
            res.push_tail(n, Some(y), "empirical_exceed", &t);
            res.push(n, Some(y), "prob_bound", bound.prob_bound, None);
            res.push(n, Some(y), "mean_threshold", bound.threshold, None);
            if t.ci_low > bound.prob_bound {
                res.flag(
                    n,
                    Some(y),
                    "empirical_exceed",
                    format!(
                        "Wilson lower bound {} exceeds analytic bound {}",
                        t.ci_low, bound.prob_bound
                    ),
                );
            }
        }
    }
    Ok(res)
}

/// Non-tightness sweep for the counterexample along `n = 2^k`.
///
/// One path of length `2^{k_max} − 1` per replication serves every `k`.
/// Rows per `k` (reported at `n = 2^k − 1`, threshold `M`):
/// - `tail_prob`: `P(n^{−1} Σ_{i=n/2}^{n−1} X_i ≥ n^{−β} M)` with `n = 2^k`,
///   the block event used in the non-tightness argument;
/// - `tail_prob_full`: `P((2^k)^β X̄_{2^k−1} ≥ M)`;
/// - `be_margin`: the Berry–Esseen lower margin for the block event.
///
/// A flag is raised where `tail_prob < be_margin − 3 SE`.
pub fn counterexample_sweep(
    spec: &CounterexampleSpec,
    m: f64,
    k_grid: &[u32],
    cfg: &MonteCarloConfig,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    spec.validate()?;
    positive("M", m)?;
    if k_grid.is_empty() {
        return Err(Error::Config("k_grid must be nonempty".into()));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("k_grid must be strictly increasing, got {k_grid:?}")));
    }
    if k_grid[0] < 2 || *k_grid.last().unwrap() > 40 {
        return Err(Error::Config("k_grid entries must lie in [2, 40]".into()));
    }
    let k_max = *k_grid.last().unwrap();
    let family = SequenceSpec::Counterexample(*spec);
    let hits = replicate(cfg, |seed| {
        let mut path = family.path(seed)?;
        // prefix[j] = Σ_{i < 2^j} X_i
        let mut prefix = vec![0.0f64; k_max as usize + 1];
        let mut sum = CompensatedSum::new();
        for j in 1..=k_max {
            let end = (1u64 << j) - 1;
            while path.index() < end {
                sum.add(path.next().expect("paths are infinite"));
            }
            prefix[j as usize] = sum.value();
        }
        Ok(k_grid
            .iter()
            .map(|&k| {
                let n = (1u64 << k) as f64;
                let scale = n.powf(spec.beta);
                let block = prefix[k as usize] - prefix[k as usize - 1];
                let full = prefix[k as usize] / (n - 1.0);
                (scale * block / n >= m, scale * full >= m)
            })
            .collect::<Vec<_>>())
    })?;

    let mut res = ExperimentResult::new("counterexample", "counterexample", cfg.seed, cfg.replications);
    for (j, &k) in k_grid.iter().enumerate() {
        let n_row = (1u64 << k) - 1;
        let block = TailEstimate::new(count(hits.iter().map(|v| v[j].0)), cfg.replications, cfg.confidence)?;
        let full = TailEstimate::new(count(hits.iter().map(|v| v[j].1)), cfg.replications, cfg.confidence)?;
        let margin = berry_esseen_margin(1u64 << k, spec.alpha, spec.beta, m / spec.bound_b)?;
        res.push_tail(n_row, Some(m), "tail_prob", &block);
        res.push(n_row, Some(m), "tail_prob_se", block.se(), None);
        res.push_tail(n_row, Some(m), "tail_prob_full", &full);
        res.push(n_row, Some(m), "be_margin", margin, None);
        if block.p_hat < margin - 3.0 * block.se() {
            res.flag(
                n_row,
                Some(m),
                "tail_prob",
                format!("estimate {} below Berry–Esseen margin {margin} − 3 SE", block.p_hat),
            );
        }
    }
    Ok(res)
}
