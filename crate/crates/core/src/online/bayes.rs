//! Online estimation of the Bayes risk.
//!
//! With `X ~ U[0,1]^d`, `Y | X ~ Bernoulli(η(X))` and 0-1 loss, the online
//! estimator `R̂_n = n⁻¹ Σ ℓ(f̂_{i−1})(X_i, Y_i)` splits as
//! `R̂_n − R* = M_n + n⁻¹ Σ {R(f̂_{i−1}) − R*}` where `M_n` averages the
//! martingale differences `ℓ(f̂_{i−1})(X_i, Y_i) − R(f̂_{i−1})`.
//!
//! Classifier risks are integrated along lines in `x₁`: the decision
//! boundary `η̂ = 1/2` is located by a sign scan on the cell grid plus
//! bisection, and `∫η` over each piece comes from a cumulative table.
//! Two boundary crossings inside one cell are not resolved.

use serde::{Deserialize, Serialize};

use super::models::{amplitude, perturbation, SmoothModel};
use super::quadrature::{axis_rule, check_dim, default_cells, gl3};
use super::{dyadic_grid, PrefixPoint};
use crate::cesaro::CompensatedSum;
use crate::sequences::{unit, Seed};
use crate::{Error, Result};

/// Known regression `η(x) = P(Y = 1 | X = x)` with its Bayes risk.
#[derive(Debug, Clone)]
pub struct BayesRiskDgp {
    eta: SmoothModel,
    dim: usize,
    lines: Vec<Line>,
    bayes_risk: f64,
}

/// Perturbed plug-in classifiers `f̂_i = sign(2η̂_i − 1)`,
/// `η̂_i = clamp(η + max(i,1)^{−r}·scale·ξ, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSchedule {
    pub rate_r: f64,
    pub perturb_scale: f64,
}

impl EstimatorSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_r.is_finite() && self.rate_r > 0.0) {
            return Err(Error::param("rate_r", format!("rate_r must be > 0, got {}", self.rate_r)));
        }
        if !(self.perturb_scale.is_finite() && self.perturb_scale >= 0.0) {
            return Err(Error::param(
                "perturb_scale",
                format!("perturb_scale must be >= 0, got {}", self.perturb_scale),
            ));
        }
        Ok(())
    }
}

/// One line `{(t, x₂) : t ∈ [0, 1]}` of the integration domain.
#[derive(Debug, Clone)]
struct Line {
    weight: f64,
    x2: Option<f64>,
    eta: Vec<f64>,
    xi: Vec<f64>,
    /// `cum[k] = ∫_0^{k/N} η`.
    cum: Vec<f64>,
}

impl BayesRiskDgp {
    pub fn new(eta: SmoothModel, dim: usize) -> Result<Self> {
        Self::with_cells(eta, dim, default_cells(dim))
    }

    pub fn with_cells(eta: SmoothModel, dim: usize, cells: usize) -> Result<Self> {
        check_dim(dim, cells)?;
        eta.check_range("eta", 0.0, 1.0)?;
        let outer: Vec<(Option<f64>, f64)> = if dim == 1 {
            vec![(None, 1.0)]
        } else {
            axis_rule(cells).into_iter().map(|(y, w)| (Some(y), w)).collect()
        };
        let h = 1.0 / cells as f64;
        let lines = outer
            .into_iter()
            .map(|(x2, weight)| {
                let at = |t: f64| point(t, x2);
                let eta_n: Vec<f64> = (0..=cells).map(|k| eta.eval(&at(k as f64 * h)[..dim])).collect();
                let xi_n: Vec<f64> = (0..=cells).map(|k| perturbation(&at(k as f64 * h)[..dim])).collect();
                let mut cum = Vec::with_capacity(cells + 1);
                let mut acc = CompensatedSum::new();
                cum.push(0.0);
                for (a, w) in axis_rule(cells).chunks(2).map(|c| (c[0], c[1])) {
                    acc.add(a.1 * eta.eval(&at(a.0)[..dim]) + w.1 * eta.eval(&at(w.0)[..dim]));
                    cum.push(acc.value());
                }
                Line {
                    weight,
                    x2,
                    eta: eta_n,
                    xi: xi_n,
                    cum,
                }
            })
            .collect();
        let mut dgp = Self {
            eta,
            dim,
            lines,
            bayes_risk: 0.0,
        };
        dgp.bayes_risk = dgp.classifier_risk(0.0);
        Ok(dgp)
    }

    pub fn eta(&self) -> &SmoothModel {
        &self.eta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R* = E min(η, 1 − η)`.
    pub fn bayes_risk(&self) -> f64 {
        self.bayes_risk
    }

    fn cells(&self) -> usize {
        self.lines[0].eta.len() - 1
    }

    /// Score `η + a·ξ − 1/2`; the classifier predicts 1 where it is `≥ 0`.
    #[inline]
    fn score(&self, x: &[f64], a: f64) -> f64 {
        self.eta.eval(x) + a * perturbation(x) - 0.5
    }

    /// Risk `P(f(X) ≠ Y)` of the classifier with perturbation amplitude `a`.
    pub fn classifier_risk(&self, a: f64) -> f64 {
        let mut total = CompensatedSum::new();
        for line in &self.lines {
            total.add(line.weight * self.line_risk(line, a));
        }
        total.value()
    }

    fn line_risk(&self, line: &Line, a: f64) -> f64 {
        let n = self.cells();
        let h = 1.0 / n as f64;
        let dim = self.dim;
        let score_at = |t: f64| self.score(&point(t, line.x2)[..dim], a);
        let eta_at = |t: f64| self.eta.eval(&point(t, line.x2)[..dim]);
        let cum_to = |t: f64| -> f64 {
            let c = ((t * n as f64) as usize).min(n - 1);
            let x0 = c as f64 * h;
            line.cum[c] + gl3(x0, t, eta_at)
        };
        let sign = |k: usize| line.eta[k] + a * line.xi[k] - 0.5 >= 0.0;

        let mut risk = CompensatedSum::new();
        let mut piece = |lo: f64, hi: f64, positive: bool, cum_lo: f64, cum_hi: f64| {
            let int_eta = cum_hi - cum_lo;
            risk.add(if positive { (hi - lo) - int_eta } else { int_eta });
        };

        let mut start = 0.0;
        let mut cum_start = 0.0;
        let mut cur = sign(0);
        for k in 0..n {
            let next = sign(k + 1);
            if next != cur {
                let root = bisect(k as f64 * h, (k + 1) as f64 * h, cur, &score_at);
                let cum_root = cum_to(root);
                piece(start, root, cur, cum_start, cum_root);
                start = root;
                cum_start = cum_root;
                cur = next;
            }
        }
        piece(start, 1.0, cur, cum_start, line.cum[n]);
        risk.value()
    }

    /// Draw `(X, Y)` from one word per coordinate plus one for `Y`.
    fn draw(&self, rng: &mut impl rand_core::RngCore) -> ([f64; 2], bool) {
        let mut x = [0.0; 2];
        for xi in x.iter_mut().take(self.dim) {
            *xi = unit(rng.next_u64());
        }
        let y = unit(rng.next_u64()) < self.eta.eval(&x[..self.dim]);
        (x, y)
    }
}

fn point(t: f64, x2: Option<f64>) -> [f64; 2] {
    [t, x2.unwrap_or(0.0)]
}

/// Root of a score that has sign `left_positive` at `lo` and the opposite at `hi`.
fn bisect(mut lo: f64, mut hi: f64, left_positive: bool, f: &impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) >= 0.0) == left_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-step conditional risks of a schedule; independent of the seed.
#[derive(Debug, Clone)]
pub struct BayesRiskSteps {
    dgp: BayesRiskDgp,
    amplitudes: Vec<f64>,
    /// `R(f̂_i)` for `i = 0..n−1`.
    pub risk: Vec<f64>,
    /// `R(f̂_i) − R*`.
    pub excess: Vec<f64>,
}

impl BayesRiskSteps {
    pub fn new(dgp: &BayesRiskDgp, sched: &EstimatorSchedule, n: u64) -> Result<Self> {
        sched.validate()?;
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        let amplitudes: Vec<f64> = (0..n)
            .map(|i| amplitude(i, sched.rate_r, sched.perturb_scale))
            .collect();
        let mut risk = Vec::with_capacity(n as usize);
        let mut last: Option<(f64, f64)> = None;
        for &a in &amplitudes {
            let r = match last {
                Some((la, lr)) if la == a => lr,
                _ => dgp.classifier_risk(a),
            };
            last = Some((a, r));
            risk.push(r);
        }
        let excess = risk.iter().map(|r| r - dgp.bayes_risk).collect();
        Ok(Self {
            dgp: dgp.clone(),
            amplitudes,
            risk,
            excess,
        })
    }

    pub fn len(&self) -> u64 {
        self.risk.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.risk.is_empty()
    }

    /// One online pass on stream `seed`.
    pub fn run(&self, seed: Seed) -> BayesRiskRun {
        let dgp = &self.dgp;
        let mut rng = seed.rng();
        let truth = dgp.bayes_risk;
        let grid = dyadic_grid(self.len());
        let mut loss = CompensatedSum::new();
        let mut mart = CompensatedSum::new();
        let mut rem = CompensatedSum::new();
        let mut points = Vec::with_capacity(grid.len());
        let mut g = grid.iter().peekable();
        for i in 1..=self.len() {
            let step = (i - 1) as usize;
            let (x, y) = dgp.draw(&mut rng);
            let predict_one = dgp.score(&x[..dgp.dim], self.amplitudes[step]) >= 0.0;
            let l = if predict_one != y { 1.0 } else { 0.0 };
            loss.add(l);
            mart.add(l - self.risk[step]);
            rem.add(self.excess[step]);
            if g.peek() == Some(&&i) {
                g.next();
                let nf = i as f64;
                let estimate = loss.value() / nf;
                let martingale_part = mart.value() / nf;
                let remainder_avg = rem.value() / nf;
                points.push(PrefixPoint {
                    n: i,
                    estimate,
                    error: estimate - truth,
                    martingale_part,
                    remainder_avg,
                    residual: (estimate - truth) - martingale_part - remainder_avg,
                });
            }
        }
        BayesRiskRun {
            truth,
            points,
            diff_bound: 1.0,
        }
    }
}

/// Decomposition of one online Bayes-risk run on the dyadic prefix grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesRiskRun {
    /// `R*`.
    pub truth: f64,
    pub points: Vec<PrefixPoint>,
    /// Bound on `|ℓ − R(f̂)|` for the Azuma level.
    pub diff_bound: f64,
}

impl BayesRiskRun {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max)
    }
}

/// Run the online Bayes-risk estimator for `n` steps.
pub fn run_bayes_risk(
    dgp: &BayesRiskDgp,
    sched: &EstimatorSchedule,
    n: u64,
    seed: Seed,
) -> Result<BayesRiskRun> {
    Ok(BayesRiskSteps::new(dgp, sched, n)?.run(seed))
}
