//! Online one-step estimation of a mean under missingness at random.
//!
//! Observations are `Z = (X, R, R·Y)` with `X ~ U[0,1]^d`,
//! `R | X ~ Bernoulli(g(X))` and `Y | X ~ Bernoulli(Q̄(X))` independent of
//! `R` given `X`. The target is `Ψ = E Q̄(X)`. With
//! `D(P̂)(x, r, y) = r{y − Q̂(x)}/ĝ(x) + Q̂(x) − Ψ(P̂)` the online estimator
//! `Ψ̂_n = n⁻¹ Σ {Ψ(P̂_{i−1}) + D(P̂_{i−1})(Z_i)}` satisfies
//! `Ψ̂_n − Ψ = M_n + n⁻¹ Σ Rem(P̂_{i−1})` with
//! `Rem(P̂) = E[(ĝ − g)(Q̂ − Q̄)/ĝ]`.

use serde::{Deserialize, Serialize};

use super::models::{amplitude, perturbation, SmoothModel};
use super::quadrature::{check_dim, default_cells, tensor_rule};
use super::{dyadic_grid, PrefixPoint};
use crate::cesaro::CompensatedSum;
use crate::sequences::{unit, Seed};
use crate::{Error, Result};

/// Known missingness and outcome regressions.
#[derive(Debug, Clone)]
pub struct MarDgp {
    g: SmoothModel,
    q_bar: SmoothModel,
    g_floor: f64,
    dim: usize,
    nodes: Vec<Node>,
    psi_true: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    w: f64,
    g: f64,
    q: f64,
    xi: f64,
}

/// Nuisance estimates `ĝ_i = clamp(g + max(i,1)^{−rate_g}·s_g·ξ, g_floor/2, 1)`
/// and `Q̂_i = Q̄ + max(i,1)^{−rate_q}·s_q·ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuisanceSchedule {
    pub rate_g: f64,
    pub rate_q: f64,
    pub perturb_scale_g: f64,
    pub perturb_scale_q: f64,
}

impl NuisanceSchedule {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("rate_g", self.rate_g), ("rate_q", self.rate_q)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(field, format!("{field} must be > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("perturb_scale_g", self.perturb_scale_g),
            ("perturb_scale_q", self.perturb_scale_q),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(field, format!("{field} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl MarDgp {
    pub fn new(g: SmoothModel, q_bar: SmoothModel, g_floor: f64, dim: usize) -> Result<Self> {
        Self::with_cells(g, q_bar, g_floor, dim, default_cells(dim))
    }

    pub fn with_cells(
        g: SmoothModel,
        q_bar: SmoothModel,
        g_floor: f64,
        dim: usize,
        cells: usize,
    ) -> Result<Self> {
        check_dim(dim, cells)?;
        if !(g_floor > 0.0 && g_floor <= 1.0) {
            return Err(Error::param("g_floor", format!("g_floor must lie in (0, 1], got {g_floor}")));
        }
        g.check_range("g", g_floor, 1.0)?;
        q_bar.check_range("q_bar", 0.0, 1.0)?;
        let nodes: Vec<Node> = tensor_rule(dim, cells)
            .into_iter()
            .map(|(x, w)| Node {
                w,
                g: g.eval(&x[..dim]),
                q: q_bar.eval(&x[..dim]),
                xi: perturbation(&x[..dim]),
            })
            .collect();
        let psi: CompensatedSum = nodes.iter().map(|n| n.w * n.q).collect();
        Ok(Self {
            g,
            q_bar,
            g_floor,
            dim,
            psi_true: psi.value(),
            nodes,
        })
    }

    /// `Ψ(P) = E Q̄(X)`.
    pub fn psi_true(&self) -> f64 {
        self.psi_true
    }

    pub fn g_floor(&self) -> f64 {
        self.g_floor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn g_hat(&self, g: f64, a: f64, xi: f64) -> f64 {
        (g + a * xi).clamp(self.g_floor / 2.0, 1.0)
    }

    /// Integrals describing `P̂` with amplitudes `(a_g, a_q)`.
    pub fn step_integrals(&self, a_g: f64, a_q: f64) -> MarStep {
        let mut psi = CompensatedSum::new();
        let mut ed = CompensatedSum::new();
        let mut rem = CompensatedSum::new();
        let mut g2 = CompensatedSum::new();
        let mut q2 = CompensatedSum::new();
        let mut g_min = f64::INFINITY;
        for n in &self.nodes {
            let gh = self.g_hat(n.g, a_g, n.xi);
            let qh = n.q + a_q * n.xi;
            let (dg, dq) = (gh - n.g, qh - n.q);
            psi.add(n.w * qh);
            ed.add(n.w * (n.g / gh * (n.q - qh) + qh));
            rem.add(n.w * dg * dq / gh);
            g2.add(n.w * dg * dg);
            q2.add(n.w * dq * dq);
            g_min = g_min.min(gh);
        }
        let psi_plugin = psi.value();
        let g_err_l2 = g2.value().sqrt();
        let q_err_l2 = q2.value().sqrt();
        MarStep {
            psi_plugin,
            cond_mean_d: ed.value() - psi_plugin,
            remainder: rem.value(),
            g_err_l2,
            q_err_l2,
            g_hat_min: g_min,
            cs_bound: g_err_l2 * q_err_l2 / g_min,
        }
    }
}

/// Per-step quantities of `P̂_i`, all integrated against the known law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarStep {
    /// `Ψ(P̂) = E Q̂(X)`.
    pub psi_plugin: f64,
    /// `E_P D(P̂)(Z)`.
    pub cond_mean_d: f64,
    /// `Rem(P̂, P)`.
    pub remainder: f64,
    /// `‖ĝ − g‖₂`.
    pub g_err_l2: f64,
    /// `‖Q̂ − Q̄‖₂`.
    pub q_err_l2: f64,
    pub g_hat_min: f64,
    /// `(min ĝ)⁻¹ ‖ĝ − g‖₂ ‖Q̂ − Q̄‖₂ ≥ |Rem|`.
    pub cs_bound: f64,
}

/// Step table of a nuisance schedule; independent of the seed.
#[derive(Debug, Clone)]
pub struct MarSteps {
    dgp: MarDgp,
    amps: Vec<(f64, f64)>,
    pub steps: Vec<MarStep>,
}

impl MarSteps {
    pub fn new(dgp: &MarDgp, sched: &NuisanceSchedule, n: u64) -> Result<Self> {
        sched.validate()?;
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        let amps: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                (
                    amplitude(i, sched.rate_g, sched.perturb_scale_g),
                    amplitude(i, sched.rate_q, sched.perturb_scale_q),
                )
            })
            .collect();
        let mut steps: Vec<MarStep> = Vec::with_capacity(n as usize);
        for (i, &(ag, aq)) in amps.iter().enumerate() {
            let s = match steps.last() {
                Some(prev) if amps[i - 1] == (ag, aq) => *prev,
                _ => dgp.step_integrals(ag, aq),
            };
            steps.push(s);
        }
        Ok(Self {
            dgp: dgp.clone(),
            amps,
            steps,
        })
    }

    pub fn len(&self) -> u64 {
        self.steps.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One online pass on stream `seed`.
    pub fn run(&self, seed: Seed) -> MarRun {
        let dgp = &self.dgp;
        let dim = dgp.dim;
        let mut rng = seed.rng();
        let truth = dgp.psi_true;
        let grid = dyadic_grid(self.len());
        let mut est = CompensatedSum::new();
        let mut mart = CompensatedSum::new();
        let mut rem = CompensatedSum::new();
        let mut points = Vec::with_capacity(grid.len());
        let mut g = grid.iter().peekable();
        for i in 1..=self.len() {
            let k = (i - 1) as usize;
            let step = &self.steps[k];
            let (ag, aq) = self.amps[k];
            let mut x = [0.0; 2];
            for xj in x.iter_mut().take(dim) {
                *xj = unit(rand_core::RngCore::next_u64(&mut rng));
            }
            let x = &x[..dim];
            let r = unit(rand_core::RngCore::next_u64(&mut rng)) < dgp.g.eval(x);
            let y = unit(rand_core::RngCore::next_u64(&mut rng)) < dgp.q_bar.eval(x);
            let xi = perturbation(x);
            let gh = dgp.g_hat(dgp.g.eval(x), ag, xi);
            let qh = dgp.q_bar.eval(x) + aq * xi;
            let ry = if r && y { 1.0 } else { 0.0 };
            let rf = if r { 1.0 } else { 0.0 };
            let d = rf * (ry - qh) / gh + qh - step.psi_plugin;
            est.add(step.psi_plugin + d);
            mart.add(d - step.cond_mean_d);
            rem.add(step.remainder);
            if g.peek() == Some(&&i) {
                g.next();
                let nf = i as f64;
                let estimate = est.value() / nf;
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
        MarRun { truth, points }
    }
}

/// Decomposition of one online MAR run on the dyadic prefix grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarRun {
    /// `Ψ(P)`.
    pub truth: f64,
    pub points: Vec<PrefixPoint>,
}

impl MarRun {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max)
    }
}

/// Run the online one-step MAR estimator for `n` steps.
pub fn run_mar_mean(dgp: &MarDgp, sched: &NuisanceSchedule, n: u64, seed: Seed) -> Result<MarRun> {
    Ok(MarSteps::new(dgp, sched, n)?.run(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgp() -> MarDgp {
        MarDgp::new(
            SmoothModel::Linear {
                intercept: 0.5,
                slope: 0.4,
            },
            SmoothModel::Sinusoidal {
                center: 0.5,
                amplitude: 0.3,
            },
            0.4,
            1,
        )
        .unwrap()
    }

    #[test]
    fn psi_of_sinusoid_is_center() {
        assert!((dgp().psi_true() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn remainder_vanishes_with_either_oracle_nuisance() {
        let d = dgp();
        assert_eq!(d.step_integrals(0.0, 0.2).remainder, 0.0);
        assert_eq!(d.step_integrals(0.1, 0.0).remainder, 0.0);
        assert!(d.step_integrals(0.1, 0.2).remainder.abs() > 0.0);
    }

    #[test]
    fn step_identity() {
        let d = dgp();
        let s = d.step_integrals(0.15, 0.25);
        let lhs = s.psi_plugin + s.cond_mean_d - d.psi_true();
        assert!((lhs - s.remainder).abs() < 1e-15);
        assert!(s.remainder.abs() <= s.cs_bound);
    }

    #[test]
    fn rejects_g_below_floor() {
        let g = SmoothModel::Constant { value: 0.3 };
        let q = SmoothModel::Constant { value: 0.5 };
        assert!(matches!(
            MarDgp::new(g, q, 0.4, 1),
            Err(Error::InvalidParam { field: "g", .. })
        ));
    }

    #[test]
    fn oracle_run_has_zero_remainder() {
        let sched = NuisanceSchedule {
            rate_g: 0.3,
            rate_q: 0.3,
            perturb_scale_g: 0.0,
            perturb_scale_q: 0.0,
        };
        let run = run_mar_mean(&dgp(), &sched, 300, Seed::new(2, 1)).unwrap();
        assert!(run.points.iter().all(|p| p.remainder_avg == 0.0));
        assert!(run.max_residual() < 1e-12);
    }
}
