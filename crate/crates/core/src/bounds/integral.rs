//! The integral `I_q(a, c) = ∫_a^∞ e^{−cu} u^q du` and its envelope.

use crate::{Error, Result};

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * f64::from(i))
}

fn check_domain(a: f64, c: f64) -> Result<()> {
    if !(a.is_finite() && a >= 1.0) {
        return Err(Error::domain(format!("a must be >= 1, got {a}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("c must be > 0, got {c}")));
    }
    Ok(())
}

/// Closed form of `I_q(a, c)`, obtained by unrolling
/// `I_q = e^{−ca} a^q / c + (q/c) I_{q−1}`:
///
/// `I_q(a, c) = e^{−ca} Σ_{j=0..q} q!/(q−j)! · a^{q−j} / c^{j+1}`.
pub fn exp_poly_integral(q: u32, a: f64, c: f64) -> Result<f64> {
    check_domain(a, c)?;
    // term_j = q!/(q-j)! a^{q-j} / c^{j+1}; all terms are positive.
    let mut term = a.powi(q as i32) / c;
    let mut sum = term;
    for j in 0..q {
        term *= f64::from(q - j) / (a * c);
        sum += term;
    }
    Ok((-c * a).exp() * sum)
}

/// Envelope `(q+1)! · max{c⁻¹, c^{−(q+1)}} · a^q · e^{−ca} ≥ I_q(a, c)`.
///
/// Each of the `q + 1` terms of the closed form is at most
/// `q! · max{c⁻¹, c^{−(q+1)}} · a^q` because `a ≥ 1`.
pub fn exp_poly_integral_bound(q: u32, a: f64, c: f64) -> Result<f64> {
    check_domain(a, c)?;
    let scale = (1.0 / c).max(c.powi(-(q as i32 + 1)));
    Ok(factorial(q + 1) * scale * a.powi(q as i32) * (-c * a).exp())
}
