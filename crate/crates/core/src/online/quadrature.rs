//! Deterministic quadrature on `[0, 1]^d`, `d ∈ {1, 2}`.
//!
//! Composite two-point Gauss–Legendre on `cells` equal cells per axis,
//! tensorized for `d = 2`.

use crate::{Error, Result};

const GL2: f64 = 0.211_324_865_405_187_1; // (1 − 1/√3)/2
const GL3_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Default cells per axis.
pub fn default_cells(dim: usize) -> usize {
    if dim == 1 {
        2048
    } else {
        128
    }
}

pub(crate) fn check_dim(dim: usize, cells: usize) -> Result<()> {
    if !(1..=2).contains(&dim) {
        return Err(Error::param("dim", format!("dim must be 1 or 2, got {dim}")));
    }
    if cells == 0 {
        return Err(Error::param("cells", "cells must be >= 1"));
    }
    Ok(())
}

/// Nodes and weights of the composite rule on `[0, 1]`.
pub fn axis_rule(cells: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / cells as f64;
    let mut out = Vec::with_capacity(2 * cells);
    for c in 0..cells {
        let a = c as f64 * h;
        out.push((a + GL2 * h, h / 2.0));
        out.push((a + (1.0 - GL2) * h, h / 2.0));
    }
    out
}

/// Tensor nodes `(x, w)` on `[0, 1]^dim`, flattened.
pub fn tensor_rule(dim: usize, cells: usize) -> Vec<([f64; 2], f64)> {
    let axis = axis_rule(cells);
    if dim == 1 {
        axis.iter().map(|&(x, w)| ([x, 0.0], w)).collect()
    } else {
        let mut out = Vec::with_capacity(axis.len() * axis.len());
        for &(y, wy) in &axis {
            for &(x, wx) in &axis {
                out.push(([x, y], wx * wy));
            }
        }
        out
    }
}

/// Three-point Gauss–Legendre on `[a, b]`.
pub fn gl3(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = b - a;
    GL3_NODES
        .iter()
        .zip(GL3_WEIGHTS)
        .map(|(&t, w)| w * f(a + t * h))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for dim in [1, 2] {
            let s: f64 = tensor_rule(dim, 16).iter().map(|n| n.1).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_exact() {
        let v: f64 = axis_rule(3).iter().map(|&(x, w)| w * x.powi(3)).sum();
        assert!((v - 0.25).abs() < 1e-15);
        assert!((gl3(0.0, 2.0, |x| x.powi(5)) - 64.0 / 6.0).abs() < 1e-12);
    }
}
