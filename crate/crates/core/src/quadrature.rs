//! Gauss–Hermite rules rescaled to a zero-mean normal density.

use crate::error::{invalid, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// detunings, rad/s, ascending
    pub nodes: Vec<f64>,
    /// probabilities
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Σ wᵢ f(δᵢ), summed in node order.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes and weights for E[f(δ)] with δ ~ N(0, σ²).
pub fn gauss_hermite_rule(sigma: f64, n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 2 || n_nodes % 2 != 0 || n_nodes > MAX_NODES {
        return invalid(format!("node count must be even and in [2, {MAX_NODES}], got {n_nodes}"));
    }
    if !sigma.is_finite() {
        return invalid(format!("sigma must be finite, got {sigma}"));
    }
    // only σ² is physical
    let sigma = sigma.abs();
    if sigma == 0.0 {
        return Ok(QuadratureRule { nodes: vec![0.0], weights: vec![1.0] });
    }
    let (x, w) = hermite_physicists(n_nodes)?;
    let total: f64 = w.iter().sum();
    let scale = std::f64::consts::SQRT_2 * sigma;
    Ok(QuadratureRule {
        nodes: x.iter().map(|&v| v * scale).collect(),
        weights: w.iter().map(|&v| v / total).collect(),
    })
}

/// Largest supported rule; beyond this the outer Hermite functions underflow.
pub const MAX_NODES: usize = 512;

/// Nodes (ascending) and weights for ∫ e^{−x²} f(x) dx.
///
/// Eigenvalues of the Jacobi matrix seed the roots; Newton on the recurrence
/// for the Hermite functions ψₖ = φₖ e^{−x²/2} refines them. ψ stays O(1)
/// where the bare polynomials would overflow.
fn hermite_physicists(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().filter(|&z| z > 0.0).collect();
    seeds.sort_by(f64::total_cmp);
    let nf = n as f64;
    // (ψ_n, ψ_{n−1}) at z
    let psi = |z: f64| {
        let mut p1 = PIM4 * (-0.5 * z * z).exp();
        let mut p2 = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, p2)
    };
    let mut pos = Vec::with_capacity(n / 2);
    for (i, &z0) in seeds.iter().enumerate() {
        let mut z = z0;
        let mut converged = false;
        for _ in 0..50 {
            let (p1, p2) = psi(z);
            // φ_n' = √(2n) φ_{n−1}; the Gaussian factor cancels in the ratio
            let step = p1 / ((2.0 * nf).sqrt() * p2);
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(crate::Error::Integration(format!("Hermite root {i} of {n} did not converge")));
        }
        let (_, p2) = psi(z);
        let pp = (2.0 * nf).sqrt() * p2;
        // 2/φ'² with φ' = ψ' e^{z²/2}
        pos.push((z, (std::f64::consts::LN_2 - z * z - 2.0 * pp.abs().ln()).exp()));
    }
    if pos.len() != n / 2 || pos.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(crate::Error::Integration(format!("Hermite roots of order {n} are not distinct")));
    }
    let x: Vec<f64> = pos.iter().rev().map(|p| -p.0).chain(pos.iter().map(|p| p.0)).collect();
    let w: Vec<f64> = pos.iter().rev().map(|p| p.1).chain(pos.iter().map(|p| p.1)).collect();
    Ok((x, w))
}
