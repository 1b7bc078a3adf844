//! Special-function kernels shared by the rest of the crate.
//!
//! Everything here is built from multiplicative recurrences. Gamma quotients
//! such as `Γ(k−μ)/k!` overflow long before the sequences themselves become
//! small, so no routine evaluates a gamma function directly.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{FracError, Result};

/// The memory weights `w_k = Γ(k−μ) / (Γ(1−μ)·k!)` for `k = 2..=n_max`.
///
/// These are the coefficients multiplying `x(s)` (with `k = n − s`) in the
/// sequence representation of the fractional system.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    mu: f64,
    weights: Vec<f64>,
}

impl WeightSequence {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Largest index `k` covered by the sequence.
    pub fn n_max(&self) -> usize {
        self.weights.len() + 1
    }

    /// `w_k`, or `None` outside `2..=n_max`.
    pub fn get(&self, k: usize) -> Option<f64> {
        if k < 2 {
            return None;
        }
        self.weights.get(k - 2).copied()
    }

    /// Weights in index order, `as_slice()[0] = w_2`.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// Computes `w_k` for `k = 2..=n_max` via `w_2 = (1−μ)/2`,
/// `w_{k+1} = w_k·(k−μ)/(k+1)`.
pub fn gamma_ratio_weights(mu: f64, n_max: usize) -> Result<WeightSequence> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(FracError::InvalidParameter(format!(
            "weight order mu must lie in (0, 1], got {mu}"
        )));
    }
    if n_max < 2 {
        return Err(FracError::InvalidParameter(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let mut weights = Vec::with_capacity(n_max - 1);
    let mut w = (1.0 - mu) / 2.0;
    weights.push(w);
    for k in 2..n_max {
        let kf = k as f64;
        w *= (kf - mu) / (kf + 1.0);
        weights.push(w);
    }
    Ok(WeightSequence { mu, weights })
}

/// `φ̃_α(n) = Γ(n+α) / (Γ(α)·Γ(n+1))`, evaluated by the product recurrence
/// `φ̃_α(n) = φ̃_α(n−1)·(n−1+α)/n` from `φ̃_α(0) = 1`.
pub fn binomial_phi(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(FracError::InvalidParameter(format!(
            "binomial order must be positive, got {alpha}"
        )));
    }
    let mut phi = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        phi *= (kf - 1.0 + alpha) / kf;
    }
    Ok(phi)
}

/// `φ̃_α(0..=n_max)` in one pass.
///
/// Unlike [`binomial_phi`] this accepts `alpha = 0`, where the family
/// degenerates to the unit impulse (the kernel of a zero-order sum).
pub fn binomial_phi_sequence(alpha: f64, n_max: usize) -> Vec<f64> {
    debug_assert!(alpha >= 0.0);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut phi = 1.0;
    out.push(phi);
    for k in 1..=n_max {
        let kf = k as f64;
        phi *= (kf - 1.0 + alpha) / kf;
        out.push(phi);
    }
    out
}

/// Principal logarithm with the argument normalised to `(−π, π]`.
pub fn principal_ln(w: Complex64) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg <= -PI {
        // atan2 returns −π for a negative real axis approached from −0.
        arg = PI;
    }
    Complex64::new(w.norm().ln(), arg)
}

/// `w^μ` on the principal branch (argument in `(−π, π]`); `0^μ = 0` for `μ > 0`.
pub fn principal_power(w: Complex64, mu: f64) -> Result<Complex64> {
    if w.re == 0.0 && w.im == 0.0 {
        if mu > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(FracError::Domain(format!(
            "0 raised to non-positive power {mu}"
        )));
    }
    Ok((principal_ln(w) * mu).exp())
}
