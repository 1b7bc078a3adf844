//! Simulation of the initial value problem and the discrete fractional
//! operators used to check it.
//!
//! All operators live on the integer grid obtained from the substitution
//! `t = n − α`: sequence index `n` carries `x(n)`, and the equation at grid
//! step `n ≥ 1` links `x(0..=n)`.
//!
//! Two formulations are supported. [`Formulation::Sequence`] is the explicit
//! sequence representation
//!
//! ```text
//! (a+1)·x(n) = (α + aβ + b − 1)·x(n−1) + Σ_{s=0}^{n−2} (α·w^α_{n−s} + aβ·w^β_{n−s})·x(s)
//! ```
//!
//! with `w^μ_k = Γ(k−μ)/(Γ(1−μ)·k!)`. It solves the equation written with the
//! forward difference of the fractional sum, `Δ(Δ^{−(1−μ)} x)`. The
//! Caputo-like difference `Δ^{−(1−μ)}(Δx)` differs from that operator by
//! `x(0)·φ̃_{1−μ}(n)`; [`Formulation::Caputo`] adds that initial-value term to
//! the recurrence so the trajectory solves the Caputo form exactly. Both share
//! the characteristic equation, hence the same stability picture.

use num_complex::Complex64;

use crate::error::{FracError, Result};
use crate::fracmath::{binomial_phi_sequence, gamma_ratio_weights};

/// Fractional orders `(α, β)` with `0 < β < α ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPair {
    alpha: f64,
    beta: f64,
}

impl OrderPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && 0.0 < beta && beta < alpha && alpha <= 1.0) {
            return Err(FracError::InvalidParameter(format!(
                "orders must satisfy 0 < beta < alpha <= 1, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(OrderPair { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Orders, the real coefficient `a`, the multiplier `b` of `f(x) = b·x` and
/// the initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub orders: OrderPair,
    pub a: f64,
    pub b: Complex64,
    pub x0: Complex64,
}

impl SystemParams {
    pub fn new(orders: OrderPair, a: f64, b: Complex64, x0: Complex64) -> Result<Self> {
        let p = SystemParams { orders, a, b, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(FracError::InvalidParameter(format!(
                "a must be finite, got {}",
                self.a
            )));
        }
        if self.a + 1.0 == 0.0 {
            return Err(FracError::SingularParameter { a: self.a });
        }
        if !(self.b.re.is_finite() && self.b.im.is_finite()) {
            return Err(FracError::InvalidParameter("b must be finite".into()));
        }
        if !(self.x0.re.is_finite() && self.x0.im.is_finite()) {
            return Err(FracError::InvalidParameter("x0 must be finite".into()));
        }
        Ok(())
    }
}

/// Which operator form the recurrence solves. See the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    #[default]
    Sequence,
    Caputo,
}

/// Solution values `x(0), x(1), …, x(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SystemParams,
    pub formulation: Formulation,
    pub values: Vec<Complex64>,
}

impl Trajectory {
    /// Number of steps `N` (one less than the number of values).
    pub fn steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Runs the sequence representation for `n_steps` steps.
pub fn simulate(params: SystemParams, n_steps: usize) -> Result<Trajectory> {
    simulate_with(params, n_steps, Formulation::Sequence)
}

/// Runs the recurrence for the requested formulation. `O(N²)` time, `O(N)` memory.
pub fn simulate_with(
    params: SystemParams,
    n_steps: usize,
    formulation: Formulation,
) -> Result<Trajectory> {
    params.validate()?;
    if n_steps == 0 {
        return Err(FracError::InvalidParameter(
            "number of steps must be at least 1".into(),
        ));
    }
    let SystemParams { orders, a, b, x0 } = params;
    let (alpha, beta) = (orders.alpha(), orders.beta());
    let lead = a + 1.0;

    let n_max = n_steps.max(2);
    let wa = gamma_ratio_weights(alpha, n_max)?;
    let wb = gamma_ratio_weights(beta, n_max)?;
    // kernel[k] = α·w^α_k + aβ·w^β_k for k ≥ 2
    let mut kernel = vec![0.0; n_max + 1];
    for k in 2..=n_max {
        kernel[k] = alpha * wa.as_slice()[k - 2] + a * beta * wb.as_slice()[k - 2];
    }
    let start_term = match formulation {
        Formulation::Sequence => None,
        Formulation::Caputo => Some((
            binomial_phi_sequence(1.0 - alpha, n_max),
            binomial_phi_sequence(1.0 - beta, n_max),
        )),
    };

    let step_coef = (b + (alpha + a * beta - 1.0)) / lead;
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(x0);
    for n in 1..=n_steps {
        let mut memory = Complex64::new(0.0, 0.0);
        for s in 0..n.saturating_sub(1) {
            memory += values[s] * kernel[n - s];
        }
        let mut next = step_coef * values[n - 1] + memory / lead;
        if let Some((pa, pb)) = &start_term {
            next += x0 * ((pa[n] + a * pb[n]) / lead);
        }
        values.push(next);
    }
    Ok(Trajectory {
        params,
        formulation,
        values,
    })
}

fn check_order(mu: f64, what: &str) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(FracError::InvalidParameter(format!(
            "{what} must lie in (0, 1], got {mu}"
        )));
    }
    Ok(())
}

/// Fractional sum `(Δ^{−β} x)(t)` at `t = n + β − 1`:
///
/// ```text
/// (1/Γ(β)) Σ_{s=0}^{n−1} Γ(t−s)/Γ(t−β−s+1) · x(s) = Σ_{s=0}^{n−1} φ̃_β(n−1−s) · x(s)
/// ```
///
/// For `β = 1` this is the cumulative sum `x(0) + … + x(n−1)`.
pub fn fractional_sum(x: &[Complex64], beta: f64, n: usize) -> Result<Complex64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(FracError::InvalidParameter(format!(
            "fractional sum order must be positive, got {beta}"
        )));
    }
    if n == 0 || n > x.len() {
        return Err(FracError::Range {
            index: n,
            len: x.len(),
        });
    }
    Ok(kernel_sum(x, &binomial_phi_sequence(beta, n - 1), n))
}

fn kernel_sum(x: &[Complex64], phi: &[f64], n: usize) -> Complex64 {
    x[..n]
        .iter()
        .enumerate()
        .map(|(s, &v)| v * phi[n - 1 - s])
        .sum()
}

/// Caputo-like difference `Δ^μ x(t) = Δ^{−(1−μ)}(Δx)(t)` at `t = n + 1 − μ`.
///
/// Needs `x(0..=n+1)`. For `μ = 1` it is the forward difference `x(n+1) − x(n)`.
pub fn caputo_difference(x: &[Complex64], mu: f64, n: usize) -> Result<Complex64> {
    check_order(mu, "Caputo difference order")?;
    if n + 1 >= x.len() {
        return Err(FracError::Range {
            index: n + 1,
            len: x.len(),
        });
    }
    if mu == 1.0 {
        return Ok(x[n + 1] - x[n]);
    }
    let dx: Vec<Complex64> = x[..=n + 1].windows(2).map(|w| w[1] - w[0]).collect();
    fractional_sum(&dx, 1.0 - mu, n + 1)
}

/// Forward difference of the fractional sum, `Δ(Δ^{−(1−μ)} x)`, at grid step
/// `n ≥ 1` (needs `x(0..=n)`).
///
/// Equals `caputo_difference(x, μ, n−1) + x(0)·φ̃_{1−μ}(n)`.
pub fn difference_of_sum(x: &[Complex64], mu: f64, n: usize) -> Result<Complex64> {
    check_order(mu, "difference order")?;
    if n == 0 || n >= x.len() {
        return Err(FracError::Range {
            index: n,
            len: x.len(),
        });
    }
    if mu == 1.0 {
        return Ok(x[n] - x[n - 1]);
    }
    Ok(fractional_sum(x, 1.0 - mu, n + 1)? - fractional_sum(x, 1.0 - mu, n)?)
}

/// Largest equation residual over the trajectory, computed from the
/// fractional operators rather than the recurrence.
///
/// The operator form follows the trajectory's [`Formulation`]. Residuals are
/// divided by `max(1, max|x|)`, so for trajectories bounded by one this is
/// the absolute residual.
pub fn residual(traj: &Trajectory) -> f64 {
    residual_with(&traj.values, &traj.params, traj.formulation)
}

/// [`residual`] for an arbitrary value sequence.
pub fn residual_with(values: &[Complex64], params: &SystemParams, formulation: Formulation) -> f64 {
    let (alpha, beta) = (params.orders.alpha(), params.orders.beta());
    let bm1 = params.b - 1.0;
    let mut worst: f64 = 0.0;
    for n in 1..values.len() {
        let (da, db) = match formulation {
            Formulation::Sequence => (
                difference_of_sum(values, alpha, n),
                difference_of_sum(values, beta, n),
            ),
            Formulation::Caputo => (
                caputo_difference(values, alpha, n - 1),
                caputo_difference(values, beta, n - 1),
            ),
        };
        let (Ok(da), Ok(db)) = (da, db) else {
            // Orders are validated at construction; unreachable for a valid pair.
            return f64::NAN;
        };
        let r = (da + db * params.a - bm1 * values[n - 1]).norm();
        worst = worst.max(r);
    }
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    worst / scale
}

/// Numerical verdict on a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryVerdict {
    Converging,
    Diverging,
    Inconclusive,
}

impl TrajectoryVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryVerdict::Converging => "converging",
            TrajectoryVerdict::Diverging => "diverging",
            TrajectoryVerdict::Inconclusive => "inconclusive",
        }
    }
}

pub const DEFAULT_DIV_FACTOR: f64 = 1e6;
pub const DEFAULT_CONV_RATIO: f64 = 1.0;

/// [`classify_trajectory_with`] using a blow-up factor of `10⁶` and a tail
/// ratio of one.
pub fn classify_trajectory(traj: &Trajectory) -> TrajectoryVerdict {
    classify_trajectory_with(traj, DEFAULT_DIV_FACTOR, DEFAULT_CONV_RATIO)
}

/// Diverging when `max|x(n)|` exceeds `div_factor·|x0|`. Converging when the
/// maximum over the last 10% of indices is below both `conv_ratio` times the
/// maximum over `[1, N/10]` and `|x0|`. Inconclusive otherwise, or when the
/// trajectory is too short (`N < 10`) to form the windows.
pub fn classify_trajectory_with(
    traj: &Trajectory,
    div_factor: f64,
    conv_ratio: f64,
) -> TrajectoryVerdict {
    let mags: Vec<f64> = traj.values.iter().map(|v| v.norm()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return TrajectoryVerdict::Diverging;
    }
    let x0 = mags.first().copied().unwrap_or(0.0);
    let peak = mags.iter().copied().fold(0.0, f64::max);
    if peak > div_factor * x0 {
        return TrajectoryVerdict::Diverging;
    }
    if peak == 0.0 {
        return TrajectoryVerdict::Converging;
    }
    let n = mags.len() - 1;
    let window = n / 10;
    if window == 0 {
        return TrajectoryVerdict::Inconclusive;
    }
    let head = mags[1..=window].iter().copied().fold(0.0, f64::max);
    let tail = mags[n - window..].iter().copied().fold(0.0, f64::max);
    if tail < conv_ratio * head && tail < x0 {
        TrajectoryVerdict::Converging
    } else {
        TrajectoryVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(alpha: f64, beta: f64, a: f64, b: Complex64) -> SystemParams {
        SystemParams::new(OrderPair::new(alpha, beta).unwrap(), a, b, c(0.1, 0.0)).unwrap()
    }

    #[test]
    fn order_pair_validation() {
        assert!(OrderPair::new(0.9, 0.6).is_ok());
        assert!(OrderPair::new(1.0, 0.5).is_ok());
        assert!(OrderPair::new(0.6, 0.6).is_err());
        assert!(OrderPair::new(0.5, 0.6).is_err());
        assert!(OrderPair::new(1.1, 0.6).is_err());
        assert!(OrderPair::new(0.5, 0.0).is_err());
        assert!(OrderPair::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn singular_coefficient_is_rejected() {
        let orders = OrderPair::new(0.9, 0.6).unwrap();
        let err = SystemParams::new(orders, -1.0, c(0.5, 0.0), c(0.1, 0.0)).unwrap_err();
        assert_eq!(err, FracError::SingularParameter { a: -1.0 });
    }

    #[test]
    fn first_step_matches_leading_coefficient() {
        let t = simulate(params(0.9, 0.6, 0.0, c(0.5, 0.0)), 1).unwrap();
        assert_eq!(t.values.len(), 2);
        assert_eq!(t.values[0], c(0.1, 0.0));
        assert!((t.values[1] - c(0.04, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(simulate(params(0.9, 0.6, 0.0, c(0.5, 0.0)), 0).is_err());
    }

    #[test]
    fn unit_order_collapses_to_classical_map() {
        let b = c(0.7, 0.3);
        let t = simulate(params(1.0, 0.4, 0.0, b), 60).unwrap();
        for n in 1..=60 {
            assert_eq!(t.values[n], b * t.values[n - 1]);
        }
    }

    #[test]
    fn caputo_first_step() {
        // (a+1)(x1 − x0) = (b−1)·x0
        let p = params(0.8, 0.3, 0.6, c(0.9, 0.2));
        let t = simulate_with(p, 1, Formulation::Caputo).unwrap();
        let expected = p.x0 * (p.b + p.a) / (p.a + 1.0);
        assert!((t.values[1] - expected).norm() < 1e-15);
    }

    #[test]
    fn fractional_sum_edge_cases() {
        let zeros = vec![c(0.0, 0.0); 12];
        assert_eq!(fractional_sum(&zeros, 0.3, 10).unwrap(), c(0.0, 0.0));

        let x: Vec<Complex64> = (0..8)
            .map(|k| c(k as f64 * 0.5 - 1.0, (k * k) as f64 * 0.1))
            .collect();
        let cumulative: Complex64 = x[..5].iter().sum();
        assert!((fractional_sum(&x, 1.0, 5).unwrap() - cumulative).norm() < 1e-14);

        assert!(matches!(
            fractional_sum(&x, 0.5, 9),
            Err(FracError::Range { .. })
        ));
        assert!(matches!(
            fractional_sum(&x, 0.5, 0),
            Err(FracError::Range { .. })
        ));
        assert!(fractional_sum(&x, 0.0, 3).is_err());
    }

    #[test]
    fn caputo_difference_edge_cases() {
        let constant = vec![c(2.5, -1.0); 20];
        for n in 0..19 {
            assert!(caputo_difference(&constant, 0.7, n).unwrap().norm() < 1e-15);
        }
        let x: Vec<Complex64> = (0..10)
            .map(|k| c((k as f64).sin(), (k as f64).cos()))
            .collect();
        for n in 0..9 {
            assert_eq!(caputo_difference(&x, 1.0, n).unwrap(), x[n + 1] - x[n]);
        }
        assert!(matches!(
            caputo_difference(&x, 0.5, 9),
            Err(FracError::Range { .. })
        ));
        assert!(caputo_difference(&x, 1.5, 2).is_err());
    }

    #[test]
    fn difference_of_sum_relates_to_caputo() {
        let x: Vec<Complex64> = (0..40)
            .map(|k| c(0.3 + (k as f64 * 0.7).sin(), 0.1 * k as f64))
            .collect();
        for &mu in &[0.2, 0.55, 0.9] {
            let phi = binomial_phi_sequence(1.0 - mu, 40);
            for n in 1..39 {
                let lhs = difference_of_sum(&x, mu, n).unwrap();
                let rhs = caputo_difference(&x, mu, n - 1).unwrap() + x[0] * phi[n];
                assert!((lhs - rhs).norm() < 1e-12, "mu={mu} n={n}");
            }
        }
    }

    #[test]
    fn residual_of_zero_trajectory() {
        let p = params(0.9, 0.6, -1.17, c(0.8, 0.2));
        let t = Trajectory {
            params: p,
            formulation: Formulation::Sequence,
            values: vec![c(0.0, 0.0); 30],
        };
        assert_eq!(residual(&t), 0.0);
    }

    #[test]
    fn residual_vanishes_on_simulated_trajectory() {
        let t = simulate(params(0.9, 0.6, -1.17, c(0.8, 0.2)), 100).unwrap();
        assert!(residual(&t) < 1e-9, "{}", residual(&t));

        let t = simulate(params(0.8, 0.2, 0.6, c(0.8, 0.0)), 50).unwrap();
        assert!(residual(&t) < 1e-9);
        let t = simulate_with(params(0.8, 0.2, 0.6, c(0.8, 0.0)), 50, Formulation::Caputo).unwrap();
        assert!(residual(&t) < 1e-9);
    }

    #[test]
    fn residual_detects_a_perturbed_value() {
        // A bump δ at index 7 enters step 7 with weight (1+a) and step 8 with
        // weight −(α + aβ + b − 1); the latter dominates: |0.002 − 0.2i|·δ.
        let mut t = simulate(params(0.9, 0.6, -1.17, c(0.8, 0.2)), 100).unwrap();
        t.values[7] += c(1e-3, 0.0);
        let r = residual(&t);
        let expected = c(0.002, -0.2).norm() * 1e-3;
        assert!((r - expected).abs() < 1e-9, "r = {r:e}");
    }

    #[test]
    fn caputo_residual_of_sequence_trajectory_is_the_start_term() {
        let p = params(0.8, 0.2, 0.6, c(0.8, 0.0));
        let t = simulate(p, 30).unwrap();
        let caputo = residual_with(&t.values, &p, Formulation::Caputo);
        // At n = 1 the mismatch is x0·(φ̃_{0.2}(1) + a·φ̃_{0.8}(1)) = 0.1·(0.2 + 0.48).
        assert!(caputo >= 0.068 - 1e-12);
    }

    #[test]
    fn trajectory_verdicts() {
        let zero = Trajectory {
            params: params(0.8, 0.2, 0.6, c(0.8, 0.0)),
            formulation: Formulation::Sequence,
            values: vec![c(0.0, 0.0); 200],
        };
        assert_eq!(classify_trajectory(&zero), TrajectoryVerdict::Converging);

        let t = simulate(params(0.8, 0.2, 0.6, c(2.5, 0.0)), 500).unwrap();
        assert_eq!(classify_trajectory(&t), TrajectoryVerdict::Diverging);
        let t = simulate(params(0.8, 0.2, 0.6, c(-1.3, 0.0)), 500).unwrap();
        assert_eq!(classify_trajectory(&t), TrajectoryVerdict::Converging);
    }

    #[test]
    fn nonfinite_values_diverge() {
        let mut values = vec![c(0.1, 0.0); 200];
        values[150] = c(f64::INFINITY, 0.0);
        let t = Trajectory {
            params: params(0.8, 0.2, 0.6, c(0.8, 0.0)),
            formulation: Formulation::Sequence,
            values,
        };
        assert_eq!(classify_trajectory(&t), TrajectoryVerdict::Diverging);
    }
}
