//! Stability and bifurcation analysis of the two-term linear fractional
//! difference system
//!
//! ```text
//! Δ^α x(t) + a·Δ^β x(t+α−β) = (b−1)·x(t+α−1),   x(0) = x0,   0 < β < α ≤ 1
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`fracmath`]: gamma-ratio weights, the binomial family φ̃ and principal powers.
//! - [`numerics`]: bracketing, bisection and damped Newton iterations.
//! - [`dynamics`]: simulation through the sequence representation, plus the
//!   fractional sum / Caputo-like difference operators used as an oracle.
//! - [`charfun`]: the characteristic function and the boundary curve γ(θ).
//! - [`stability`]: winding-number classification of the multiplier `b`,
//!   real stability intervals and region maps.
//! - [`bifurcation`]: closed-form bifurcation values, cusps, self-intersections
//!   and the topology sweep over `a`.

pub mod bifurcation;
pub mod charfun;
pub mod dynamics;
mod error;
pub mod fracmath;
pub mod numerics;
pub mod stability;

pub use error::{FracError, Result};

pub use bifurcation::{
    a3_value, closed_form_bifurcations, curve_faces, find_cusps, find_self_intersections,
    solve_theta_star, sweep_bifurcations, topology_signature, topology_signature_with,
    BifurcationEvent, BifurcationSet, ClosedForms, CuspReport, Face, RegionCount, SelfIntersection,
    SignatureOptions, SweepOptions, ThetaStar, TopologySignature,
};
pub use charfun::{char_value, cusp_conditions, gamma_curve, sample_boundary, BoundaryCurve};
pub use dynamics::{
    caputo_difference, classify_trajectory, fractional_sum, residual, residual_with, simulate,
    simulate_with, Formulation, OrderPair, SystemParams, Trajectory, TrajectoryVerdict,
};
pub use stability::{
    classify_on_curve, classify_point, count_enclosed_unstable, count_stable_components,
    real_interval, scan_region, scan_region_with, winding_number, RealInterval, RegionReport,
    Verdict, Window,
};

pub use num_complex::Complex64;
