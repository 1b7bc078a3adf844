//! The characteristic function and its image of the unit circle.
//!
//! With `z = e^{iθ}` the characteristic equation
//! `z(1−z^{−1})^α + a·z(1−z^{−1})^β + 1 = b` traces the boundary curve
//!
//! ```text
//! γ(θ) = Σ_μ c_μ·2^μ·sin^μ(θ/2)·e^{i(θ + μ(π−θ)/2)} + 1,   c_α = 1, c_β = a,
//! ```
//!
//! using `1 − e^{−iθ} = 2 sin(θ/2)·e^{i(π−θ)/2}` on the principal branch.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::dynamics::OrderPair;
use crate::error::{FracError, Result};
use crate::fracmath::principal_power;

/// Below this, `sin(θ/2)^μ` is taken as exactly zero.
const TINY_SIN: f64 = 1e-300;
const MAX_REFINE_DEPTH: u32 = 20;
const MAX_TURN: f64 = PI / 8.0;
const CHORD_FRACTION: f64 = 1.0 / 64.0;
/// Ratio of the geometric node spacing near `θ = 0` and `θ = 2π`.
const GRADING_RATIO: f64 = std::f64::consts::SQRT_2;
/// Graded nodes reach this fraction of the small-loop angle...
const GRADING_DEPTH: f64 = 1.0 / 16.0;
/// ...but stop here: mirrored nodes `2π − θ` must stay distinct in f64.
const GRADING_FLOOR: f64 = 1e-13;
/// Closest graded node to a near-cusp.
const CUSP_GRADING_FLOOR: f64 = 1e-9;
/// Relative displacement below which samples are indistinguishable.
const NOISE_FLOOR: f64 = 1e-12;

/// `H(z) − b` written as `z(1−z^{−1})^α + a·z(1−z^{−1})^β + 1 − b`.
///
/// At `z = 1` both power terms vanish and the value is `1 − b`.
pub fn char_value(z: Complex64, orders: OrderPair, a: f64, b: Complex64) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(FracError::Domain(
            "characteristic function is undefined at z = 0".into(),
        ));
    }
    let w = Complex64::new(1.0, 0.0) - z.inv();
    let pa = principal_power(w, orders.alpha())?;
    let pb = principal_power(w, orders.beta())?;
    Ok(z * pa + z * pb * a + 1.0 - b)
}

/// `sin(θ/2)`, folded so that `θ` and `2π − θ` give bit-identical values and
/// `θ = 2π` gives exactly zero.
fn half_sin(theta: f64) -> f64 {
    if theta > PI {
        ((TAU - theta) / 2.0).sin()
    } else {
        (theta / 2.0).sin()
    }
}

fn pow_guarded(s: f64, mu: f64) -> f64 {
    if s < TINY_SIN {
        0.0
    } else {
        (mu * s.ln()).exp()
    }
}

fn phase(theta: f64, mu: f64) -> f64 {
    theta + mu * (PI - theta) / 2.0
}

/// `γ(θ)` from the trigonometric closed form.
pub fn gamma_curve(theta: f64, orders: OrderPair, a: f64) -> Complex64 {
    let s = half_sin(theta);
    let term = |mu: f64, c: f64| -> Complex64 {
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(c * 2f64.powf(mu) * pow_guarded(s, mu), phase(theta, mu))
    };
    term(orders.alpha(), 1.0) + term(orders.beta(), a) + 1.0
}

/// `γ′(θ)` for `θ ∈ (0, 2π)`; infinite at the endpoints when `β < 1`.
pub fn gamma_derivative(theta: f64, orders: OrderPair, a: f64) -> Complex64 {
    let s = half_sin(theta);
    let cos_half = (theta / 2.0).cos();
    let term = |mu: f64, c: f64| -> Complex64 {
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let radial = 0.5 * mu * cos_half * (s.ln() * (mu - 1.0)).exp();
        let angular = (1.0 - mu / 2.0) * pow_guarded(s, mu);
        Complex64::new(radial, angular) * Complex64::from_polar(c * 2f64.powf(mu), phase(theta, mu))
    };
    term(orders.alpha(), 1.0) + term(orders.beta(), a)
}

/// `(Re γ′(θ), Im γ′(θ))`; both vanish exactly at a cusp of the curve.
///
/// At `θ = π` the real part is identically zero.
pub fn cusp_conditions(theta: f64, orders: OrderPair, a: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < TAU) {
        return Err(FracError::Domain(format!(
            "cusp conditions need theta strictly inside (0, 2pi), got {theta}"
        )));
    }
    let d = gamma_derivative(theta, orders, a);
    Ok((d.re, d.im))
}

/// Parameters that generated a curve analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSource {
    pub orders: OrderPair,
    pub a: f64,
}

/// A sampled boundary curve, `points[j] = γ(thetas[j])`.
///
/// Curves read back from disk carry no [`CurveSource`]; they still support
/// winding numbers (on the polyline) but not refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub source: Option<CurveSource>,
    pub thetas: Vec<f64>,
    pub points: Vec<Complex64>,
}

impl BoundaryCurve {
    /// Wraps externally supplied samples. Requires at least two samples,
    /// strictly increasing `thetas` and a closed polyline.
    pub fn from_samples(thetas: Vec<f64>, points: Vec<Complex64>) -> Result<Self> {
        if thetas.len() != points.len() || thetas.len() < 2 {
            return Err(FracError::InvalidParameter(format!(
                "need matching theta/point lists of length >= 2, got {} and {}",
                thetas.len(),
                points.len()
            )));
        }
        if thetas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FracError::InvalidParameter(
                "thetas must be strictly increasing".into(),
            ));
        }
        if points
            .iter()
            .any(|p| !(p.re.is_finite() && p.im.is_finite()))
        {
            return Err(FracError::InvalidParameter(
                "curve points must be finite".into(),
            ));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if (first - last).norm() > 1e-9 * (1.0 + first.norm()) {
            return Err(FracError::InvalidParameter("curve is not closed".into()));
        }
        Ok(BoundaryCurve {
            source: None,
            thetas,
            points,
        })
    }

    pub fn orders(&self) -> Option<OrderPair> {
        self.source.map(|s| s.orders)
    }

    pub fn a(&self) -> Option<f64> {
        self.source.map(|s| s.a)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `γ(θ)` when the generating parameters are known.
    pub fn eval(&self, theta: f64) -> Option<Complex64> {
        self.source.map(|s| gamma_curve(theta, s.orders, s.a))
    }

    /// `(re_min, re_max, im_min, im_max)` of the samples.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        bbox(&self.points)
    }

    pub fn diagonal(&self) -> f64 {
        let (x0, x1, y0, y1) = self.bounding_box();
        (x1 - x0).hypot(y1 - y0)
    }
}

fn bbox(points: &[Complex64]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(x0, x1, y0, y1), p| (x0.min(p.re), x1.max(p.re), y0.min(p.im), y1.max(p.im)),
    )
}

fn turning_angle(p0: Complex64, pm: Complex64, p1: Complex64) -> f64 {
    let u = pm - p0;
    let v = p1 - pm;
    if u.norm() == 0.0 || v.norm() == 0.0 {
        return 0.0;
    }
    (v * u.conj()).arg().abs()
}

/// Samples `γ` at `M + 1` equispaced nodes of `[0, 2π]`.
///
/// For `a < 0` geometrically spaced nodes are added next to both ends so the
/// small loop at `γ(0)` (see [`small_loop_angle`]) is resolved down to angles
/// of about `10⁻¹²`.
///
/// With `refine` set, nodes also cluster around the local minima of `|γ′|`
/// (near-cusps), and each segment is bisected recursively (depth ≤ 20)
/// while its midpoint turning angle exceeds π/8 or its chord exceeds 1/64 of
/// the bounding-box diagonal of the initial samples.
pub fn sample_boundary(orders: OrderPair, a: f64, m: usize, refine: bool) -> Result<BoundaryCurve> {
    if m < 64 {
        return Err(FracError::InvalidParameter(format!(
            "need at least 64 samples, got {m}"
        )));
    }
    if !a.is_finite() {
        return Err(FracError::InvalidParameter(format!(
            "a must be finite, got {a}"
        )));
    }
    // Sample [0, π] and mirror: γ(2π − θ) = conj γ(θ) for real `a`, and an
    // exactly symmetric polyline can only cross its mirror image on the real
    // axis, as the curve does.
    let g = |t: f64| {
        let p = gamma_curve(t, orders, a);
        if t == PI {
            Complex64::new(p.re, 0.0)
        } else {
            p
        }
    };
    let h = TAU / m as f64;
    let mut nodes: Vec<f64> = vec![0.0, PI];
    nodes.extend(graded_nodes(orders, a, h));
    nodes.extend(
        (1..m)
            .map(|j| TAU * j as f64 / m as f64)
            .filter(|t| *t < PI),
    );
    if refine {
        nodes.extend(
            near_cusp_nodes(orders, a, m)
                .into_iter()
                .filter(|t| *t < PI),
        );
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let coarse: Vec<(f64, Complex64)> = nodes.into_iter().map(|t| (t, g(t))).collect();

    let (thetas, points): (Vec<f64>, Vec<Complex64>) = if refine {
        let (x0, x1, _, y1) = bbox(&coarse.iter().map(|c| c.1).collect::<Vec<_>>());
        let ymax = coarse.iter().fold(y1, |m, c| m.max(-c.1.im));
        let max_chord = (x1 - x0).hypot(2.0 * ymax) * CHORD_FRACTION;
        let mut thetas = Vec::with_capacity(2 * m);
        let mut points = Vec::with_capacity(2 * m);
        thetas.push(coarse[0].0);
        points.push(coarse[0].1);
        for w in coarse.windows(2) {
            refine_segment(&g, w[0], w[1], max_chord, 0, &mut thetas, &mut points);
        }
        (thetas, points)
    } else {
        coarse.into_iter().unzip()
    };
    let (thetas, points) = mirror_half(thetas, points);
    Ok(BoundaryCurve {
        source: Some(CurveSource { orders, a }),
        thetas,
        points,
    })
}

/// Completes samples of `[0, π]` (ending exactly at `π`) to `[0, 2π]` by
/// conjugate reflection.
pub(crate) fn mirror_half(
    mut thetas: Vec<f64>,
    mut points: Vec<Complex64>,
) -> (Vec<f64>, Vec<Complex64>) {
    let n = thetas.len();
    for k in (0..n - 1).rev() {
        thetas.push(if k == 0 { TAU } else { TAU - thetas[k] });
        points.push(points[k].conj());
    }
    (thetas, points)
}

/// Angle of the small loop that `γ` forms next to `γ(0) = 1` when `a < 0`.
///
/// Near `θ = 0` the `β` term dominates and points the other way from the
/// `α` term; they balance in `Im γ` where
/// `sin^{α−β}(θ/2) = −a·2^{β−α}·sin(βπ/2)/sin(απ/2)`.
pub fn small_loop_angle(orders: OrderPair, a: f64) -> Option<f64> {
    let (al, be) = (orders.alpha(), orders.beta());
    if !(a < 0.0) {
        return None;
    }
    let ratio = -a * 2f64.powf(be - al) * (be * PI / 2.0).sin() / (al * PI / 2.0).sin();
    let s = ratio.powf(1.0 / (al - be));
    (s < 1.0).then(|| 2.0 * s.asin())
}

/// Geometrically spaced nodes in `(0, h)`, decreasing, that resolve the
/// small loop when it is narrower than the uniform step `h`.
fn graded_nodes(orders: OrderPair, a: f64, h: f64) -> Vec<f64> {
    let Some(theta) = small_loop_angle(orders, a) else {
        return Vec::new();
    };
    let floor = (theta * GRADING_DEPTH).max(GRADING_FLOOR);
    let mut out = Vec::new();
    let mut t = h / GRADING_RATIO;
    while t > floor {
        out.push(t);
        t /= GRADING_RATIO;
    }
    out
}

/// Nodes clustered geometrically around every interior local minimum of
/// `|γ′|`. Near a cusp birth or death the curve carries a swallowtail whose
/// loops can be far narrower than the uniform step.
fn near_cusp_nodes(orders: OrderPair, a: f64, m: usize) -> Vec<f64> {
    let h = TAU / m as f64;
    let speed = |t: f64| gamma_derivative(t, orders, a).norm();
    let v: Vec<f64> = (0..=m).map(|j| speed(h * j as f64)).collect();
    let mut out = Vec::new();
    for j in 1..m {
        if !(v[j] < v[j - 1] && v[j] <= v[j + 1]) {
            continue;
        }
        let centre = golden_min(&speed, h * (j - 1) as f64, h * (j + 1) as f64);
        out.push(centre);
        // Stop where neighbouring samples would differ by rounding noise only.
        let g0 = gamma_curve(centre, orders, a);
        let noise = NOISE_FLOOR * (1.0 + g0.norm());
        let mut d = h;
        while d > CUSP_GRADING_FLOOR && (gamma_curve(centre + d, orders, a) - g0).norm() > noise {
            out.extend([centre - d, centre + d]);
            d /= GRADING_RATIO;
        }
    }
    out.retain(|t| *t > 0.0 && *t < TAU);
    out
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Appends the refined interior samples and the right endpoint of a segment.
fn refine_segment<G: Fn(f64) -> Complex64>(
    g: &G,
    left: (f64, Complex64),
    right: (f64, Complex64),
    max_chord: f64,
    depth: u32,
    thetas: &mut Vec<f64>,
    points: &mut Vec<Complex64>,
) {
    if depth < MAX_REFINE_DEPTH {
        let tm = 0.5 * (left.0 + right.0);
        let pm = g(tm);
        let chord = (right.1 - left.1).norm();
        if chord > max_chord || turning_angle(left.1, pm, right.1) > MAX_TURN {
            refine_segment(g, left, (tm, pm), max_chord, depth + 1, thetas, points);
            refine_segment(g, (tm, pm), right, max_chord, depth + 1, thetas, points);
            return;
        }
    }
    thetas.push(right.0);
    points.push(right.1);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(alpha: f64, beta: f64) -> OrderPair {
        OrderPair::new(alpha, beta).unwrap()
    }

    #[test]
    fn char_value_special_points() {
        let o = op(0.9, 0.6);
        let a = -1.17;
        let b = Complex64::new(1.0 - 2f64.powf(0.9) - a * 2f64.powf(0.6), 0.0);
        assert!(
            char_value(Complex64::new(-1.0, 0.0), o, a, b)
                .unwrap()
                .norm()
                < 1e-14
        );
        assert_eq!(
            char_value(Complex64::new(1.0, 0.0), o, a, Complex64::new(1.0, 0.0)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(matches!(
            char_value(Complex64::new(0.0, 0.0), o, a, b),
            Err(FracError::Domain(_))
        ));
    }

    #[test]
    fn char_value_at_two() {
        let v = char_value(
            Complex64::new(2.0, 0.0),
            op(0.4, 0.2),
            1.0,
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        let expected = 2.0 * 0.5f64.powf(0.4) + 2.0 * 0.5f64.powf(0.2) + 1.0;
        assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14);
        assert!((v.re - 4.256_817_693_102_646).abs() < 1e-12);
    }

    #[test]
    fn curve_anchor_points() {
        let o = op(0.9, 0.6);
        for &a in &[0.0, -1.17, 2.0] {
            assert_eq!(gamma_curve(0.0, o, a), Complex64::new(1.0, 0.0));
            assert_eq!(gamma_curve(TAU, o, a), Complex64::new(1.0, 0.0));
            let mid = gamma_curve(PI, o, a);
            assert!((mid.re - (1.0 - 2f64.powf(0.9) - a * 2f64.powf(0.6))).abs() < 1e-14);
            assert!(mid.im.abs() < 1e-14);
        }
    }

    #[test]
    fn curve_matches_complex_arithmetic() {
        let o = op(0.9, 0.6);
        let z = Complex64::from_polar(1.0, PI / 2.0);
        let direct = char_value(z, o, -1.17, Complex64::new(0.0, 0.0)).unwrap();
        assert!((gamma_curve(PI / 2.0, o, -1.17) - direct).norm() < 1e-12);
    }

    #[test]
    fn cusp_conditions_at_half_turn() {
        let o = op(0.9, 0.6);
        for &a in &[0.0, -0.5, 1.3] {
            assert!(cusp_conditions(PI, o, a).unwrap().0.abs() < 1e-15);
        }
        let a2 = -2f64.powf(0.3) * (0.9 - 2.0) / (0.6 - 2.0);
        let (re, im) = cusp_conditions(PI, o, a2).unwrap();
        assert!(re.abs() < 1e-14 && im.abs() < 1e-14);
        assert!(cusp_conditions(0.0, o, 0.0).is_err());
        assert!(cusp_conditions(TAU, o, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_central_difference() {
        let o = op(0.9, 0.6);
        let t = PI / 3.0;
        let h = 1e-6;
        let fd = (gamma_curve(t + h, o, 0.0) - gamma_curve(t - h, o, 0.0)) / (2.0 * h);
        let (re, im) = cusp_conditions(t, o, 0.0).unwrap();
        assert!((fd.re - re).abs() < 1e-6 && (fd.im - im).abs() < 1e-6);
    }

    #[test]
    fn sampled_curve_invariants() {
        let o = op(0.9, 0.6);
        for refine in [false, true] {
            let c = sample_boundary(o, -0.3, 64, refine).unwrap();
            assert_eq!(c.thetas[0], 0.0);
            assert_eq!(*c.thetas.last().unwrap(), TAU);
            assert_eq!(c.points[0], Complex64::new(1.0, 0.0));
            assert_eq!(*c.points.last().unwrap(), Complex64::new(1.0, 0.0));
            assert!(c.thetas.windows(2).all(|w| w[0] < w[1]));
            if !refine {
                // Graded nodes come in mirrored pairs.
                assert!(c.len() > 65 && (c.len() - 65) % 2 == 0);
                let n = c.len() - 1;
                assert!((0..=n).all(|k| (c.thetas[k] + c.thetas[n - k] - TAU).abs() < 1e-12));
            }
        }
        assert_eq!(sample_boundary(o, 0.3, 64, false).unwrap().len(), 65);
        assert!(sample_boundary(o, 0.0, 63, false).is_err());
    }

    #[test]
    fn small_loop_angle_balances_imaginary_part() {
        let o = op(0.4, 0.2);
        assert!(small_loop_angle(o, 0.0).is_none());
        assert!(small_loop_angle(o, 0.5).is_none());
        for &a in &[-1e-3, -0.05] {
            let t = small_loop_angle(o, a).unwrap();
            // Leading-order balance: Im γ changes sign across the estimate.
            assert!(gamma_curve(0.5 * t, o, a).im < 0.0);
            assert!(gamma_curve(2.0 * t, o, a).im > 0.0);
        }
    }

    #[test]
    fn refinement_bounds_chords() {
        let o = op(0.9, 0.6);
        let c = sample_boundary(o, 0.0, 64, true).unwrap();
        let coarse = sample_boundary(o, 0.0, 64, false).unwrap();
        let limit = coarse.diagonal() / 64.0;
        let worst = c
            .points
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .fold(0.0, f64::max);
        // Segments touching the endpoint cusp may stop at the depth limit.
        let interior_worst = c
            .points
            .windows(2)
            .zip(c.thetas.windows(2))
            .filter(|(_, t)| t[0] > 1e-3 && t[1] < TAU - 1e-3)
            .map(|(w, _)| (w[1] - w[0]).norm())
            .fold(0.0, f64::max);
        assert!(interior_worst <= limit * (1.0 + 1e-12));
        assert!(worst < 2.0 * limit);
    }

    #[test]
    fn cardioid_crosses_real_axis_at_expected_points() {
        let c = sample_boundary(op(0.9, 0.6), 0.0, 1024, false).unwrap();
        let mid = c.points[512];
        assert!((mid.re - (1.0 - 2f64.powf(0.9))).abs() < 1e-14);
        let (x0, x1, _, _) = c.bounding_box();
        assert!(x0 <= 1.0 - 2f64.powf(0.9) + 1e-12 && x1 >= 1.0);
    }

    #[test]
    fn from_samples_validation() {
        let one = Complex64::new(1.0, 0.0);
        assert!(BoundaryCurve::from_samples(
            vec![0.0, 1.0, 2.0],
            vec![one, Complex64::new(0.0, 1.0), one]
        )
        .is_ok());
        assert!(BoundaryCurve::from_samples(vec![0.0, 1.0], vec![one]).is_err());
        assert!(BoundaryCurve::from_samples(vec![0.0, 0.0, 2.0], vec![one, one, one]).is_err());
        assert!(
            BoundaryCurve::from_samples(vec![0.0, 1.0], vec![one, Complex64::new(0.0, 1.0)])
                .is_err()
        );
    }
}
