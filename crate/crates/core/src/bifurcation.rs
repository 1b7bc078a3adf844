//! Bifurcation values of the coefficient `a`.
//!
//! The closed forms come from the geometry of `γ` at `θ = 0` and `θ = π`:
//! `a₁ = 0` (the `β` term switches on), `a₂ = −2^{α−β}(α−2)/(β−2)` (a cusp at
//! `θ = π`) and `a₄ = −2^{α−β}` (`γ(π) = γ(0) = 1`). `a₃` is where a conjugate
//! pair of interior cusps appears; it is found by solving a one-dimensional
//! equation for the cusp angle `θ*` and checked against the full cusp system.
//!
//! Everything else is numeric: a [`TopologySignature`] is computed on a grid
//! of `a` values and every change is bracketed by bisection.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfun::{gamma_curve, gamma_derivative, mirror_half, sample_boundary, BoundaryCurve};
use crate::dynamics::OrderPair;
use crate::error::{FracError, Result};
use crate::numerics::{bisect, find_brackets, newton2d_with_jacobian, Bracket, NewtonOptions};
use crate::stability::{
    count_enclosed_unstable, count_stable_components, scan_curve, DEFAULT_SAMPLES,
};

const THETA_EDGE: f64 = 1e-6;
const THETA_SUBINTERVALS: usize = 2000;
const THETA_TOL: f64 = 1e-12;
const CUSP_SYSTEM_TOL: f64 = 1e-8;
const CUSP_SCAN_NODES: usize = 4096;
const CUSP_TOL: f64 = 1e-10;
const CROSSING_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-9;
/// Newton roots closer than this in both angles are the same crossing.
const ROOT_SEPARATION: f64 = 1e-7;
const RESOLVE_ROUNDS: usize = 12;
/// Crossings closing a loop shorter than this fraction of the bounding-box
/// diagonal are discarded as rounding noise.
const MIN_LOOP: f64 = 1e-10;
/// Segments split on each side of an unresolved crossing.
const SPLIT_REACH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub a1: f64,
    pub a2: f64,
    pub a4: f64,
}

pub fn closed_form_bifurcations(orders: OrderPair) -> ClosedForms {
    let (alpha, beta) = (orders.alpha(), orders.beta());
    let scale = 2f64.powf(alpha - beta);
    ClosedForms {
        a1: 0.0,
        a2: -scale * (alpha - 2.0) / (beta - 2.0),
        a4: -scale,
    }
}

/// Left side of the cusp-angle equation; its root in `(0, π)` is `θ*`.
pub fn theta_equation(theta: f64, orders: OrderPair) -> f64 {
    let (al, be) = (orders.alpha(), orders.beta());
    (-2.0 + al + be - al * be) * ((PI - theta) * (al - be) / 2.0).sin()
        + (be - 1.0) * ((theta * (-2.0 + al - be) + PI * (be - al)) / 2.0).sin()
        + (al - 1.0) * ((theta * (2.0 + al - be) + PI * (be - al)) / 2.0).sin()
}

/// The value of `a` that puts a cusp at `θ`.
pub fn a3_at(theta: f64, orders: OrderPair) -> f64 {
    let (al, be) = (orders.alpha(), orders.beta());
    let n = |mu: f64| {
        ((-theta * (mu - 3.0) + PI * mu) / 2.0).sin()
            + (mu - 1.0) * ((theta + PI * mu - theta * mu) / 2.0).sin()
    };
    let s = (theta / 2.0).sin();
    -2f64.powf(al - be) * s.powf(al - be) * n(al) / n(be)
}

/// Solution of the cusp-angle equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaStar {
    pub theta: f64,
    pub a3: f64,
    /// `|theta_equation(theta)|`.
    pub residual: f64,
    /// Other roots in `(0, π)` whose `a₃` falls outside `(a₄, a₂)`.
    pub rejected: Vec<f64>,
}

fn require_upper_orders(orders: OrderPair) -> Result<()> {
    if !(orders.beta() > 0.5 && orders.alpha() < 1.0) {
        return Err(FracError::InvalidParameter(format!(
            "cusp angle equation needs 0.5 < beta < alpha < 1, got alpha = {}, beta = {}",
            orders.alpha(),
            orders.beta()
        )));
    }
    Ok(())
}

/// Brackets sign changes on 2000 subintervals of `(10⁻⁶, π − 10⁻⁶)`, bisects
/// each to `10⁻¹²` and keeps the root whose `a₃` lies in `(a₄, a₂)`.
pub fn solve_theta_star(orders: OrderPair) -> Result<ThetaStar> {
    require_upper_orders(orders)?;
    let f = |t: f64| theta_equation(t, orders);
    let cf = closed_form_bifurcations(orders);
    let mut chosen: Option<(f64, f64)> = None;
    let mut rejected = Vec::new();
    for br in find_brackets(f, THETA_EDGE, PI - THETA_EDGE, THETA_SUBINTERVALS) {
        let t = bisect(f, br, THETA_TOL)?;
        let a3 = a3_at(t, orders);
        if chosen.is_none() && a3 > cf.a4 && a3 < cf.a2 {
            chosen = Some((t, a3));
        } else {
            rejected.push(t);
        }
    }
    let (theta, a3) = chosen.ok_or_else(|| {
        FracError::NoRoot(format!(
            "no cusp angle with a3 in (a4, a2) for alpha = {}, beta = {}",
            orders.alpha(),
            orders.beta()
        ))
    })?;
    Ok(ThetaStar {
        theta,
        a3,
        residual: f(theta).abs(),
        rejected,
    })
}

/// `a₃`, accepted only if both cusp conditions vanish to `10⁻⁸` at `(θ*, a₃)`.
pub fn a3_value(orders: OrderPair) -> Result<f64> {
    let ts = solve_theta_star(orders)?;
    let d = gamma_derivative(ts.theta, orders, ts.a3);
    let worst = d.re.abs().max(d.im.abs());
    if worst >= CUSP_SYSTEM_TOL {
        return Err(FracError::NoConvergence {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(ts.a3)
}

/// Interior cusps of `γ`. The endpoint `θ = 0` (≡ `2π`) is always a cusp and
/// is not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspReport {
    pub interior: Vec<f64>,
}

impl CuspReport {
    pub const PERMANENT: f64 = 0.0;

    pub fn count(&self) -> usize {
        self.interior.len()
    }
}

/// Scans `|γ′|` on 4096 interior nodes, polishes every local minimum by
/// bisection on `d|γ′|²/dθ` and keeps those where `|γ′| < 10⁻¹⁰`.
///
/// Interior cusps exist only at isolated values of `a`, so for almost every
/// `a` the list is empty.
pub fn find_cusps(orders: OrderPair, a: f64) -> CuspReport {
    let speed = |t: f64| gamma_derivative(t, orders, a).norm();
    let h = TAU / CUSP_SCAN_NODES as f64;
    let nodes: Vec<f64> = (1..CUSP_SCAN_NODES).map(|j| h * j as f64).collect();
    let v: Vec<f64> = nodes.iter().map(|&t| speed(t)).collect();
    // d|γ′|²/dθ up to a factor 2, with γ″ from central differences of γ′.
    let slope = |t: f64| {
        let e = 1e-6;
        let d2 =
            (gamma_derivative(t + e, orders, a) - gamma_derivative(t - e, orders, a)) / (2.0 * e);
        (gamma_derivative(t, orders, a).conj() * d2).re
    };
    let mut interior: Vec<f64> = Vec::new();
    for j in 1..v.len() - 1 {
        if !(v[j] <= v[j - 1] && v[j] <= v[j + 1] && (v[j] < v[j - 1] || v[j] < v[j + 1])) {
            continue;
        }
        let candidate = if v[j] == 0.0 {
            Some(nodes[j])
        } else {
            Bracket::new(slope, nodes[j - 1], nodes[j + 1])
                .ok()
                .and_then(|br| bisect(slope, br, 1e-13).ok())
        };
        if let Some(t) = candidate {
            if speed(t) < CUSP_TOL && interior.iter().all(|&u| (u - t).abs() > DEDUP_TOL) {
                interior.push(t);
            }
        }
    }
    CuspReport { interior }
}

/// A transverse crossing `γ(theta1) = γ(theta2)` with `theta1 < theta2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfIntersection {
    pub theta1: f64,
    pub theta2: f64,
    pub point: Complex64,
    /// False when Newton refinement was unavailable or failed and the
    /// polyline estimate is reported.
    pub refined: bool,
}

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Segments `i < j` of a polyline crossing at fractions `t` and `u`.
#[derive(Debug, Clone, Copy)]
struct SegmentCrossing {
    i: usize,
    t: f64,
    j: usize,
    u: f64,
    point: Complex64,
}

/// Crossings of non-adjacent segments of a closed polyline, located with a
/// uniform spatial hash. Segments are half-open, so a crossing through a
/// shared vertex is found once; the closing vertex `p[0] = p[n]` is skipped,
/// and so are crossings that close a loop of negligible length.
fn polyline_crossings(pts: &[Complex64]) -> Vec<SegmentCrossing> {
    let nseg = pts.len() - 1;
    let (x0, x1, y0, y1) = pts.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(x0, x1, y0, y1), p| (x0.min(p.re), x1.max(p.re), y0.min(p.im), y1.max(p.im)),
    );
    // About four mean segment lengths, but no finer than 1/4096 of the box.
    let diag = (x1 - x0).hypot(y1 - y0);
    let length: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let cell = (4.0 * length / nseg as f64)
        .clamp(diag / 4096.0, diag / 128.0)
        .max(f64::MIN_POSITIVE);
    let key = |p: f64, o: f64| ((p - o) / cell).floor() as i64;

    // Long segments are entered piece by piece so each piece covers at most
    // 2×2 cells.
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..nseg {
        let (p, q) = (pts[k], pts[k + 1]);
        let pieces = ((q - p).norm() / cell).ceil().max(1.0) as usize;
        let mut last = None;
        for s in 0..pieces {
            let a = p + (q - p) * (s as f64 / pieces as f64);
            let b = if s + 1 == pieces {
                q
            } else {
                p + (q - p) * ((s + 1) as f64 / pieces as f64)
            };
            for gx in key(a.re.min(b.re), x0)..=key(a.re.max(b.re), x0) {
                for gy in key(a.im.min(b.im), y0)..=key(a.im.max(b.im), y0) {
                    if last != Some((gx, gy)) {
                        let v = grid.entry((gx, gy)).or_default();
                        if v.last() != Some(&k) {
                            v.push(k);
                        }
                    }
                    last = Some((gx, gy));
                }
            }
        }
    }

    // Arc length up to each vertex; loops shorter than MIN_LOOP·diag are
    // rounding noise.
    let mut arc = Vec::with_capacity(pts.len());
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc.last().unwrap() + (w[1] - w[0]).norm());
    }
    let min_loop = MIN_LOOP * diag;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for segs in grid.values() {
        for (ii, &i) in segs.iter().enumerate() {
            for &j in &segs[ii + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j == i + 1 || (i == 0 && j == nseg - 1) || !seen.insert((i, j)) {
                    continue;
                }
                let (p, d1) = (pts[i], pts[i + 1] - pts[i]);
                let (q, d2) = (pts[j], pts[j + 1] - pts[j]);
                let denom = cross(d1, d2);
                if denom == 0.0 {
                    continue;
                }
                let t = cross(q - p, d2) / denom;
                let u = cross(q - p, d1) / denom;
                let on_both = (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u);
                let inner =
                    (arc[j] + u * (arc[j + 1] - arc[j])) - (arc[i] + t * (arc[i + 1] - arc[i]));
                let outer = arc[nseg] - inner;
                if on_both && inner.min(outer) > min_loop {
                    out.push(SegmentCrossing {
                        i,
                        t,
                        j,
                        u,
                        point: p + d1 * t,
                    });
                }
            }
        }
    }
    out.sort_by_key(|x| (x.i, x.j));
    out
}

/// A polyline of the curve, locally refined until its crossings match those
/// of `γ` one to one.
struct Arrangement {
    thetas: Vec<f64>,
    points: Vec<Complex64>,
    crossings: Vec<SegmentCrossing>,
    /// Newton-refined `(θ₁, θ₂)` per crossing, `None` when refinement failed
    /// or landed on a root already claimed by another polyline crossing.
    roots: Vec<Option<(f64, f64)>>,
}

/// Where two nearly parallel arcs of `γ` pass close to each other the
/// polyline can cross itself more often than the curve does. Segments around
/// every crossing whose Newton refinement fails or collides with another are
/// split on `γ` and the search repeats, at most [`RESOLVE_ROUNDS`] times and
/// while the crossing count stays below four times its initial value.
fn resolve_crossings(curve: &BoundaryCurve) -> Arrangement {
    let mut thetas = curve.thetas.clone();
    let mut points = curve.points.clone();
    let n = points.len() - 1;
    let symmetric = n % 2 == 0
        && curve.thetas[n / 2] == PI
        && (0..=n).all(|k| points[k] == points[n - k].conj());
    let mut initial = None;
    for round in 0.. {
        let crossings = polyline_crossings(&points);
        let cap = *initial.get_or_insert(crossings.len()) * 4 + 64;
        let mut roots: Vec<Option<(f64, f64)>> = crossings
            .iter()
            .map(|c| {
                let t1 = thetas[c.i] + c.t * (thetas[c.i + 1] - thetas[c.i]);
                let t2 = thetas[c.j] + c.u * (thetas[c.j + 1] - thetas[c.j]);
                // The root must stay on the crossing segments or their
                // neighbours; farther away it belongs to another crossing.
                let near = |t: f64, s: usize| {
                    t >= thetas[s.saturating_sub(1)] && t <= thetas[(s + 2).min(thetas.len() - 1)]
                };
                refine_crossing(curve, t1, t2)
                    .map(|x| (x.theta1, x.theta2))
                    .filter(|&(r1, r2)| near(r1, c.i) && near(r2, c.j))
            })
            .collect();
        let mut bad = vec![false; crossings.len()];
        for k in 0..roots.len() {
            let Some(r) = roots[k] else {
                bad[k] = true;
                continue;
            };
            for l in 0..k {
                if let Some(q) = roots[l] {
                    if (r.0 - q.0).abs() < ROOT_SEPARATION && (r.1 - q.1).abs() < ROOT_SEPARATION {
                        bad[k] = true;
                        bad[l] = true;
                    }
                }
            }
        }
        let Some(src) = curve.source else {
            return Arrangement {
                thetas,
                points,
                crossings,
                roots,
            };
        };
        if !bad.contains(&true) || round == RESOLVE_ROUNDS || crossings.len() > cap {
            // Keep the first of any colliding roots.
            for k in 0..roots.len() {
                if let Some(r) = roots[k] {
                    let taken = roots[..k].iter().flatten().any(|q| {
                        (r.0 - q.0).abs() < ROOT_SEPARATION && (r.1 - q.1).abs() < ROOT_SEPARATION
                    });
                    if taken {
                        roots[k] = None;
                    }
                }
            }
            return Arrangement {
                thetas,
                points,
                crossings,
                roots,
            };
        }

        let nseg = points.len() - 1;
        let mut split = vec![false; nseg];
        for (c, _) in crossings.iter().zip(&bad).filter(|(_, &b)| b) {
            for s in [c.i, c.j] {
                for k in s.saturating_sub(SPLIT_REACH)..=(s + SPLIT_REACH).min(nseg - 1) {
                    split[k] = true;
                }
            }
        }
        // Split mirror segments together so the polyline stays symmetric.
        let last = if symmetric { nseg / 2 } else { nseg };
        if symmetric {
            for k in 0..last {
                split[k] |= split[nseg - 1 - k];
            }
        }
        let mut th = Vec::with_capacity(thetas.len() + 64);
        let mut pt = Vec::with_capacity(points.len() + 64);
        for k in 0..last {
            th.push(thetas[k]);
            pt.push(points[k]);
            let tm = 0.5 * (thetas[k] + thetas[k + 1]);
            if split[k] && tm > thetas[k] && tm < thetas[k + 1] {
                th.push(tm);
                pt.push(gamma_curve(tm, src.orders, src.a));
            }
        }
        th.push(thetas[last]);
        pt.push(points[last]);
        (thetas, points) = if symmetric {
            mirror_half(th, pt)
        } else {
            (th, pt)
        };
    }
    unreachable!()
}

/// Self-intersections of the curve, one per crossing of its polyline.
///
/// With an analytic source the polyline is first refined around crossings
/// that Newton's method on `γ(θ₁) − γ(θ₂) = 0` cannot separate, so spurious
/// crossings between nearly parallel arcs disappear. The shared endpoint
/// `γ(0) = γ(2π)` is not a crossing.
pub fn find_self_intersections(curve: &BoundaryCurve) -> Result<Vec<SelfIntersection>> {
    check_polyline(curve)?;
    let arr = resolve_crossings(curve);
    Ok(arr
        .crossings
        .iter()
        .zip(&arr.roots)
        .map(|(c, r)| match *r {
            Some((theta1, theta2)) => {
                let src = curve.source.expect("roots need a source");
                SelfIntersection {
                    theta1,
                    theta2,
                    point: gamma_curve(theta1, src.orders, src.a),
                    refined: true,
                }
            }
            None => SelfIntersection {
                theta1: arr.thetas[c.i] + c.t * (arr.thetas[c.i + 1] - arr.thetas[c.i]),
                theta2: arr.thetas[c.j] + c.u * (arr.thetas[c.j + 1] - arr.thetas[c.j]),
                point: c.point,
                refined: false,
            },
        })
        .collect())
}

fn check_polyline(curve: &BoundaryCurve) -> Result<()> {
    if curve.len() < 256 {
        return Err(FracError::InvalidParameter(format!(
            "self-intersection search needs at least 256 samples, got {}",
            curve.len()
        )));
    }
    Ok(())
}

fn refine_crossing(curve: &BoundaryCurve, t1: f64, t2: f64) -> Option<SelfIntersection> {
    let src = curve.source?;
    let (o, a) = (src.orders, src.a);
    let f = |x: [f64; 2]| {
        let d = gamma_curve(x[0], o, a) - gamma_curve(x[1], o, a);
        [d.re, d.im]
    };
    let jac = |x: [f64; 2]| {
        let g1 = gamma_derivative(x[0], o, a);
        let g2 = gamma_derivative(x[1], o, a);
        [[g1.re, -g2.re], [g1.im, -g2.im]]
    };
    let x = newton2d_with_jacobian(f, jac, [t1, t2], NewtonOptions::with_tol(CROSSING_TOL)).ok()?;
    let inside = |t: f64| t > 0.0 && t < TAU;
    if !(inside(x[0]) && inside(x[1])) || (x[0] - x[1]).abs() < 1e-8 {
        return None;
    }
    // Newton must not wander to a different crossing.
    if (x[0] - t1).abs() > 0.1 || (x[1] - t2).abs() > 0.1 {
        return None;
    }
    let (theta1, theta2) = if x[0] < x[1] {
        (x[0], x[1])
    } else {
        (x[1], x[0])
    };
    Some(SelfIntersection {
        theta1,
        theta2,
        point: gamma_curve(theta1, o, a),
        refined: true,
    })
}

/// A connected component of the complement of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    /// Winding number of the curve around every point of the face.
    pub winding: i64,
    /// False only for the unbounded face, whose winding is zero.
    pub bounded: bool,
}

/// The faces of the plane cut by the (crossing-resolved) polyline of `curve`.
///
/// Built combinatorially: the crossings split the curve into arcs, the
/// rotation of the four arc ends at each crossing follows from the sign of
/// the tangent cross product, and tracing half-edges with the face on the
/// left enumerates the faces. Windings follow from the unbounded face (zero)
/// and the rule that the face left of an arc winds once more than the face
/// on its right. A closed curve with `V` crossings has `V + 2` faces.
pub fn curve_faces(curve: &BoundaryCurve) -> Result<Vec<Face>> {
    check_polyline(curve)?;
    let arr = resolve_crossings(curve);
    faces_of(&arr.points, &arr.crossings)
}

fn faces_of(pts: &[Complex64], xs: &[SegmentCrossing]) -> Result<Vec<Face>> {
    let inconsistent =
        |what: &str| FracError::Domain(format!("inconsistent curve arrangement: {what}"));
    let n = pts.len() - 1;
    let nv = xs.len();

    // Crossing passages in curve order: (segment, fraction, vertex, branch).
    let mut events: Vec<(usize, f64, usize, usize)> = Vec::with_capacity(2 * nv);
    for (v, c) in xs.iter().enumerate() {
        events.push((c.i, c.t, v, 0));
        events.push((c.j, c.u, v, 1));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let ne = events.len();

    // Half-edge 2k walks arc k forward (event k to event k+1), 2k+1 back.
    let (n_half, face_of) = if nv == 0 {
        (2, vec![0usize, 1])
    } else {
        let mut branch_event = vec![[0usize; 2]; nv];
        for (k, e) in events.iter().enumerate() {
            branch_event[e.2][e.3] = k;
        }
        let out = |e: usize| 2 * e;
        let inc = |e: usize| 2 * ((e + ne - 1) % ne) + 1;
        // Outgoing half-edges at each crossing in counter-clockwise order.
        let rotation: Vec<[usize; 4]> = xs
            .iter()
            .zip(&branch_event)
            .map(|(c, &[e1, e2])| {
                let s = cross(pts[c.i + 1] - pts[c.i], pts[c.j + 1] - pts[c.j]);
                if s > 0.0 {
                    [out(e1), out(e2), inc(e1), inc(e2)]
                } else {
                    [out(e1), inc(e2), inc(e1), out(e2)]
                }
            })
            .collect();
        let end_vertex = |h: usize| {
            let k = h / 2;
            let e = if h % 2 == 0 { (k + 1) % ne } else { k };
            events[e].2
        };
        let next = |h: usize| -> Result<usize> {
            let rot = &rotation[end_vertex(h)];
            let pos = rot
                .iter()
                .position(|&x| x == h ^ 1)
                .ok_or_else(|| inconsistent("rotation"))?;
            Ok(rot[(pos + 3) % 4])
        };
        let n_half = 2 * ne;
        let mut face_of = vec![usize::MAX; n_half];
        let mut nf = 0;
        for h0 in 0..n_half {
            if face_of[h0] != usize::MAX {
                continue;
            }
            let mut h = h0;
            loop {
                face_of[h] = nf;
                h = next(h)?;
                if h == h0 {
                    break;
                }
                if face_of[h] != usize::MAX {
                    return Err(inconsistent("face cycle"));
                }
            }
            nf += 1;
        }
        if nf != nv + 2 {
            return Err(inconsistent(&format!("{nf} faces for {nv} crossings")));
        }
        (n_half, face_of)
    };
    let n_faces = face_of.iter().max().map_or(0, |m| m + 1);
    let arcs = n_half / 2;

    // The face left of the leftmost vertex is unbounded.
    let m = (0..n)
        .min_by(|&a, &b| pts[a].re.total_cmp(&pts[b].re))
        .unwrap_or(0);
    let tangent = pts[m + 1] - pts[if m == 0 { n - 1 } else { m - 1 }];
    let arc = events
        .iter()
        .rposition(|e| (e.0, e.1) <= (m, 0.0))
        .unwrap_or(arcs - 1);
    let exterior = if tangent.im > 0.0 {
        face_of[2 * arc]
    } else if tangent.im < 0.0 {
        face_of[2 * arc + 1]
    } else {
        return Err(inconsistent("horizontal tangent at the leftmost vertex"));
    };

    let mut winding: Vec<Option<i64>> = vec![None; n_faces];
    winding[exterior] = Some(0);
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..arcs {
            let (l, r) = (face_of[2 * k], face_of[2 * k + 1]);
            match (winding[l], winding[r]) {
                (Some(wl), Some(wr)) if wl != wr + 1 => return Err(inconsistent("winding")),
                (Some(wl), None) => {
                    winding[r] = Some(wl - 1);
                    changed = true;
                }
                (None, Some(wr)) => {
                    winding[l] = Some(wr + 1);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    winding
        .into_iter()
        .enumerate()
        .map(|(f, w)| {
            Ok(Face {
                winding: w.ok_or_else(|| inconsistent("unreached face"))?,
                bounded: f != exterior,
            })
        })
        .collect()
}

/// Integer summary of the stability picture at one value of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TopologySignature {
    pub n_self_intersections: usize,
    pub n_cusps: usize,
    /// Faces with winding number one.
    pub n_stable_components: usize,
    /// Bounded faces with winding number other than one.
    pub n_unstable_subregions: usize,
}

/// How the stable and unstable regions of a signature are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionCount {
    /// Exact faces of the curve arrangement ([`curve_faces`]).
    Faces,
    /// Grid components of a `n × n` scan of the auto window
    /// ([`count_stable_components`], [`count_enclosed_unstable`]); regions
    /// narrower than a grid cell are missed.
    Grid(usize),
}

/// Curve sampling and region counting used for a signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureOptions {
    pub samples: usize,
    pub regions: RegionCount,
}

impl Default for SignatureOptions {
    fn default() -> Self {
        SignatureOptions {
            samples: DEFAULT_SAMPLES,
            regions: RegionCount::Faces,
        }
    }
}

/// Signature with [`DEFAULT_SAMPLES`] and exact face counting.
pub fn topology_signature(orders: OrderPair, a: f64) -> Result<TopologySignature> {
    topology_signature_with(orders, a, SignatureOptions::default())
}

pub fn topology_signature_with(
    orders: OrderPair,
    a: f64,
    opts: SignatureOptions,
) -> Result<TopologySignature> {
    if a + 1.0 == 0.0 {
        return Err(FracError::SingularParameter { a });
    }
    let curve = sample_boundary(orders, a, opts.samples, true)?;
    check_polyline(&curve)?;
    let arr = resolve_crossings(&curve);
    let (n_stable_components, n_unstable_subregions) = match opts.regions {
        RegionCount::Faces => {
            let faces = faces_of(&arr.points, &arr.crossings)?;
            (
                faces.iter().filter(|f| f.winding == 1).count(),
                faces.iter().filter(|f| f.bounded && f.winding != 1).count(),
            )
        }
        RegionCount::Grid(n) => {
            let report = scan_curve(&curve, None, n, n)?;
            (
                count_stable_components(&report),
                count_enclosed_unstable(&report),
            )
        }
    };
    Ok(TopologySignature {
        n_self_intersections: arr.crossings.len(),
        n_cusps: find_cusps(orders, a).count(),
        n_stable_components,
        n_unstable_subregions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub step: f64,
    /// Events are bisected until their bracket is narrower than this.
    pub refine_tol: f64,
    pub signature: SignatureOptions,
}

impl Default for SweepOptions {
    /// Step `10⁻³`, tolerance `10⁻⁶`, default signatures. Events closer than
    /// the step (e.g. two cusp births `6·10⁻⁴` apart) need a smaller step.
    fn default() -> Self {
        SweepOptions {
            step: 1e-3,
            refine_tol: 1e-6,
            signature: SignatureOptions::default(),
        }
    }
}

/// A change of signature between two nearby values of `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationEvent {
    /// Midpoint of the final bracket.
    pub a: f64,
    pub width: f64,
    /// Signature on the larger-`a` side (before, sweeping downward).
    pub before: TopologySignature,
    pub after: TopologySignature,
    /// The bracket straddles the excluded point `a = −1`.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationSet {
    pub orders: OrderPair,
    pub closed: ClosedForms,
    /// Present when `0.5 < β < α < 1` and the cusp-angle equation solves.
    pub theta_star: Option<ThetaStar>,
    pub a_from: f64,
    pub a_to: f64,
    /// Ordered by decreasing `a`.
    pub events: Vec<BifurcationEvent>,
}

/// Sweeps `a` downward from `a_from` to `a_to`.
///
/// Grid points within half a step of `a = −1` are skipped; a signature
/// change across that gap is reported with `singular` set instead of being
/// bisected.
pub fn sweep_bifurcations(
    orders: OrderPair,
    a_from: f64,
    a_to: f64,
    opts: SweepOptions,
) -> Result<BifurcationSet> {
    if !(a_from.is_finite() && a_to.is_finite() && a_from > a_to) {
        return Err(FracError::InvalidParameter(format!(
            "sweep runs downward: need a_from > a_to, got {a_from} and {a_to}"
        )));
    }
    if !(opts.step > 0.0 && opts.refine_tol > 0.0) {
        return Err(FracError::InvalidParameter(
            "step and refine_tol must be positive".into(),
        ));
    }
    let n = ((a_from - a_to) / opts.step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| a_from - opts.step * k as f64).collect();
    if a_to < grid[n] - 1e-12 {
        grid.push(a_to);
    }
    grid.retain(|a| (a + 1.0).abs() >= 0.5 * opts.step);

    let sig = |a: f64| topology_signature_with(orders, a, opts.signature);
    let sigs: Vec<TopologySignature> = grid.par_iter().map(|&a| sig(a)).collect::<Result<_>>()?;

    let pairs: Vec<usize> = (0..grid.len().saturating_sub(1))
        .filter(|&k| sigs[k] != sigs[k + 1])
        .collect();
    let mut events: Vec<BifurcationEvent> = pairs
        .par_iter()
        .map(|&k| {
            let (mut hi, mut lo) = (grid[k], grid[k + 1]);
            // `after` stays the grid value so consecutive events chain even when
            // an ill-conditioned band sits inside one step.
            let (before, after) = (sigs[k], sigs[k + 1]);
            if hi > -1.0 && lo < -1.0 {
                return Ok(BifurcationEvent {
                    a: -1.0,
                    width: hi - lo,
                    before,
                    after,
                    singular: true,
                });
            }
            // Keep the change bracketed nearest to the larger-a side.
            while hi - lo > opts.refine_tol {
                let mid = 0.5 * (hi + lo);
                let s = sig(mid)?;
                if s != before {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(BifurcationEvent {
                a: 0.5 * (hi + lo),
                width: hi - lo,
                before,
                after,
                singular: false,
            })
        })
        .collect::<Result<_>>()?;
    events.sort_by(|p, q| q.a.total_cmp(&p.a));

    let theta_star = require_upper_orders(orders)
        .ok()
        .and_then(|_| solve_theta_star(orders).ok());
    Ok(BifurcationSet {
        orders,
        closed: closed_form_bifurcations(orders),
        theta_star,
        a_from,
        a_to,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::cusp_conditions;

    fn op(alpha: f64, beta: f64) -> OrderPair {
        OrderPair::new(alpha, beta).unwrap()
    }

    #[test]
    fn closed_forms() {
        let c = closed_form_bifurcations(op(0.9, 0.6));
        assert_eq!(c.a1, 0.0);
        assert!((c.a2 + 0.967_327_753_3).abs() < 1e-9);
        assert!((c.a4 + 1.231_144_413_3).abs() < 1e-9);
        assert!((closed_form_bifurcations(op(0.4, 0.2)).a4 + 1.148_698_355).abs() < 1e-9);
    }

    #[test]
    fn theta_star_regression() {
        let ts = solve_theta_star(op(0.9, 0.6)).unwrap();
        assert!(ts.residual < 1e-10);
        assert!((ts.theta - 1.025_314_400_600_986_2).abs() < 1e-10);
        assert!((ts.a3 + 1.096_629_645_841_341_1).abs() < 1e-9);

        let ts = solve_theta_star(op(0.99, 0.98)).unwrap();
        let (re, im) = cusp_conditions(ts.theta, op(0.99, 0.98), ts.a3).unwrap();
        assert!(re.abs() < 1e-8 && im.abs() < 1e-8);
    }

    #[test]
    fn theta_star_needs_beta_above_half() {
        assert!(matches!(
            solve_theta_star(op(0.4, 0.2)),
            Err(FracError::InvalidParameter(_))
        ));
        assert!(a3_value(op(1.0, 0.6)).is_err());
    }

    #[test]
    fn a3_between_neighbours() {
        let o = op(0.9, 0.6);
        let a3 = a3_value(o).unwrap();
        let c = closed_form_bifurcations(o);
        assert!(c.a4 < a3 && a3 < c.a2 && a3 > -1.17);
    }

    #[test]
    fn cusps_of_cardioid_and_at_bifurcations() {
        let o = op(0.9, 0.6);
        assert!(find_cusps(o, 0.0).interior.is_empty());

        let c = closed_form_bifurcations(o);
        let at_a2 = find_cusps(o, c.a2);
        assert!(
            at_a2.interior.iter().any(|t| (t - PI).abs() < 1e-9),
            "{:?}",
            at_a2
        );

        let ts = solve_theta_star(o).unwrap();
        let at_a3 = find_cusps(o, ts.a3);
        assert_eq!(at_a3.count(), 2, "{:?}", at_a3);
        assert!((at_a3.interior[0] + at_a3.interior[1] - TAU).abs() < 1e-9);
        assert!((at_a3.interior[0] - ts.theta).abs() < 1e-9);
    }

    #[test]
    fn crossings_by_regime() {
        let o = op(0.9, 0.6);
        let c = sample_boundary(o, 0.0, 1024, true).unwrap();
        assert!(find_self_intersections(&c).unwrap().is_empty());

        let c = sample_boundary(o, -0.89, 1024, true).unwrap();
        let x = find_self_intersections(&c).unwrap();
        assert_eq!(x.len(), 1, "{x:?}");
        assert!(x[0].refined && x[0].point.im.abs() < 1e-10);
        assert!((x[0].theta1 + x[0].theta2 - TAU).abs() < 1e-9);

        let small = sample_boundary(o, 0.0, 64, false).unwrap();
        assert!(find_self_intersections(&small).is_err());
    }

    #[test]
    fn signature_of_cardioid() {
        let s = topology_signature_with(
            op(0.9, 0.6),
            0.0,
            SignatureOptions {
                samples: 1024,
                regions: RegionCount::Grid(100),
            },
        )
        .unwrap();
        assert_eq!(
            s,
            TopologySignature {
                n_self_intersections: 0,
                n_cusps: 0,
                n_stable_components: 1,
                n_unstable_subregions: 0
            }
        );
    }

    #[test]
    fn sweep_validation() {
        let o = op(0.9, 0.6);
        assert!(sweep_bifurcations(o, -1.0, 0.0, SweepOptions::default()).is_err());
        let bad = SweepOptions {
            step: 0.0,
            ..SweepOptions::default()
        };
        assert!(sweep_bifurcations(o, 0.0, -1.0, bad).is_err());
    }
}
