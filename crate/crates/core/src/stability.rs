//! Stability classification of the multiplier `b`.
//!
//! `H(z) = z(1−z^{−1})^α + a·z(1−z^{−1})^β + 1` is analytic for `|z| > 1`
//! with a simple pole at infinity (leading coefficient `1 + a ≠ 0`). By the
//! argument principle the number of roots of `H(z) = b` outside the closed
//! unit disk is `1 − W`, where `W` is the winding number of the boundary
//! curve `γ` around `b`. All roots lie inside the unit circle exactly when
//! `W = 1`, which is the stability test used throughout this module.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfun::{sample_boundary, BoundaryCurve};
use crate::dynamics::OrderPair;
use crate::error::{FracError, Result};

/// Default number of curve samples before adaptive refinement.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Default region grid size (rows and columns).
pub const DEFAULT_GRID: usize = 400;
/// Marginal band as a fraction of the curve's bounding-box diagonal.
pub const MARGINAL_FRACTION: f64 = 1e-6;

const MAX_WINDING_DEPTH: u32 = 40;
const DEGENERATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }

    /// One-letter cell code used in region matrices.
    pub fn as_char(&self) -> char {
        match self {
            Verdict::Stable => 'S',
            Verdict::Unstable => 'U',
            Verdict::Marginal => 'M',
        }
    }
}

/// Winding number together with the raw accumulated angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingDetail {
    pub winding: i64,
    /// Sum of the argument increments, ideally `2π·winding`.
    pub total_angle: f64,
    /// Smallest distance from `b` to a leaf segment of the polyline.
    pub min_distance: f64,
}

/// Half-width of the marginal band around `curve`.
pub fn marginal_band(curve: &BoundaryCurve) -> f64 {
    MARGINAL_FRACTION * curve.diagonal()
}

fn segment_distance(b: Complex64, p0: Complex64, p1: Complex64) -> f64 {
    let d = p1 - p0;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (b - p0).norm();
    }
    let t = (((b - p0) * d.conj()).re / len2).clamp(0.0, 1.0);
    (b - (p0 + d * t)).norm()
}

struct WindingWalk<'a> {
    curve: &'a BoundaryCurve,
    b: Complex64,
    band: f64,
    min_distance: f64,
}

impl WindingWalk<'_> {
    /// Angle swept by `γ − b` over one segment. Segments whose chord exceeds
    /// their distance to `b` are split on the true curve when possible.
    fn segment(
        &mut self,
        t0: f64,
        p0: Complex64,
        t1: f64,
        p1: Complex64,
        depth: u32,
    ) -> Result<f64> {
        let d = segment_distance(self.b, p0, p1);
        let chord = (p1 - p0).norm();
        if chord > d && depth < MAX_WINDING_DEPTH {
            let tm = 0.5 * (t0 + t1);
            if tm > t0 && tm < t1 {
                if let Some(pm) = self.curve.eval(tm) {
                    return Ok(self.segment(t0, p0, tm, pm, depth + 1)?
                        + self.segment(tm, pm, t1, p1, depth + 1)?);
                }
            }
        }
        self.min_distance = self.min_distance.min(d);
        if d < self.band {
            return Err(FracError::MarginalProximity {
                distance: d,
                band: self.band,
            });
        }
        Ok(((p1 - self.b) / (p0 - self.b)).arg())
    }
}

/// Winding number of the curve around `b`, plus diagnostics.
///
/// Sums principal argument increments over the polyline. A segment is split
/// on `γ` whenever `b` is closer to it than its own length, which also covers
/// every increment larger than π/2. Points within the marginal band of a leaf
/// segment yield [`FracError::MarginalProximity`].
pub fn winding_detail(curve: &BoundaryCurve, b: Complex64) -> Result<WindingDetail> {
    let mut walk = WindingWalk {
        curve,
        b,
        band: marginal_band(curve),
        min_distance: f64::INFINITY,
    };
    let mut total = 0.0;
    for k in 0..curve.len().saturating_sub(1) {
        total += walk.segment(
            curve.thetas[k],
            curve.points[k],
            curve.thetas[k + 1],
            curve.points[k + 1],
            0,
        )?;
    }
    Ok(WindingDetail {
        winding: (total / TAU).round() as i64,
        total_angle: total,
        min_distance: walk.min_distance,
    })
}

pub fn winding_number(curve: &BoundaryCurve, b: Complex64) -> Result<i64> {
    winding_detail(curve, b).map(|w| w.winding)
}

/// Stable iff the winding number is one; marginal inside the band.
pub fn classify_on_curve(curve: &BoundaryCurve, b: Complex64) -> Verdict {
    verdict_of(winding_number(curve, b).ok())
}

/// Classifies `b` against an adaptively refined curve sampled at `m` nodes.
pub fn classify_point(orders: OrderPair, a: f64, b: Complex64, m: usize) -> Result<Verdict> {
    if a + 1.0 == 0.0 {
        return Err(FracError::SingularParameter { a });
    }
    let curve = sample_boundary(orders, a, m, true)?;
    Ok(classify_on_curve(&curve, b))
}

/// The real multipliers `b ∈ (b_lo, b_hi)` bounded by the curve's two real
/// points `γ(π)` and `γ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealInterval {
    pub b_lo: f64,
    pub b_hi: f64,
    /// `b_lo ≥ 1` up to a `1e-12` rounding slack: the interval is empty.
    pub degenerate: bool,
}

pub fn real_interval(orders: OrderPair, a: f64) -> RealInterval {
    let b_lo = 1.0 - 2f64.powf(orders.alpha()) - a * 2f64.powf(orders.beta());
    RealInterval {
        b_lo,
        b_hi: 1.0,
        degenerate: b_lo >= 1.0 - DEGENERATE_SLACK,
    }
}

/// Axis-aligned rectangle of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(FracError::InvalidParameter(format!(
                "window needs re_min < re_max and im_min < im_max, got [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Window {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// The curve's bounding box grown by 10% (5% of each extent per side).
    pub fn around(curve: &BoundaryCurve) -> Self {
        let (x0, x1, y0, y1) = curve.bounding_box();
        let px = 0.05 * (x1 - x0).max(1e-9);
        let py = 0.05 * (y1 - y0).max(1e-9);
        Window {
            re_min: x0 - px,
            re_max: x1 + px,
            im_min: y0 - py,
            im_max: y1 + py,
        }
    }
}

/// One stable component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub cells: usize,
    pub row: usize,
    pub col: usize,
    /// The component cell farthest (in grid steps) from any other verdict.
    pub representative: Complex64,
}

/// Verdicts on a `rows × cols` grid of nodes spanning `window`, row 0 at
/// `im_max`, column 0 at `re_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub orders: OrderPair,
    pub a: f64,
    pub window: Window,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub verdicts: Vec<Verdict>,
    /// Row-major winding numbers; `None` inside the marginal band.
    pub windings: Vec<Option<i64>>,
    /// Cell index pairs known to lie in the same face of the curve although
    /// not 4-connected on the grid.
    pub links: Vec<(usize, usize)>,
    /// Stable components, in scan order of their first cell.
    pub components: Vec<Component>,
}

impl RegionReport {
    pub fn verdict(&self, row: usize, col: usize) -> Verdict {
        self.verdicts[row * self.cols + col]
    }

    pub fn node(&self, row: usize, col: usize) -> Complex64 {
        grid_node(&self.window, self.rows, self.cols, row, col)
    }
}

fn grid_node(w: &Window, rows: usize, cols: usize, row: usize, col: usize) -> Complex64 {
    Complex64::new(
        w.re_min + (w.re_max - w.re_min) * col as f64 / (cols - 1) as f64,
        w.im_max - (w.im_max - w.im_min) * row as f64 / (rows - 1) as f64,
    )
}

/// Samples the curve with [`DEFAULT_SAMPLES`] and refinement, then
/// classifies every grid node against it.
pub fn scan_region(
    orders: OrderPair,
    a: f64,
    window: Option<Window>,
    rows: usize,
    cols: usize,
) -> Result<RegionReport> {
    scan_region_with(orders, a, window, rows, cols, DEFAULT_SAMPLES)
}

pub fn scan_region_with(
    orders: OrderPair,
    a: f64,
    window: Option<Window>,
    rows: usize,
    cols: usize,
    samples: usize,
) -> Result<RegionReport> {
    if a + 1.0 == 0.0 {
        return Err(FracError::SingularParameter { a });
    }
    let curve = sample_boundary(orders, a, samples, true)?;
    let mut report = scan_curve(&curve, window, rows, cols)?;
    report.orders = orders;
    report.a = a;
    Ok(report)
}

/// Region map against an analytically generated curve.
///
/// Rows are processed independently. Each row first gets polyline winding
/// numbers from signed crossings of the horizontal line through it. Nodes
/// close enough to a segment that [`winding_detail`] would refine it (or flag
/// it marginal) then receive the difference between the refined and the
/// straight-segment angle of that segment, so every verdict equals
/// [`classify_on_curve`] for the same curve.
pub fn scan_curve(
    curve: &BoundaryCurve,
    window: Option<Window>,
    rows: usize,
    cols: usize,
) -> Result<RegionReport> {
    let source = curve.source.ok_or_else(|| {
        FracError::InvalidParameter("region scans need an analytically generated curve".into())
    })?;
    if rows < 16 || cols < 16 {
        return Err(FracError::InvalidParameter(format!(
            "region grid must be at least 16 x 16, got {rows} x {cols}"
        )));
    }
    let window = window.unwrap_or_else(|| Window::around(curve));
    let band = marginal_band(curve);
    let pts = &curve.points;
    let th = &curve.thetas;

    // Rows each segment can influence: its y-range grown by its reach.
    let dy = (window.im_max - window.im_min) / (rows - 1) as f64;
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); rows];
    for k in 0..pts.len().saturating_sub(1) {
        let (p0, p1) = (pts[k], pts[k + 1]);
        let reach = 1.01 * (p1 - p0).norm().max(band);
        let first = ((window.im_max - p0.im.max(p1.im) - reach) / dy)
            .floor()
            .max(0.0);
        let last = ((window.im_max - p0.im.min(p1.im) + reach) / dy).ceil();
        if last < 0.0 || first > (rows - 1) as f64 {
            continue;
        }
        for r in first as usize..=(last as usize).min(rows - 1) {
            by_row[r].push(k);
        }
    }

    let windings: Vec<Option<i64>> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = grid_node(&window, rows, cols, row, 0).im;
            let xs: Vec<f64> = (0..cols)
                .map(|c| grid_node(&window, rows, cols, row, c).re)
                .collect();
            let dx = (window.re_max - window.re_min) / (cols - 1) as f64;

            let mut crossings: Vec<(f64, i64)> = Vec::new();
            let mut correction = vec![0.0; cols];
            let mut marginal = vec![false; cols];
            let mut on_polyline = vec![false; cols];
            for &k in &by_row[row] {
                let (p0, p1) = (pts[k], pts[k + 1]);
                if (p0.im <= y) != (p1.im <= y) {
                    let x = p0.re + (y - p0.im) * (p1.re - p0.re) / (p1.im - p0.im);
                    crossings.push((x, if p1.im > p0.im { 1 } else { -1 }));
                }
                let reach = 1.01 * (p1 - p0).norm().max(band);
                if y < p0.im.min(p1.im) - reach || y > p0.im.max(p1.im) + reach {
                    continue;
                }
                let lo = ((p0.re.min(p1.re) - reach - window.re_min) / dx)
                    .floor()
                    .max(0.0) as usize;
                let hi = ((p0.re.max(p1.re) + reach - window.re_min) / dx).ceil();
                if hi < 0.0 {
                    continue;
                }
                for c in lo..=(hi as usize).min(cols - 1) {
                    let b = Complex64::new(xs[c], y);
                    let d = segment_distance(b, p0, p1);
                    if d >= reach || marginal[c] || on_polyline[c] {
                        continue;
                    }
                    if d == 0.0 {
                        on_polyline[c] = true;
                        continue;
                    }
                    let mut walk = WindingWalk {
                        curve,
                        b,
                        band,
                        min_distance: f64::INFINITY,
                    };
                    match walk.segment(th[k], p0, th[k + 1], p1, 0) {
                        Ok(angle) => correction[c] += angle - ((p1 - b) / (p0 - b)).arg(),
                        Err(_) => marginal[c] = true,
                    }
                }
            }
            crossings.sort_by(|p, q| p.0.total_cmp(&q.0));

            // Polyline winding of a node = sum of crossing signs to its right.
            let mut out = vec![None; cols];
            let mut k = crossings.len();
            let mut right_sum: i64 = 0;
            for c in (0..cols).rev() {
                while k > 0 && crossings[k - 1].0 > xs[c] {
                    k -= 1;
                    right_sum += crossings[k].1;
                }
                out[c] = if on_polyline[c] {
                    winding_number(curve, Complex64::new(xs[c], y)).ok()
                } else if marginal[c] {
                    None
                } else {
                    Some(right_sum + (correction[c] / TAU).round() as i64)
                };
            }
            out
        })
        .collect();

    let verdicts: Vec<Verdict> = windings.iter().map(|w| verdict_of(*w)).collect();
    let links = visibility_links(curve, &windings, &window, rows, cols);
    let components = stable_components(&verdicts, rows, cols, &links)
        .into_iter()
        .map(|(cells, row, col)| Component {
            cells,
            row,
            col,
            representative: grid_node(&window, rows, cols, row, col),
        })
        .collect();
    Ok(RegionReport {
        orders: source.orders,
        a: source.a,
        window,
        rows,
        cols,
        verdicts,
        windings,
        links,
        components,
    })
}

fn verdict_of(w: Option<i64>) -> Verdict {
    match w {
        Some(1) => Verdict::Stable,
        Some(_) => Verdict::Unstable,
        None => Verdict::Marginal,
    }
}

/// 4-connected labelling of cells with equal keys. Returns `(labels, count)`
/// with `usize::MAX` for cells whose key is `None`.
fn label_by<K: PartialEq + Copy>(
    keys: &[Option<K>],
    rows: usize,
    cols: usize,
) -> (Vec<usize>, usize) {
    let mut labels = vec![usize::MAX; keys.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..keys.len() {
        if keys[start].is_none() || labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            for nb in neighbours(idx, rows, cols).into_iter().flatten() {
                if labels[nb] == usize::MAX && keys[nb].is_some() && keys[nb] == keys[idx] {
                    labels[nb] = count;
                    queue.push_back(nb);
                }
            }
        }
        count += 1;
    }
    (labels, count)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Like [`label_by`], then merges labels joined by a link between two cells
/// with equal keys. Labels are renumbered `0..count` in scan order.
fn group_by<K: PartialEq + Copy>(
    keys: &[Option<K>],
    rows: usize,
    cols: usize,
    links: &[(usize, usize)],
) -> (Vec<usize>, usize) {
    let (mut labels, count) = label_by(keys, rows, cols);
    let mut parent: Vec<usize> = (0..count).collect();
    for &(p, q) in links {
        if p < keys.len() && q < keys.len() && keys[p].is_some() && keys[p] == keys[q] {
            let (rp, rq) = (find(&mut parent, labels[p]), find(&mut parent, labels[q]));
            parent[rp.max(rq)] = rp.min(rq);
        }
    }
    let mut renumber = vec![usize::MAX; count];
    let mut next = 0;
    for l in labels.iter_mut().filter(|l| **l != usize::MAX) {
        let root = find(&mut parent, *l);
        if renumber[root] == usize::MAX {
            renumber[root] = next;
            next += 1;
        }
        *l = renumber[root];
    }
    (labels, next)
}

fn neighbours(idx: usize, rows: usize, cols: usize) -> [Option<usize>; 4] {
    let (r, c) = (idx / cols, idx % cols);
    [
        (r > 0).then(|| idx - cols),
        (r + 1 < rows).then(|| idx + cols),
        (c > 0).then(|| idx - 1),
        (c + 1 < cols).then(|| idx + 1),
    ]
}

fn stable_keys(verdicts: &[Verdict]) -> Vec<Option<()>> {
    verdicts
        .iter()
        .map(|v| (*v == Verdict::Stable).then_some(()))
        .collect()
}

/// Stable components as `(cells, row, col)` of the deepest cell.
fn stable_components(
    verdicts: &[Verdict],
    rows: usize,
    cols: usize,
    links: &[(usize, usize)],
) -> Vec<(usize, usize, usize)> {
    let keys = stable_keys(verdicts);
    let (cells4, _) = label_by(&keys, rows, cols);
    let (groups, count) = group_by(&keys, rows, cols, links);
    let mut depth = vec![usize::MAX; verdicts.len()];
    let mut queue = VecDeque::new();
    for idx in 0..verdicts.len() {
        if cells4[idx] == usize::MAX {
            continue;
        }
        let edge = neighbours(idx, rows, cols)
            .iter()
            .any(|nb| nb.map_or(true, |n| cells4[n] != cells4[idx]));
        if edge {
            depth[idx] = 0;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        for nb in neighbours(idx, rows, cols).into_iter().flatten() {
            if cells4[nb] == cells4[idx] && depth[nb] == usize::MAX {
                depth[nb] = depth[idx] + 1;
                queue.push_back(nb);
            }
        }
    }
    let mut best: Vec<Option<(usize, usize)>> = vec![None; count];
    let mut sizes = vec![0usize; count];
    for idx in 0..verdicts.len() {
        let g = groups[idx];
        if g == usize::MAX {
            continue;
        }
        sizes[g] += 1;
        if best[g].map_or(true, |(_, d)| depth[idx] > d) {
            best[g] = Some((idx, depth[idx]));
        }
    }
    best.into_iter()
        .zip(sizes)
        .filter_map(|(b, n)| b.map(|(idx, _)| (n, idx / cols, idx % cols)))
        .collect()
}

fn segments_cross(p: Complex64, q: Complex64, u: Complex64, v: Complex64) -> bool {
    let orient = |a: Complex64, b: Complex64, c: Complex64| ((b - a).conj() * (c - a)).im;
    let (d1, d2) = (orient(u, v, p), orient(u, v, q));
    let (d3, d4) = (orient(p, q, u), orient(p, q, v));
    // Touching counts as crossing; links must be unambiguous.
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Grid cells this close (in grid steps) are tested for mutual visibility.
const LINK_RADIUS: usize = 8;

/// Pairs of cells with equal winding in different 4-connected components
/// whose connecting segment does not touch the curve. Both then lie in the
/// same face of the curve, which the grid sampled as disconnected pieces
/// (typically the thin tip of a lobe).
fn visibility_links(
    curve: &BoundaryCurve,
    windings: &[Option<i64>],
    window: &Window,
    rows: usize,
    cols: usize,
) -> Vec<(usize, usize)> {
    let (labels, count) = label_by(windings, rows, cols);
    let node = |idx: usize| grid_node(window, rows, cols, idx / cols, idx % cols);
    let mut candidates: Vec<((usize, usize), (usize, usize))> = Vec::new();
    let mut seen_pair = std::collections::HashSet::new();
    let mut dist = vec![usize::MAX; windings.len()];
    let mut origin = vec![usize::MAX; windings.len()];
    let mut touched = Vec::new();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (idx, &l) in labels.iter().enumerate() {
        if l != usize::MAX {
            members[l].push(idx);
        }
    }
    for l in 0..count {
        let mut queue = VecDeque::new();
        for &idx in &members[l] {
            let edge = neighbours(idx, rows, cols)
                .iter()
                .flatten()
                .any(|&n| labels[n] != l);
            if edge {
                dist[idx] = 0;
                origin[idx] = idx;
                touched.push(idx);
                queue.push_back(idx);
            }
        }
        while let Some(idx) = queue.pop_front() {
            if dist[idx] >= LINK_RADIUS {
                continue;
            }
            for nb in neighbours(idx, rows, cols).into_iter().flatten() {
                if labels[nb] == l || dist[nb] != usize::MAX {
                    continue;
                }
                dist[nb] = dist[idx] + 1;
                origin[nb] = origin[idx];
                touched.push(nb);
                let m = labels[nb];
                if m != usize::MAX && windings[nb] == windings[origin[idx]] {
                    if l < m && seen_pair.insert((l, m)) {
                        candidates.push(((l, m), (origin[idx], nb)));
                    }
                    continue;
                }
                queue.push_back(nb);
            }
        }
        for idx in touched.drain(..) {
            dist[idx] = usize::MAX;
            origin[idx] = usize::MAX;
        }
    }
    candidates
        .into_par_iter()
        .filter(|&(_, (p, q))| {
            let (a, b) = (node(p), node(q));
            !curve
                .points
                .windows(2)
                .any(|w| segments_cross(a, b, w[0], w[1]))
        })
        .map(|(_, cells)| cells)
        .collect()
}

/// Number of stable components: 4-connected stable cells, merged across
/// the report's visibility links. Marginal cells do not connect.
pub fn count_stable_components(report: &RegionReport) -> usize {
    group_by(
        &stable_keys(&report.verdicts),
        report.rows,
        report.cols,
        &report.links,
    )
    .1
}

/// Unstable regions enclosed by the curve: components of equal winding
/// number `W ≠ 1` (4-connected, merged across visibility links) that do not
/// touch the window border.
///
/// Grouping by winding number separates pockets bounded by a loop of the
/// curve from the exterior even where they share a grid edge.
pub fn count_enclosed_unstable(report: &RegionReport) -> usize {
    let (rows, cols) = (report.rows, report.cols);
    let keys: Vec<Option<i64>> = report
        .windings
        .iter()
        .map(|w| w.filter(|&w| w != 1))
        .collect();
    let (labels, count) = group_by(&keys, rows, cols, &report.links);
    let mut touches = vec![false; count];
    for r in 0..rows {
        for c in 0..cols {
            if r == 0 || c == 0 || r + 1 == rows || c + 1 == cols {
                let l = labels[r * cols + c];
                if l != usize::MAX {
                    touches[l] = true;
                }
            }
        }
    }
    touches.iter().filter(|t| !**t).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(alpha: f64, beta: f64) -> OrderPair {
        OrderPair::new(alpha, beta).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn far_point_has_zero_winding() {
        let curve = sample_boundary(op(0.9, 0.6), 0.0, 1024, true).unwrap();
        assert_eq!(winding_number(&curve, c(100.0, 100.0)).unwrap(), 0);
        assert_eq!(winding_number(&curve, c(0.5, 0.0)).unwrap(), 1);
    }

    #[test]
    fn endpoint_is_marginal() {
        let curve = sample_boundary(op(0.9, 0.6), 0.0, 256, true).unwrap();
        assert!(matches!(
            winding_number(&curve, c(1.0, 0.0)),
            Err(FracError::MarginalProximity { .. })
        ));
        assert_eq!(classify_on_curve(&curve, c(1.0, 0.0)), Verdict::Marginal);
    }

    #[test]
    fn polyline_only_curve_winds() {
        let n = 64;
        let thetas: Vec<f64> = (0..=n).map(|k| TAU * k as f64 / n as f64).collect();
        let points: Vec<Complex64> = thetas
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        let circle = BoundaryCurve::from_samples(thetas, points).unwrap();
        assert_eq!(winding_number(&circle, c(0.1, -0.2)).unwrap(), 1);
        assert_eq!(winding_number(&circle, c(1.5, 0.0)).unwrap(), 0);
    }

    #[test]
    fn known_verdicts_for_09_06() {
        let o = op(0.9, 0.6);
        assert_eq!(
            classify_point(o, 0.0, c(0.5, 0.5), DEFAULT_SAMPLES).unwrap(),
            Verdict::Stable
        );
        assert_eq!(
            classify_point(o, 0.0, c(1.0, -0.9), DEFAULT_SAMPLES).unwrap(),
            Verdict::Unstable
        );
        assert_eq!(
            classify_point(o, -2.5, c(1.5, -1.0), DEFAULT_SAMPLES).unwrap(),
            Verdict::Stable
        );
        assert!(matches!(
            classify_point(o, -1.0, c(0.5, 0.0), DEFAULT_SAMPLES),
            Err(FracError::SingularParameter { .. })
        ));
    }

    #[test]
    fn real_interval_cases() {
        let r = real_interval(op(0.8, 0.2), 0.6);
        assert!((r.b_lo + 1.43032).abs() < 5e-6 && r.b_hi == 1.0 && !r.degenerate);
        let r = real_interval(op(0.7, 0.3), 0.0);
        assert_eq!(r.b_lo, 1.0 - 2f64.powf(0.7));
        let r = real_interval(op(0.7, 0.3), -2f64.powf(0.4));
        assert!(r.degenerate && (r.b_lo - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(0.0, 1.0, 0.0, 1.0).is_ok());
        assert!(Window::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Window::new(0.0, 1.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn region_scan_matches_pointwise_classification() {
        let o = op(0.9, 0.6);
        let curve = sample_boundary(o, -0.89, 1024, true).unwrap();
        let report = scan_curve(&curve, None, 40, 48).unwrap();
        assert_eq!(report.verdicts.len(), 40 * 48);
        for r in 0..40 {
            for col in 0..48 {
                let b = report.node(r, col);
                assert_eq!(
                    report.verdict(r, col),
                    classify_on_curve(&curve, b),
                    "{r},{col}"
                );
                assert_eq!(
                    report.windings[r * 48 + col],
                    winding_number(&curve, b).ok(),
                    "{r},{col}"
                );
            }
        }
        for comp in &report.components {
            assert_eq!(
                classify_on_curve(&curve, comp.representative),
                Verdict::Stable
            );
        }
        assert_eq!(count_stable_components(&report), 1);
        assert_eq!(count_enclosed_unstable(&report), 1);
        assert!(scan_curve(&curve, None, 15, 48).is_err());
    }

    #[test]
    fn component_counting() {
        let o = op(0.9, 0.6);
        let mut report = scan_region_with(o, 0.0, None, 64, 64, 1024).unwrap();
        assert_eq!(count_stable_components(&report), 1);
        assert_eq!(report.components.len(), 1);
        assert_eq!(count_enclosed_unstable(&report), 0);
        report
            .verdicts
            .iter_mut()
            .for_each(|v| *v = Verdict::Unstable);
        assert_eq!(count_stable_components(&report), 0);
    }

    #[test]
    fn marginal_cells_do_not_connect() {
        let o = op(0.9, 0.6);
        let mut report = scan_region_with(o, 0.0, None, 16, 16, 256).unwrap();
        let mut v = vec![Verdict::Stable; 256];
        for r in 0..16 {
            v[r * 16 + 8] = Verdict::Marginal;
        }
        report.verdicts = v;
        assert_eq!(count_stable_components(&report), 2);
    }
}
