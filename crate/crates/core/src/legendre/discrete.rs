//! The grid-restricted transform g*(η) = max over nodes θ of ⟨θ, η⟩ − g(θ).
//!
//! Two engines compute it. The brute-force engine scans every primal node for
//! every dual node and is the oracle. The fast engine (1D only) builds the lower
//! convex hull once and walks it with a pointer that only moves forward as η
//! increases, then settles floating-point near-ties by a short local scan so
//! that values and argmax indices match the oracle bit for bit.
//!
//! Ties go to the smallest node index, which for 2D grids (axis0 slowest) is
//! the lexicographically smallest θ. `+∞` primal values are skipped; a `−∞`
//! primal value makes every dual value `+∞`.

use crate::error::{Error, Result};
use crate::funcspace::ext::{ExtendedReal, NegInf, PosInf};
use crate::funcspace::grid::node_iter;
use crate::funcspace::GridFunction;
use crate::report::{CheckReport, Status};

/// A dual-grid conjugate together with the primal node index attaining each
/// value (`None` when every primal value is `+∞`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridConjugate {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<ExtendedReal>,
    pub argmax: Vec<Option<usize>>,
}

impl GridConjugate {
    /// The conjugate as a grid function. Fails only when every value is
    /// infinite, which happens for a primal containing `−∞`.
    pub fn to_grid(&self) -> Result<GridFunction> {
        GridFunction::new(self.axes.clone(), self.values.clone())
    }
}

/// Finite primal nodes flattened for the inner loops.
struct Finite {
    index: Vec<usize>,
    coords: Vec<Vec<f64>>,
    value: Vec<f64>,
}

enum Primal {
    /// Index of the first `−∞` node.
    Unbounded(usize),
    Empty,
    Finite(Finite),
}

fn primal_nodes(g: &GridFunction) -> Primal {
    if let Some(i) = g.values().iter().position(|v| *v == NegInf) {
        return Primal::Unbounded(i);
    }
    let mut f = Finite { index: Vec::new(), coords: Vec::new(), value: Vec::new() };
    for (i, (node, v)) in g.nodes().zip(g.values()).enumerate() {
        if let Some(x) = v.finite() {
            f.index.push(i);
            f.coords.push(node);
            f.value.push(x);
        }
    }
    if f.index.is_empty() {
        Primal::Empty
    } else {
        Primal::Finite(f)
    }
}

#[inline]
fn pairing(theta: &[f64], eta: &[f64]) -> f64 {
    match theta.len() {
        1 => theta[0] * eta[0],
        _ => theta[0] * eta[0] + theta[1] * eta[1],
    }
}

fn sup_brute(f: &Finite, eta: &[f64]) -> (ExtendedReal, Option<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for ((theta, g), idx) in f.coords.iter().zip(&f.value).zip(&f.index) {
        let v = pairing(theta, eta) - g;
        if arg.is_none() || v > best {
            best = v;
            arg = Some(*idx);
        }
    }
    (ExtendedReal::real(best), arg)
}

/// Brute-force conjugate at arbitrary dual points.
pub fn conjugate_points_brute(g: &GridFunction, points: &[Vec<f64>]) -> Result<Vec<(ExtendedReal, Option<usize>)>> {
    for p in points {
        crate::affine::check_dim(g.dim(), p.len())?;
    }
    Ok(match primal_nodes(g) {
        Primal::Unbounded(i) => vec![(PosInf, Some(i)); points.len()],
        Primal::Empty => vec![(NegInf, None); points.len()],
        Primal::Finite(f) => points.iter().map(|eta| sup_brute(&f, eta)).collect(),
    })
}

impl GridFunction {
    /// The discrete conjugate at a single dual point.
    pub fn conjugate_at(&self, eta: &[f64]) -> Result<(ExtendedReal, Option<usize>)> {
        Ok(conjugate_points_brute(self, &[eta.to_vec()])?[0])
    }
}

fn validate_dual(g: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<()> {
    GridFunction::check_axes(dual_axes)?;
    crate::affine::check_dim(g.dim(), dual_axes.len())
}

/// For each dual node η, max over primal nodes θ of ⟨θ, η⟩ − g(θ).
pub fn conjugate_grid_brute(g: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridConjugate> {
    validate_dual(g, dual_axes)?;
    let points: Vec<Vec<f64>> = node_iter(dual_axes).collect();
    let (values, argmax) = conjugate_points_brute(g, &points)?.into_iter().unzip();
    Ok(GridConjugate { axes: dual_axes.to_vec(), values, argmax })
}

/// Linear-time 1D conjugate; identical output to [`conjugate_grid_brute`].
pub fn conjugate_grid_fast(g: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridConjugate> {
    validate_dual(g, dual_axes)?;
    if g.dim() != 1 {
        return Err(Error::Unsupported("the fast discrete transform is one-dimensional".into()));
    }
    let etas = &dual_axes[0];
    let (values, argmax) = fast_sorted(g, etas).into_iter().unzip();
    Ok(GridConjugate { axes: dual_axes.to_vec(), values, argmax })
}

/// Fast 1D conjugate at arbitrary (unsorted) dual points.
pub fn conjugate_points_fast(g: &GridFunction, etas: &[f64]) -> Result<Vec<(ExtendedReal, Option<usize>)>> {
    if g.dim() != 1 {
        return Err(Error::Unsupported("the fast discrete transform is one-dimensional".into()));
    }
    if etas.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidGrid("dual points must be finite".into()));
    }
    let mut order: Vec<usize> = (0..etas.len()).collect();
    order.sort_by(|&a, &b| etas[a].total_cmp(&etas[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| etas[i]).collect();
    let solved = fast_sorted(g, &sorted);
    let mut out = vec![(NegInf, None); etas.len()];
    for (slot, res) in order.into_iter().zip(solved) {
        out[slot] = res;
    }
    Ok(out)
}

fn fast_sorted(g: &GridFunction, etas: &[f64]) -> Vec<(ExtendedReal, Option<usize>)> {
    let f = match primal_nodes(g) {
        Primal::Unbounded(i) => return vec![(PosInf, Some(i)); etas.len()],
        Primal::Empty => return vec![(NegInf, None); etas.len()],
        Primal::Finite(f) => f,
    };
    let theta: Vec<f64> = f.coords.iter().map(|c| c[0]).collect();
    let value = &f.value;

    let max_abs = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = max_abs(&theta) * max_abs(etas) + max_abs(value) + f64::MIN_POSITIVE;
    // Nodes more than `keep` above the hull can never tie the maximum in
    // floating point; `settle` bounds the local scan around the hull pointer.
    let keep = 64.0 * f64::EPSILON * scale;
    let settle = 1e-9 * scale;

    // Lower hull of the finite nodes, keeping nodes within `keep` of a chord.
    let mut hull: Vec<usize> = Vec::with_capacity(theta.len());
    for p in 0..theta.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let chord = value[a] + (value[p] - value[a]) * (theta[b] - theta[a]) / (theta[p] - theta[a]);
            if value[b] - chord > keep {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes: Vec<f64> = hull.windows(2).map(|w| (value[w[1]] - value[w[0]]) / (theta[w[1]] - theta[w[0]])).collect();

    let mut out = Vec::with_capacity(etas.len());
    let mut j = 0;
    for &eta in etas {
        while j < slopes.len() && slopes[j] < eta {
            j += 1;
        }
        let at = |h: usize| theta[hull[h]] * eta - value[hull[h]];
        let mut best = at(j);
        let mut best_idx = f.index[hull[j]];
        let consider = |h: usize, best: &mut f64, best_idx: &mut usize| -> bool {
            let v = at(h);
            if v > *best || (v == *best && f.index[hull[h]] < *best_idx) {
                *best = v;
                *best_idx = f.index[hull[h]];
            }
            v >= *best - settle
        };
        for h in (0..j).rev() {
            if !consider(h, &mut best, &mut best_idx) {
                break;
            }
        }
        for h in j + 1..hull.len() {
            if !consider(h, &mut best, &mut best_idx) {
                break;
            }
        }
        out.push((ExtendedReal::real(best), Some(best_idx)));
    }
    out
}

/// Dual axes spanning [min slope, max slope] of consecutive finite samples
/// along each primal axis, with the same node counts.
pub fn auto_dual_axes(g: &GridFunction) -> Vec<Vec<f64>> {
    let axes = g.axes();
    let n1 = axes.get(1).map_or(1, Vec::len);
    let value = |i0: usize, i1: usize| g.values()[i0 * n1 + i1].finite();
    (0..g.dim())
        .map(|axis| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let lines = if axis == 0 { n1 } else { axes[0].len() };
            let len = axes[axis].len();
            for line in 0..lines {
                for k in 0..len - 1 {
                    let (a, b) = if axis == 0 { ((k, line), (k + 1, line)) } else { ((line, k), (line, k + 1)) };
                    if let (Some(va), Some(vb)) = (value(a.0, a.1), value(b.0, b.1)) {
                        let s = (vb - va) / (axes[axis][k + 1] - axes[axis][k]);
                        lo = lo.min(s);
                        hi = hi.max(s);
                    }
                }
            }
            if !lo.is_finite() || !hi.is_finite() {
                (lo, hi) = (-1.0, 1.0);
            } else if !(lo < hi) {
                (lo, hi) = (lo - 1.0, hi + 1.0);
            }
            let step = (hi - lo) / (len - 1) as f64;
            (0..len).map(|i| if i + 1 == len { hi } else { lo + step * i as f64 }).collect()
        })
        .collect()
}

fn conjugate_auto(g: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridConjugate> {
    if g.dim() == 1 {
        conjugate_grid_fast(g, dual_axes)
    } else {
        conjugate_grid_brute(g, dual_axes)
    }
}

/// (g*)* on the primal nodes, with the dual grid chosen by [`auto_dual_axes`].
///
/// The discrete biconjugate is the closed convex envelope of the samples, so
/// nodes outside the convex hull of the finite samples are `+∞`. Rounding in
/// the two transforms can push a value a few ulps of |θ||η| above the sample;
/// since (g*)* ≤ g holds exactly, finite values are capped at g.
pub fn biconjugate_grid(g: &GridFunction) -> Result<GridFunction> {
    let dual = auto_dual_axes(g);
    let first = conjugate_auto(g, &dual)?;
    if first.values.contains(&PosInf) {
        // only possible with a −∞ sample: the envelope is −∞ on the hull
        return Err(Error::Unsupported("biconjugate of a grid containing -inf".into()));
    }
    let conj = first.to_grid()?;
    let second = conjugate_auto(&conj, g.axes())?;
    let finite: Vec<Vec<f64>> = g.nodes().zip(g.values()).filter(|(_, v)| v.is_finite()).map(|(n, _)| n).collect();
    let inside = hull_membership(&finite);
    let values = g
        .nodes()
        .zip(second.values)
        .zip(g.values())
        .map(|((node, v), &sample)| if inside(&node) { v.min(sample) } else { PosInf })
        .collect();
    GridFunction::new(g.axes().to_vec(), values)
}

/// Membership test for the convex hull of a 1D/2D point set.
fn hull_membership(points: &[Vec<f64>]) -> impl Fn(&[f64]) -> bool {
    let dim = points.first().map_or(1, Vec::len);
    let hull: Vec<[f64; 2]> = if dim == 2 { convex_hull_2d(points.iter().map(|p| [p[0], p[1]]).collect()) } else { Vec::new() };
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[0]), h.max(p[0])));
    let pts: Vec<[f64; 2]> = if dim == 2 { points.iter().map(|p| [p[0], p[1]]).collect() } else { Vec::new() };
    move |x: &[f64]| {
        if dim == 1 {
            return lo <= x[0] && x[0] <= hi;
        }
        let q = [x[0], x[1]];
        match hull.len() {
            0 => false,
            1 | 2 => {
                // degenerate hull: a point or a segment
                pts.contains(&q) || on_segment(hull[0], *hull.last().unwrap(), q)
            }
            n => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], q) >= -1e-12),
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> bool {
    cross(a, b, q).abs() <= 1e-12
        && q[0] >= a[0].min(b[0])
        && q[0] <= a[0].max(b[0])
        && q[1] >= a[1].min(b[1])
        && q[1] <= a[1].max(b[1])
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn convex_hull_2d(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// If f2 ≤ f1 at every node, checks conj(f2) ≥ conj(f1) − 1e-12 at every dual
/// node. A violated premise makes the report inconclusive.
pub fn check_reverse_order(f1: &GridFunction, f2: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<CheckReport> {
    const TOL: f64 = 1e-12;
    if f1.axes() != f2.axes() {
        return Err(Error::InvalidGrid("reverse-order check needs identical primal axes".into()));
    }
    let mut report = CheckReport::new("reverse-order");
    if f1.values().iter().zip(f2.values()).any(|(a, b)| b > a) {
        report.status = Status::Inconclusive;
        return Ok(report.with_note("premise f2 <= f1 does not hold at every node"));
    }
    let c1 = conjugate_auto(f1, dual_axes)?;
    let c2 = conjugate_auto(f2, dual_axes)?;
    for (i, (a, b)) in c1.values.iter().zip(&c2.values).enumerate() {
        let violation = match (a, b) {
            (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => x - y,
            _ if b >= a => 0.0,
            _ => f64::INFINITY,
        };
        report.record(violation, TOL, || node_iter(dual_axes).nth(i).unwrap_or_default());
    }
    Ok(report)
}
