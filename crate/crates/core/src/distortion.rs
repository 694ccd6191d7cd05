//! Distortion of polygonal curves.
//!
//! [`distortion_certified`] encloses `sup d(p,q)/|p-q|` by branch and bound
//! over pairs of arclength intervals. The pair domain is cut into blocks of
//! segment pairs:
//!
//! - a segment paired with itself has ratio exactly 1;
//! - two segments meeting at a vertex with turning angle `κ` have supremum
//!   exactly `sec(κ/2)`, attained by any pair equidistant from the vertex;
//! - every other block is a box `I × J` whose sub-polylines are disjoint, so
//!   the ratio is bounded by (largest arc distance) / (smallest chord).
//!
//! Boxes are refined best-first until the largest remaining bound is within
//! `tol` of the best pair evaluated so far.

use crate::geometry::segment::{point_segment, segment_segment};
use crate::{ArcInterval, CurvePoint, Error, PolyCurve, Result, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Relative inflation applied to every upper bound to absorb rounding in the
/// distance computations.
const UB_SLACK: f64 = 1e-12;

/// Boxes whose sub-polylines have at most this many segment pairs get the
/// exact minimum distance; larger ones use bounding boxes.
const EXACT_PAIRS: usize = 256;

/// Curves with at most this many vertex + midpoint samples get an exhaustive
/// initial lower bound.
const SEED_SAMPLES: usize = 4096;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionResult {
    pub lower: f64,
    pub upper: f64,
    /// Pair whose distortion equals `lower`.
    pub witness: (CurvePoint, CurvePoint),
    pub iterations: usize,
    pub boxes_explored: usize,
    /// False when the box budget ran out before `upper - lower <= tol`.
    pub converged: bool,
}

impl DistortionResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBox {
    pub i: ArcInterval,
    pub j: ArcInterval,
    pub ub: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    /// Absolute enclosure width at which refinement stops.
    pub tol: f64,
    pub max_boxes: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_boxes: 10_000_000,
        }
    }
}

impl CertifyOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// `d(p,q) / |p - q|`.
pub fn pair_distortion(curve: &PolyCurve, p: &CurvePoint, q: &CurvePoint) -> Result<f64> {
    let d = curve.arc_distance(p, q)?;
    let c = curve.chord(p, q);
    if c == 0.0 {
        return Err(Error::NotSimple(format!(
            "distinct points at arclength {} and {} coincide in space",
            p.arclen, q.arclen
        )));
    }
    if p.seg == q.seg {
        return Ok(1.0);
    }
    Ok(d / c)
}

/// Corner supremum `sec(κ/2)` at every vertex with a turning angle.
pub fn corner_limits(curve: &PolyCurve) -> Vec<(usize, f64)> {
    curve
        .interior_vertices()
        .filter_map(|v| curve.turning_angle(v).map(|k| (v, 1.0 / (k / 2.0).cos())))
        .collect()
}

/// The pair straddling vertex `v` at equal arclength from it; its distortion
/// is the corner value `sec(κ/2)`.
fn corner_witness(curve: &PolyCurve, v: usize) -> (CurvePoint, CurvePoint) {
    let nseg = curve.segment_count();
    let prev = (v + nseg - 1) % nseg;
    let x = 0.5 * curve.segment_length(prev).min(curve.segment_length(v));
    let sv = curve.segment_start(v);
    let p = curve.point_on_segment(prev, 1.0 - x / curve.segment_length(prev));
    let q = curve.point_on_segment(v, x / curve.segment_length(v));
    debug_assert!((q.arclen - sv - x).abs() <= 1e-9 * curve.total_length());
    (p, q)
}

// ---------------------------------------------------------------------------
// Sampled estimates

/// Sample locations in struct-of-arrays form for the pair kernel.
pub(crate) struct Samples {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub seg: Vec<usize>,
}

impl Samples {
    pub fn from_points(curve: &PolyCurve, pts: &[CurvePoint]) -> Self {
        let mut out = Samples {
            s: Vec::with_capacity(pts.len()),
            x: Vec::with_capacity(pts.len()),
            y: Vec::with_capacity(pts.len()),
            z: Vec::with_capacity(pts.len()),
            seg: Vec::with_capacity(pts.len()),
        };
        for p in pts {
            let v = curve.position(p);
            out.s.push(p.arclen);
            out.x.push(v.x);
            out.y.push(v.y);
            out.z.push(v.z);
            out.seg.push(p.seg);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }
}

/// Largest squared ratio in row `i` against samples `i+1..`, as
/// `(d², c²)` of the best pair together with its column.
#[inline]
fn row_max(samples: &Samples, i: usize, closed: bool, length: f64) -> (f64, usize) {
    let (si, xi, yi, zi) = (samples.s[i], samples.x[i], samples.y[i], samples.z[i]);
    let gi = samples.seg[i];
    let g = &samples.seg[i + 1..];
    let s = &samples.s[i + 1..];
    let x = &samples.x[i + 1..];
    let y = &samples.y[i + 1..];
    let z = &samples.z[i + 1..];
    let mut best = 0.0f64;
    let mut best_k = usize::MAX;
    // Plain loop so it vectorizes; the argmax is recovered afterwards.
    for k in 0..s.len() {
        let dx = x[k] - xi;
        let dy = y[k] - yi;
        let dz = z[k] - zi;
        let c2 = dx * dx + dy * dy + dz * dz;
        let l = (s[k] - si).abs();
        let d = if closed { l.min(length - l) } else { l };
        // Same-segment pairs are exactly 1; computing them loses digits.
        let r = if g[k] == gi { 1.0 } else { d * d / c2 };
        best = if r > best { r } else { best };
    }
    if best > 0.0 {
        for k in 0..s.len() {
            let dx = x[k] - xi;
            let dy = y[k] - yi;
            let dz = z[k] - zi;
            let c2 = dx * dx + dy * dy + dz * dz;
            let l = (s[k] - si).abs();
            let d = if closed { l.min(length - l) } else { l };
            let r = if g[k] == gi { 1.0 } else { d * d / c2 };
            if r == best {
                best_k = i + 1 + k;
                break;
            }
        }
    }
    (best, best_k)
}

/// Max over all sample pairs: `(ratio, i, j)`. Coincident samples in space
/// give an infinite ratio.
pub(crate) fn max_pair_ratio(samples: &Samples, closed: bool, length: f64) -> (f64, usize, usize) {
    let n = samples.len();
    let rows = |i: usize| {
        let (r, k) = row_max(samples, i, closed, length);
        (r, i, k)
    };
    let pick = |a: (f64, usize, usize), b: (f64, usize, usize)| if b.0 > a.0 { b } else { a };
    let init = (0.0, 0, usize::MAX);
    let best = if n > 2048 {
        (0..n.saturating_sub(1))
            .into_par_iter()
            .map(rows)
            .reduce(|| init, pick)
    } else {
        (0..n.saturating_sub(1)).map(rows).fold(init, pick)
    };
    (best.0.sqrt(), best.1, best.2)
}

/// Sampled distortion estimate with its witness pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledDistortion {
    pub value: f64,
    pub witness: (CurvePoint, CurvePoint),
}

fn best_of_samples_and_corners(
    curve: &PolyCurve,
    pts: &[CurvePoint],
) -> Result<SampledDistortion> {
    let length = curve.total_length();
    let samples = Samples::from_points(curve, pts);
    let (mut value, i, j) = max_pair_ratio(&samples, curve.is_closed(), length);
    if !value.is_finite() {
        return Err(Error::NotSimple(
            "two sample points coincide in space".into(),
        ));
    }
    let mut witness = if j == usize::MAX {
        (pts[0], pts[pts.len() - 1])
    } else {
        (pts[i], pts[j])
    };
    if value < 1.0 {
        value = 1.0;
    }
    for (v, sec) in corner_limits(curve) {
        if sec > value {
            value = sec;
            witness = corner_witness(curve, v);
        }
    }
    Ok(SampledDistortion { value, witness })
}

/// Max of the pair distortion over `n_samples` equally spaced points, and
/// over all corner limits `sec(κ/2)`.
pub fn distortion_sampled(curve: &PolyCurve, n_samples: usize) -> Result<SampledDistortion> {
    let n = n_samples.max(2);
    let length = curve.total_length();
    let pts: Vec<CurvePoint> = if curve.is_closed() {
        (0..n)
            .map(|k| curve.point_at(length * k as f64 / n as f64))
            .collect::<Result<_>>()?
    } else {
        (0..n)
            .map(|k| curve.point_at((length * k as f64 / (n - 1) as f64).min(length)))
            .collect::<Result<_>>()?
    };
    best_of_samples_and_corners(curve, &pts)
}

/// Vertices and segment midpoints.
pub fn vertex_midpoint_samples(curve: &PolyCurve) -> Vec<CurvePoint> {
    let nseg = curve.segment_count();
    let mut pts = Vec::with_capacity(2 * nseg + 1);
    for k in 0..nseg {
        pts.push(curve.point_on_segment(k, 0.0));
        pts.push(curve.point_on_segment(k, 0.5));
    }
    if !curve.is_closed() {
        pts.push(curve.point_on_segment(nseg - 1, 1.0));
    }
    pts
}

/// Sampled distortion at all vertices and segment midpoints plus corner
/// limits.
pub fn distortion_vertex_midpoint(curve: &PolyCurve) -> Result<SampledDistortion> {
    best_of_samples_and_corners(curve, &vertex_midpoint_samples(curve))
}

/// `δ(p0, q)` for `n` equally spaced `q`, skipping `q = p0`. Rows are
/// `(q arclength, distortion)`.
pub fn distortion_profile(curve: &PolyCurve, p0: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let p = curve.point_at(p0)?;
    let length = curve.total_length();
    let n = n.max(2);
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let s = if curve.is_closed() {
            length * k as f64 / n as f64
        } else {
            (length * k as f64 / (n - 1) as f64).min(length)
        };
        let q = curve.point_at(s)?;
        if q.arclen == p.arclen {
            continue;
        }
        rows.push((q.arclen, pair_distortion(curve, &p, &q)?));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Box bounds

/// Largest arc distance over `s ∈ [a1, a2]`, `t ∈ [b1, b2]` with
/// `a2 <= b1`. On a closed curve `min(ℓ, L-ℓ)` peaks at `ℓ = L/2`, so the
/// answer depends on where `L/2` sits relative to the gap range
/// `[b1 - a2, b2 - a1]`.
fn max_arc_ordered(curve: &PolyCurve, a1: f64, a2: f64, b1: f64, b2: f64) -> f64 {
    let gap_min = (b1 - a2).max(0.0);
    let gap_max = b2 - a1;
    if !curve.is_closed() {
        return gap_max;
    }
    let half = 0.5 * curve.total_length();
    if gap_max <= half {
        gap_max
    } else if gap_min >= half {
        curve.total_length() - gap_min
    } else {
        half
    }
}

/// Partial segments covering `[lo, hi]`.
fn pieces(curve: &PolyCurve, lo: f64, hi: f64) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    let (first, last) = seg_range(curve, lo, hi);
    (first..=last).map(move |k| {
        let (a, b) = curve.segment(k);
        let start = curve.segment_start(k);
        let len = curve.segment_length(k);
        let t0 = ((lo - start) / len).clamp(0.0, 1.0);
        let t1 = ((hi - start) / len).clamp(0.0, 1.0);
        let d = b - a;
        (a + d * t0, a + d * t1)
    })
}

/// Segment indices overlapped by `[lo, hi]`.
fn seg_range(curve: &PolyCurve, lo: f64, hi: f64) -> (usize, usize) {
    let cum = curve.cumulative();
    let nseg = curve.segment_count();
    let first = cum.partition_point(|&c| c <= lo).saturating_sub(1).min(nseg - 1);
    let last = cum
        .partition_point(|&c| c < hi)
        .saturating_sub(1)
        .clamp(first, nseg - 1);
    (first, last)
}

fn exact_min_distance(curve: &PolyCurve, i: (f64, f64), j: (f64, f64)) -> f64 {
    let pj: Vec<(Vec3, Vec3)> = pieces(curve, j.0, j.1).collect();
    let mut best = f64::INFINITY;
    for (a, b) in pieces(curve, i.0, i.1) {
        for (c, d) in &pj {
            let dist = segment_segment(&a, &b, c, d).0;
            if dist < best {
                best = dist;
                if best == 0.0 {
                    return 0.0;
                }
            }
        }
    }
    best
}

fn aabb(curve: &PolyCurve, lo: f64, hi: f64) -> (Vec3, Vec3) {
    let mut min = Vec3::repeat(f64::INFINITY);
    let mut max = Vec3::repeat(f64::NEG_INFINITY);
    for (a, b) in pieces(curve, lo, hi) {
        min = min.inf(&a).inf(&b);
        max = max.sup(&a).sup(&b);
    }
    (min, max)
}

fn aabb_distance(a: &(Vec3, Vec3), b: &(Vec3, Vec3)) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let gap = (b.0[k] - a.1[k]).max(a.0[k] - b.1[k]).max(0.0);
        d2 += gap * gap;
    }
    d2.sqrt()
}

/// Lower bound on the chord over the box; exact for small boxes.
fn min_chord_bound(curve: &PolyCurve, i: (f64, f64), j: (f64, f64)) -> f64 {
    let (fi, li) = seg_range(curve, i.0, i.1);
    let (fj, lj) = seg_range(curve, j.0, j.1);
    if (li - fi + 1) * (lj - fj + 1) <= EXACT_PAIRS {
        exact_min_distance(curve, i, j)
    } else {
        aabb_distance(&aabb(curve, i.0, i.1), &aabb(curve, j.0, j.1))
    }
}

fn ratio_bound(arc: f64, chord: f64) -> f64 {
    if chord <= 0.0 {
        f64::INFINITY
    } else {
        arc / chord * (1.0 + UB_SLACK)
    }
}

/// Upper bound of the distortion over `I × J`: the largest possible arc
/// distance divided by the exact minimum distance between the two
/// sub-polylines. Infinite when they touch. Wrapping intervals are split at
/// zero.
pub fn box_upper_bound(curve: &PolyCurve, i: &ArcInterval, j: &ArcInterval) -> f64 {
    let length = curve.total_length();
    let unwrap = |iv: &ArcInterval| -> Vec<(f64, f64)> {
        if iv.hi >= iv.lo {
            vec![(iv.lo, iv.hi)]
        } else {
            vec![(iv.lo, length), (0.0, iv.hi)]
        }
    };
    let mut best: f64 = 0.0;
    for a in unwrap(i) {
        for b in unwrap(j) {
            let chord = exact_min_distance(curve, a, b);
            if chord <= 0.0 {
                return f64::INFINITY;
            }
            let (first, second) = if a.0 <= b.0 { (a, b) } else { (b, a) };
            let arc = max_arc_ordered(curve, first.0, first.1, second.0, second.1);
            best = best.max(ratio_bound(arc, chord));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Branch and bound

#[derive(Clone, Copy, Debug)]
struct QBox {
    ub: f64,
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    /// Maximizing pair when `ub` is the exact maximum over the box.
    exact: Option<(CurvePoint, CurvePoint)>,
}

impl PartialEq for QBox {
    fn eq(&self, other: &Self) -> bool {
        self.ub.total_cmp(&other.ub) == Ordering::Equal
    }
}
impl Eq for QBox {}
impl PartialOrd for QBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

impl QBox {
    fn to_pair_box(self) -> PairBox {
        PairBox {
            i: ArcInterval::new(self.a1, self.a2),
            j: ArcInterval::new(self.b1, self.b2),
            ub: self.ub,
        }
    }
}

fn qbox(curve: &PolyCurve, a1: f64, a2: f64, b1: f64, b2: f64) -> QBox {
    let (fi, li) = seg_range(curve, a1, a2);
    let (fj, lj) = seg_range(curve, b1, b2);
    if fi == li && fj == lj {
        let (v, p, q) = segment_pair_max(curve, fi, fj, (a1, a2), (b1, b2));
        return QBox {
            ub: v * (1.0 + UB_SLACK),
            a1,
            a2,
            b1,
            b2,
            exact: Some((p, q)),
        };
    }
    let arc = max_arc_ordered(curve, a1, a2, b1, b2);
    QBox {
        ub: ratio_bound(arc, min_chord_bound(curve, (a1, a2), (b1, b2))),
        a1,
        a2,
        b1,
        b2,
        exact: None,
    }
}

/// Convex polygon with at most six vertices.
#[derive(Clone, Copy)]
struct Poly {
    pts: [[f64; 2]; 6],
    len: usize,
}

impl Poly {
    fn points(&self) -> &[[f64; 2]] {
        &self.pts[..self.len]
    }
}

/// Keeps the part of a convex polygon where `a·x <= c`.
fn clip(poly: &Poly, a: [f64; 2], c: f64) -> Poly {
    let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - c;
    let mut out = Poly {
        pts: [[0.0; 2]; 6],
        len: 0,
    };
    let pts = poly.points();
    for k in 0..pts.len() {
        let p = pts[k];
        let q = pts[(k + 1) % pts.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.pts[out.len] = p;
            out.len += 1;
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let r = sp / (sp - sq);
            out.pts[out.len] = [p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])];
            out.len += 1;
        }
    }
    out
}

/// Exact maximum of the pair distortion over `s ∈ [s0, s1]` on segment `i`
/// and `t ∈ [t0, t1]` on segment `j`, where every `s` precedes every `t` in
/// arclength. Returns the value and a maximizing pair of arclengths.
///
/// On such a rectangle the arc distance is affine (or the minimum of two
/// affine pieces split by the line `t - s = L/2`) and the chord is the norm
/// of an affine map, so each piece of the ratio has at most one interior
/// critical point and one critical point per edge, all in closed form. The
/// maximum is the best of those candidates and the polygon corners.
pub fn segment_pair_max(
    curve: &PolyCurve,
    i: usize,
    j: usize,
    (s0, s1): (f64, f64),
    (t0, t1): (f64, f64),
) -> (f64, CurvePoint, CurvePoint) {
    let (si, sj) = (curve.segment_start(i), curve.segment_start(j));
    let (li, lj) = (curve.segment_length(i), curve.segment_length(j));
    let x = [(s0 - si).clamp(0.0, li), (s1 - si).clamp(0.0, li)];
    let y = [(t0 - sj).clamp(0.0, lj), (t1 - sj).clamp(0.0, lj)];
    let (v, p) = pair_max_local(curve, i, j, x, y);
    (v, on_segment(curve, i, p[0] / li), on_segment(curve, j, p[1] / lj))
}

/// Exact maximum of the pair distortion over the whole of segments `i` and
/// `j`, `i` preceding `j`.
pub(crate) fn full_segment_pair_max(curve: &PolyCurve, i: usize, j: usize) -> f64 {
    let (li, lj) = (curve.segment_length(i), curve.segment_length(j));
    pair_max_local(curve, i, j, [0.0, li], [0.0, lj]).0
}

/// [`segment_pair_max`] in local coordinates: `x` and `y` are offsets from
/// the segment starts.
fn pair_max_local(
    curve: &PolyCurve,
    i: usize,
    j: usize,
    [x0, x1]: [f64; 2],
    [y0, y1]: [f64; 2],
) -> (f64, [f64; 2]) {
    let (si, sj) = (curve.segment_start(i), curve.segment_start(j));
    let (li, lj) = (curve.segment_length(i), curve.segment_length(j));
    let (pi, qi) = curve.segment(i);
    let (pj, qj) = curve.segment(j);
    let u = (qi - pi) / li;
    let v = (qj - pj) / lj;
    let w = pi - pj;
    let length = curve.total_length();
    let c0 = sj - si;

    let chord_vec = |p: &[f64; 2]| w + u * p[0] - v * p[1];
    let f = |p: &[f64; 2]| {
        let l = c0 + p[1] - p[0];
        let d = if curve.is_closed() { l.min(length - l) } else { l };
        d / chord_vec(p).norm()
    };

    let mut best = (f64::NEG_INFINITY, [x0, y0]);
    let mut offer = |p: [f64; 2]| {
        let val = f(&p);
        if val > best.0 {
            best = (val, p);
        }
    };

    let rect = Poly {
        pts: [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [0.0; 2], [0.0; 2]],
        len: 4,
    };
    // Arc numerator `g·x + d0` for each piece, with the region it governs.
    let mut pieces = [([-1.0, 1.0], c0, rect), ([1.0, -1.0], length - c0, rect)];
    let npieces = if curve.is_closed() {
        let cut = 0.5 * length - c0;
        pieces[0].2 = clip(&rect, [-1.0, 1.0], cut);
        pieces[1].2 = clip(&rect, [1.0, -1.0], -cut);
        2
    } else {
        1
    };

    // Gram matrix of the chord map `x -> w + x0 u - x1 v`.
    let uv = u.dot(&v);
    let det = 1.0 - uv * uv;
    let b = [u.dot(&w), -v.dot(&w)];
    for (g, d0, poly) in &pieces[..npieces] {
        let poly = poly.points();
        if poly.is_empty() {
            continue;
        }
        let h = |p: &[f64; 2]| g[0] * p[0] + g[1] * p[1] + d0;
        for k in 0..poly.len() {
            let p = poly[k];
            let q = poly[(k + 1) % poly.len()];
            offer(p);
            let alpha = h(&p);
            let beta = h(&q) - alpha;
            let ya = chord_vec(&p);
            let dy = chord_vec(&q) - ya;
            let (qa, qb, qc) = (dy.norm_squared(), 2.0 * ya.dot(&dy), ya.norm_squared());
            let den = beta * qb / 2.0 - alpha * qa;
            if den != 0.0 {
                let r = (alpha * qb / 2.0 - beta * qc) / den;
                if r > 0.0 && r < 1.0 {
                    offer([p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])]);
                }
            }
        }
        if det > 1e-12 {
            // Foot of the origin: x_p = -G⁻¹b, then x* = x_p + κ G⁻¹g with
            // κ = |y_p|² / h(x_p).
            let ginv = |r: [f64; 2]| [(r[0] + uv * r[1]) / det, (uv * r[0] + r[1]) / det];
            let gb = ginv(b);
            let xp = [-gb[0], -gb[1]];
            let hp = h(&xp);
            if hp > 0.0 {
                let kappa = chord_vec(&xp).norm_squared() / hp;
                let gg = ginv(*g);
                let xs = [xp[0] + kappa * gg[0], xp[1] + kappa * gg[1]];
                let inside = (0..poly.len()).all(|k| {
                    let p = poly[k];
                    let q = poly[(k + 1) % poly.len()];
                    (q[0] - p[0]) * (xs[1] - p[1]) - (q[1] - p[1]) * (xs[0] - p[0]) >= 0.0
                });
                if inside {
                    offer(xs);
                }
            }
        }
    }
    best
}

/// `point_on_segment`, moving `t = 1` to the start of the next segment.
fn on_segment(curve: &PolyCurve, seg: usize, t: f64) -> CurvePoint {
    let nseg = curve.segment_count();
    if t >= 1.0 && (curve.is_closed() || seg + 1 < nseg) {
        curve.point_on_segment((seg + 1) % nseg, 0.0)
    } else {
        curve.point_on_segment(seg, t)
    }
}

/// Split point of `[lo, hi]`: the vertex nearest the middle when the
/// interval spans several segments, otherwise the midpoint.
fn split_point(curve: &PolyCurve, lo: f64, hi: f64) -> f64 {
    let (first, last) = seg_range(curve, lo, hi);
    let mid = 0.5 * (lo + hi);
    if last > first {
        let cum = curve.cumulative();
        let k = cum[first + 1..=last].partition_point(|&c| c < mid) + first + 1;
        let cand = [k.saturating_sub(1).max(first + 1), k.min(last)];
        let best = cand
            .iter()
            .copied()
            .min_by(|&x, &y| (cum[x] - mid).abs().total_cmp(&(cum[y] - mid).abs()))
            .unwrap();
        cum[best]
    } else {
        mid
    }
}

/// Splits the wider interval of a box; children never exceed the parent
/// bound.
pub fn split_box(curve: &PolyCurve, b: &PairBox) -> [PairBox; 2] {
    let q = QBox {
        ub: b.ub,
        a1: b.i.lo,
        a2: b.i.hi,
        b1: b.j.lo,
        b2: b.j.hi,
        exact: None,
    };
    let [x, y] = split_qbox(curve, &q);
    [x.to_pair_box(), y.to_pair_box()]
}

fn split_qbox(curve: &PolyCurve, b: &QBox) -> [QBox; 2] {
    let (c1, c2) = if b.a2 - b.a1 >= b.b2 - b.b1 {
        let m = split_point(curve, b.a1, b.a2);
        (
            QBox { a2: m, ..*b },
            QBox { a1: m, ..*b },
        )
    } else {
        let m = split_point(curve, b.b1, b.b2);
        (
            QBox { b2: m, ..*b },
            QBox { b1: m, ..*b },
        )
    };
    let bound = |c: QBox| {
        let mut q = qbox(curve, c.a1, c.a2, c.b1, c.b2);
        q.ub = q.ub.min(b.ub);
        q
    };
    [bound(c1), bound(c2)]
}

/// Blocks of non-adjacent segment pairs `i < j`, grouped by a quadtree over
/// segment indices so that far-apart ranges stay coarse.
fn initial_blocks(curve: &PolyCurve) -> Vec<(usize, usize, usize, usize)> {
    let nseg = curve.segment_count();
    let closed = curve.is_closed();
    let separated = |i0: usize, i1: usize, j0: usize, j1: usize| {
        j0 >= i1 + 2 && !(closed && i0 == 0 && j1 == nseg - 1)
    };
    let mut out = Vec::new();
    let mut stack = vec![(0, nseg - 1, 0, nseg - 1)];
    while let Some((i0, i1, j0, j1)) = stack.pop() {
        if j1 < i0 {
            continue;
        }
        if separated(i0, i1, j0, j1) {
            out.push((i0, i1, j0, j1));
            continue;
        }
        if i0 == i1 && j0 == j1 {
            continue;
        }
        if i1 - i0 >= j1 - j0 {
            let m = (i0 + i1) / 2;
            stack.push((i0, m, j0, j1));
            stack.push((m + 1, i1, j0, j1));
        } else {
            let m = (j0 + j1) / 2;
            stack.push((i0, i1, j0, m));
            stack.push((i0, i1, m + 1, j1));
        }
    }
    out
}

struct Best {
    value: f64,
    witness: (CurvePoint, CurvePoint),
}

impl Best {
    fn offer(&mut self, curve: &PolyCurve, p: CurvePoint, q: CurvePoint) {
        if let Ok(v) = pair_distortion(curve, &p, &q) {
            if v > self.value {
                self.value = v;
                self.witness = (p, q);
            }
        }
    }
}

fn require_simple(curve: &PolyCurve) -> Result<()> {
    if let Some((i, j)) = curve.first_intersection(crate::geometry::DEFAULT_CLEARANCE * curve.total_length()) {
        return Err(Error::NotSimple(format!("segments {i} and {j} intersect")));
    }
    Ok(())
}

/// Certified enclosure of the distortion with the default box budget.
pub fn distortion_certified(curve: &PolyCurve, tol: f64) -> Result<DistortionResult> {
    distortion_certified_with(curve, &CertifyOptions::with_tol(tol))
}

pub fn distortion_certified_with(
    curve: &PolyCurve,
    opts: &CertifyOptions,
) -> Result<DistortionResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {} must be positive", opts.tol)));
    }
    require_simple(curve)?;
    let length = curve.total_length();

    // Same-segment pairs give exactly 1.
    let first = curve.point_on_segment(0, 0.0);
    let second = curve.point_on_segment(0, 0.5);
    let mut best = Best {
        value: 1.0,
        witness: (first, second),
    };

    let mut analytic_upper: f64 = 1.0;
    for (v, sec) in corner_limits(curve) {
        analytic_upper = analytic_upper.max(sec * (1.0 + UB_SLACK));
        let (p, q) = corner_witness(curve, v);
        best.offer(curve, p, q);
    }

    let seeds = vertex_midpoint_samples(curve);
    let seeds: Vec<CurvePoint> = if seeds.len() > SEED_SAMPLES {
        let step = seeds.len().div_ceil(SEED_SAMPLES);
        seeds.into_iter().step_by(step).collect()
    } else {
        seeds
    };
    let samples = Samples::from_points(curve, &seeds);
    let (_, si, sj) = max_pair_ratio(&samples, curve.is_closed(), length);
    if sj != usize::MAX {
        best.offer(curve, seeds[si], seeds[sj]);
    }

    let mut heap = BinaryHeap::new();
    let mut explored = 0usize;
    for (i0, i1, j0, j1) in initial_blocks(curve) {
        let (a1, a2) = (curve.segment_start(i0), curve.segment_start(i1 + 1));
        let (b1, b2) = (curve.segment_start(j0), curve.segment_start(j1 + 1));
        let b = qbox(curve, a1, a2, b1, b2);
        explored += 1;
        if let Some((p, q)) = b.exact {
            best.offer(curve, p, q);
        }
        if b.ub > best.value {
            heap.push(b);
        }
    }
    // Exact boxes are settled when popped; their bounds still count.
    let mut settled: f64 = 0.0;

    let mut iterations = 0usize;
    let mut converged = true;
    loop {
        let top_ub = heap.peek().map_or(0.0, |b| b.ub);
        let upper = top_ub.max(analytic_upper).max(settled).max(best.value);
        if upper - best.value <= opts.tol || top_ub <= best.value {
            break;
        }
        if heap.len() >= opts.max_boxes {
            converged = false;
            break;
        }
        let b = heap.pop().expect("non-empty");
        iterations += 1;
        if b.exact.is_some() {
            settled = settled.max(b.ub);
            continue;
        }

        let p = curve.point_at(0.5 * (b.a1 + b.a2))?;
        let q = curve.point_at(0.5 * (b.b1 + b.b2))?;
        best.offer(curve, p, q);

        for child in split_qbox(curve, &b) {
            explored += 1;
            if let Some((p, q)) = child.exact {
                best.offer(curve, p, q);
            }
            if child.ub > best.value {
                heap.push(child);
            }
        }
    }

    let top_ub = heap.peek().map_or(0.0, |b| b.ub);
    let upper = top_ub.max(analytic_upper).max(settled).max(best.value);
    Ok(DistortionResult {
        lower: best.value,
        upper,
        witness: best.witness,
        iterations,
        boxes_explored: explored,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Antipodal distortion

/// `γ(s) - γ(s + L/2)` is affine on `[lo, hi]` when neither point crosses a
/// vertex; returns the exact minimum of its norm and the minimizing `s`.
fn antipodal_min_on_piece(curve: &PolyCurve, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let half = 0.5 * curve.total_length();
    // Evaluate the affine map from inside the piece so segment choice is
    // unambiguous at the ends.
    let seg_p = curve.segment_at(0.5 * (lo + hi));
    let seg_q = curve.segment_at((0.5 * (lo + hi) + half) % curve.total_length());
    let at = |s: f64| -> Vec3 {
        let eval = |seg: usize, s: f64| {
            let (a, b) = curve.segment(seg);
            let t = (s - curve.segment_start(seg)) / curve.segment_length(seg);
            a + (b - a) * t
        };
        let mut sq = s + half;
        if sq >= curve.total_length() && seg_q < seg_p {
            sq -= curve.total_length();
        }
        eval(seg_p, s) - eval(seg_q, sq)
    };
    let d0 = at(lo);
    let d1 = at(hi);
    let (dist, t) = point_segment(&Vec3::zeros(), &d0, &d1);
    Ok((dist, lo + t * (hi - lo)))
}

/// Certified supremum of `δ(p, q)` over antipodal pairs `d(p,q) = L/2`.
pub fn antipodal_distortion(curve: &PolyCurve, tol: f64) -> Result<DistortionResult> {
    if !curve.is_closed() {
        return Err(Error::InvalidCurve(
            "antipodal distortion needs a closed curve".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    require_simple(curve)?;
    let length = curve.total_length();
    let half = 0.5 * length;

    // Breakpoints where either point of the pair crosses a vertex.
    let mut breaks: Vec<f64> = curve
        .cumulative()
        .iter()
        .flat_map(|&c| [c, c - half])
        .filter(|&c| (0.0..=half).contains(&c))
        .collect();
    breaks.push(0.0);
    breaks.push(half);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * length);

    // Intervals are index ranges into `breaks`.
    #[derive(Clone, Copy)]
    struct Iv {
        ub: f64,
        lo: usize,
        hi: usize,
    }
    impl PartialEq for Iv {
        fn eq(&self, o: &Self) -> bool {
            self.ub.total_cmp(&o.ub) == Ordering::Equal
        }
    }
    impl Eq for Iv {}
    impl PartialOrd for Iv {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Iv {
        fn cmp(&self, o: &Self) -> Ordering {
            self.ub.total_cmp(&o.ub)
        }
    }

    let p0 = curve.point_at(0.0)?;
    let q0 = curve.point_at(half)?;
    let mut best = Best {
        value: pair_distortion(curve, &p0, &q0)?,
        witness: (p0, q0),
    };

    let mut explored = 0usize;
    let mut bound = |lo: usize, hi: usize, best: &mut Best| -> Result<f64> {
        explored += 1;
        let (s0, s1) = (breaks[lo], breaks[hi]);
        if hi == lo + 1 {
            let (dist, s) = antipodal_min_on_piece(curve, s0, s1)?;
            let p = curve.point_at(s)?;
            let q = curve.point_at(s + half)?;
            best.offer(curve, p, q);
            Ok(ratio_bound(half, dist))
        } else {
            let chord = min_chord_bound(curve, (s0, s1), (s0 + half, s1 + half));
            Ok(ratio_bound(half, chord))
        }
    };

    let mut heap = BinaryHeap::new();
    let last = breaks.len() - 1;
    let ub = bound(0, last, &mut best)?;
    heap.push(Iv { ub, lo: 0, hi: last });
    let mut iterations = 0;
    while let Some(top) = heap.peek().copied() {
        if top.ub - best.value <= tol || top.ub <= best.value {
            break;
        }
        heap.pop();
        iterations += 1;
        let mid = (top.lo + top.hi) / 2;
        for (lo, hi) in [(top.lo, mid), (mid, top.hi)] {
            let ub = bound(lo, hi, &mut best)?.min(top.ub);
            if ub > best.value {
                heap.push(Iv { ub, lo, hi });
            }
        }
    }
    let upper = heap.peek().map_or(best.value, |t| t.ub.max(best.value));
    Ok(DistortionResult {
        lower: best.value,
        upper,
        witness: best.witness,
        iterations,
        boxes_explored: explored,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn square() -> PolyCurve {
        PolyCurve::new(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)],
            true,
        )
        .unwrap()
    }

    fn ngon(n: usize, r: f64) -> PolyCurve {
        PolyCurve::new(
            (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    v(r * a.cos(), r * a.sin(), 0.0)
                })
                .collect(),
            true,
        )
        .unwrap()
    }

    /// Brute-force oracle: dense equally spaced pairs, no corner terms.
    fn dense_pairs(curve: &PolyCurve, n: usize) -> f64 {
        let l = curve.total_length();
        let pts: Vec<Vec3> = (0..n)
            .map(|k| curve.position_at(l * k as f64 / n as f64).unwrap())
            .collect();
        let mut best: f64 = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                let s = l * i as f64 / n as f64;
                let t = l * j as f64 / n as f64;
                let d = curve.arc_distance_coords(s, t);
                best = best.max(d / (pts[i] - pts[j]).norm());
            }
        }
        best
    }

    #[test]
    fn straight_segment_is_one() {
        let seg = PolyCurve::new(vec![v(0., 0., 0.), v(3., 0., 0.)], false).unwrap();
        let r = distortion_certified(&seg, 1e-9).unwrap();
        assert_eq!(r.lower, 1.0);
        assert!(r.upper <= 1.0 + 1e-9);
        let p = seg.point_at(0.3).unwrap();
        let q = seg.point_at(2.9).unwrap();
        assert_relative_eq!(pair_distortion(&seg, &p, &q).unwrap(), 1.0, max_relative = 1e-15);
        assert!((distortion_sampled(&seg, 50).unwrap().value - 1.0).abs() < 1e-12);
        // Collinear polyline with a vertex in the middle.
        let line = PolyCurve::new(vec![v(0., 0., 0.), v(1., 0., 0.), v(3., 0., 0.), v(4., 0., 0.)], false).unwrap();
        let r = distortion_certified(&line, 1e-9).unwrap();
        assert!(r.upper <= 1.0 + 1e-9, "{r:?}");
    }

    #[test]
    fn square_dense_oracle_is_two() {
        // Oracle first: the dense sampling maximum sits at the opposite
        // edge midpoints.
        let oracle = dense_pairs(&square(), 400);
        assert_relative_eq!(oracle, 2.0, max_relative = 1e-12);

        let sq = square();
        let p = sq.point_on_segment(0, 0.5);
        let q = sq.point_on_segment(2, 0.5);
        assert_eq!(pair_distortion(&sq, &p, &q).unwrap(), 2.0);

        let r = distortion_certified(&sq, 1e-6).unwrap();
        assert!(r.converged);
        assert!((r.lower - 2.0).abs() <= 1e-6);
        assert!(r.upper - r.lower <= 1e-6);
        assert_eq!(pair_distortion(&sq, &r.witness.0, &r.witness.1).unwrap(), r.lower);

        assert_eq!(distortion_sampled(&sq, 16).unwrap().value, 2.0);
        let a = antipodal_distortion(&sq, 1e-9).unwrap();
        assert!((a.lower - 2.0).abs() < 1e-12 && a.upper - a.lower <= 1e-9);
    }

    #[test]
    fn hexagon_is_sqrt3() {
        let hex = ngon(6, 1.0);
        let oracle = dense_pairs(&hex, 600);
        assert!((oracle - 3f64.sqrt()).abs() < 1e-9, "{oracle}");
        let r = distortion_certified(&hex, 1e-6).unwrap();
        assert!((r.lower - 3f64.sqrt()).abs() <= 1e-6, "{r:?}");
        assert!(r.upper - r.lower <= 1e-6);
    }

    #[test]
    fn fine_circle_near_half_pi() {
        let c = ngon(2048, 1.0);
        let p = c.point_at(0.0).unwrap();
        let q = c.point_at(c.total_length() / 2.0).unwrap();
        assert!((pair_distortion(&c, &p, &q).unwrap() - FRAC_PI_2).abs() < 1e-3);
        let a = antipodal_distortion(&c, 1e-6).unwrap();
        assert!((a.lower - FRAC_PI_2).abs() < 2e-3);
    }

    #[test]
    fn box_bound_on_collinear_boxes() {
        let seg = PolyCurve::new(vec![v(0., 0., 0.), v(10., 0., 0.)], false).unwrap();
        let i = ArcInterval::new(1.0, 2.0);
        let j = ArcInterval::new(5.0, 7.0);
        let ub = box_upper_bound(&seg, &i, &j);
        assert_relative_eq!(ub, 6.0 / 3.0, max_relative = 1e-11);
        // Touching intervals have no finite bound.
        assert!(box_upper_bound(&seg, &i, &ArcInterval::new(2.0, 3.0)).is_infinite());
        // Whole curve against itself.
        let sq = square();
        let whole = ArcInterval::new(0.0, 4.0);
        assert!(box_upper_bound(&sq, &whole, &whole) >= 2.0);
    }

    #[test]
    fn shrinking_boxes_decrease_toward_two() {
        let sq = square();
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let w = 0.5f64.powi(k);
            let i = ArcInterval::new(0.5 - w, 0.5 + w);
            let j = ArcInterval::new(2.5 - w, 2.5 + w);
            let ub = box_upper_bound(&sq, &i, &j);
            assert!(ub <= prev + 1e-15);
            assert!(ub >= 2.0);
            prev = ub;
        }
        assert!(prev < 2.0 + 1e-3);
    }

    #[test]
    fn max_arc_case_split() {
        let sq = square();
        // Gap range straddles L/2.
        assert_eq!(max_arc_ordered(&sq, 0.0, 0.5, 1.8, 2.8), 2.0);
        // Entirely below.
        assert_eq!(max_arc_ordered(&sq, 0.0, 0.5, 1.0, 1.5), 1.5);
        // Entirely above: the short way round.
        assert_eq!(max_arc_ordered(&sq, 0.0, 0.5, 3.0, 3.5), 1.5);
    }

    #[test]
    fn children_never_exceed_parent() {
        let c = ngon(40, 1.0);
        let l = c.total_length();
        let parent = PairBox {
            i: ArcInterval::new(0.0, l / 4.0),
            j: ArcInterval::new(l / 2.0, 3.0 * l / 4.0),
            ub: qbox(&c, 0.0, l / 4.0, l / 2.0, 3.0 * l / 4.0).ub,
        };
        let mut stack = vec![parent];
        for _ in 0..200 {
            let b = stack.pop().unwrap();
            for child in split_box(&c, &b) {
                assert!(child.ub <= b.ub);
                stack.insert(0, child);
            }
        }
    }

    #[test]
    fn open_polyline_certified_against_dense() {
        let curve = PolyCurve::new(
            vec![v(0., 0., 0.), v(2., 0., 0.), v(2., 1., 0.5), v(0.5, 1.2, 0.1), v(0.3, 0.4, 2.0)],
            false,
        )
        .unwrap();
        let r = distortion_certified(&curve, 1e-9).unwrap();
        let est = distortion_sampled(&curve, 3000).unwrap().value;
        assert!(est <= r.upper, "{est} vs {r:?}");
        assert!(r.upper - r.lower <= 1e-9);
        assert!(est >= r.lower - 1e-4);
    }

    #[test]
    fn scale_invariance() {
        let curve = PolyCurve::new(
            vec![v(0., 0., 0.), v(2., 0., 0.), v(2., 1., 0.5), v(0.5, 1.2, 0.1), v(0.3, 0.4, 2.0)],
            true,
        )
        .unwrap();
        let scaled = curve.map_vertices(|p| p * 3.7).unwrap();
        let a = distortion_certified(&curve, 1e-10).unwrap();
        let b = distortion_certified(&scaled, 1e-10).unwrap();
        assert!((a.lower - b.lower).abs() <= 1e-9);
        assert!((a.upper - b.upper).abs() <= 1e-9);
    }

    #[test]
    fn rejects_non_simple_and_bad_tol() {
        let eight = PolyCurve::new(
            vec![v(0., 0., 0.), v(1., 1., 0.), v(1., 0., 0.), v(0., 1., 0.)],
            true,
        )
        .unwrap();
        assert!(matches!(distortion_certified(&eight, 1e-3), Err(Error::NotSimple(_))));
        assert!(distortion_certified(&square(), 0.0).is_err());
        let open = PolyCurve::new(vec![v(0., 0., 0.), v(1., 0., 0.)], false).unwrap();
        assert!(antipodal_distortion(&open, 1e-3).is_err());
    }

    #[test]
    fn tiny_budget_is_flagged() {
        let c = ngon(64, 1.0);
        let r = distortion_certified_with(&c, &CertifyOptions { tol: 1e-12, max_boxes: 10 }).unwrap();
        assert!(!r.converged);
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn profile_rows() {
        let sq = square();
        let rows = distortion_profile(&sq, 0.5, 8).unwrap();
        assert_eq!(rows.len(), 7);
        let at_opposite = rows.iter().find(|r| r.0 == 2.5).unwrap();
        assert_eq!(at_opposite.1, 2.0);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn segment_pair_max_matches_grid(
            pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 5..9),
            closed in any::<bool>(),
            fr in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
        ) {
            let verts: Vec<Vec3> = pts.iter().map(|&(x, y, z)| v(x, y, z)).collect();
            let Ok(c) = PolyCurve::new(verts, closed) else { return Ok(()) };
            if !c.is_simple_default() {
                return Ok(());
            }
            let (i, j) = (0, 2);
            let (si, li) = (c.segment_start(i), c.segment_length(i));
            let (sj, lj) = (c.segment_start(j), c.segment_length(j));
            let (a1, a2) = (si + li * fr.0.min(fr.1), si + li * fr.0.max(fr.1));
            let (b1, b2) = (sj + lj * fr.2.min(fr.3), sj + lj * fr.2.max(fr.3));
            let (val, p, q) = segment_pair_max(&c, i, j, (a1, a2), (b1, b2));
            prop_assert!((pair_distortion(&c, &p, &q).unwrap() - val).abs() <= 1e-12 * val);
            // Grid oracle over the rectangle.
            let n = 120;
            let mut grid: f64 = 0.0;
            for a in 0..=n {
                for b in 0..=n {
                    let s = a1 + (a2 - a1) * a as f64 / n as f64;
                    let t = b1 + (b2 - b1) * b as f64 / n as f64;
                    let d = c.arc_distance_coords(s, t);
                    let ch = (c.position_at(s).unwrap() - c.position_at(t).unwrap()).norm();
                    grid = grid.max(d / ch);
                }
            }
            prop_assert!(val >= grid - 1e-12 * grid, "{val} < grid {grid}");
            let lip = box_upper_bound(&c, &ArcInterval::new(a1, a2), &ArcInterval::new(b1, b2));
            prop_assert!(val <= lip);
            // A fine grid around the maximiser, where a sharp peak hides
            // from the coarse one.
            let (hs, ht) = ((a2 - a1) / n as f64, (b2 - b1) / n as f64);
            let mut local: f64 = 0.0;
            for a in -40..=40 {
                for b in -40..=40 {
                    let s = (p.arclen + hs * a as f64 / 20.0).clamp(a1, a2);
                    let t = (q.arclen + ht * b as f64 / 20.0).clamp(b1, b2);
                    let d = c.arc_distance_coords(s, t);
                    let ch = (c.position_at(s).unwrap() - c.position_at(t).unwrap()).norm();
                    local = local.max(d / ch);
                }
            }
            prop_assert!(val >= local - 1e-12 * local, "{val} < local grid {local}");
        }
    }
}
