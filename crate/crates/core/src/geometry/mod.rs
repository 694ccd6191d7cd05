//! Polygonal space curves with arclength and chord queries.
//!
//! A [`PolyCurve`] is immutable once built; every query takes `&self`, so a
//! curve can be shared freely between worker threads.

mod io;
pub mod segment;

pub use io::{parse_curve, parse_json, parse_text, to_json, to_text, CurveFile};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative clearance used by [`PolyCurve::is_simple_default`].
pub const DEFAULT_CLEARANCE: f64 = 1e-9;

/// Ordered vertex list with an open/closed flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "io::CurveFile", try_from = "io::CurveFile")]
pub struct PolyCurve {
    vertices: Vec<Vec3>,
    closed: bool,
    /// `cum[i]` is the arclength at the start of segment `i`; the last entry
    /// is the total length.
    cum: Vec<f64>,
}

/// A location on a curve: segment index, local parameter and the cached
/// arclength coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub seg: usize,
    /// In `[0, 1)`, except for the terminal point of an open curve where it
    /// is exactly 1.
    pub t: f64,
    pub arclen: f64,
}

/// An interval of arclength coordinates; `hi < lo` wraps through zero on a
/// closed curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ArcInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self, length: f64) -> f64 {
        if self.hi >= self.lo {
            self.hi - self.lo
        } else {
            self.hi + length - self.lo
        }
    }

    pub fn mid(&self, length: f64) -> f64 {
        let m = self.lo + 0.5 * self.width(length);
        if m >= length {
            m - length
        } else {
            m
        }
    }

    /// Splits a non-wrapping interval at `at`.
    pub fn split_at(&self, at: f64) -> (Self, Self) {
        debug_assert!(self.lo <= at && at <= self.hi);
        (Self::new(self.lo, at), Self::new(at, self.hi))
    }
}

impl PolyCurve {
    /// Builds a curve, rejecting too few vertices, non-finite coordinates
    /// and coincident consecutive vertices.
    pub fn new(vertices: Vec<Vec3>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(Error::InvalidCurve(format!(
                "{} curve needs at least {min} vertices, got {}",
                if closed { "closed" } else { "open" },
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidCurve(format!("vertex {i} is not finite")));
        }
        let nseg = if closed { vertices.len() } else { vertices.len() - 1 };
        let mut cum = Vec::with_capacity(nseg + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..nseg {
            let a = vertices[i];
            let b = vertices[(i + 1) % vertices.len()];
            let len = (b - a).norm();
            if len == 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % vertices.len()
                )));
            }
            acc += len;
            cum.push(acc);
        }
        Ok(Self {
            vertices,
            closed,
            cum,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn segment_count(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Vec3, Vec3) {
        (
            self.vertices[i],
            self.vertices[(i + 1) % self.vertices.len()],
        )
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Arclength coordinate of the start of segment `i` (`i == segment_count`
    /// gives the total length).
    pub fn segment_start(&self, i: usize) -> f64 {
        self.cum[i]
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn total_length(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    /// Segment containing arclength `s` (already reduced to `[0, L)`).
    pub fn segment_at(&self, s: f64) -> usize {
        let nseg = self.segment_count();
        // Last index with cum[i] <= s.
        let i = self.cum.partition_point(|&c| c <= s);
        i.saturating_sub(1).min(nseg - 1)
    }

    /// The point at arclength `s`. Closed curves reduce `s` modulo the
    /// length; open curves accept `0 <= s <= L`.
    pub fn point_at(&self, s: f64) -> Result<CurvePoint> {
        let length = self.total_length();
        if !s.is_finite() {
            return Err(Error::OutOfRange { s, length });
        }
        let s = if self.closed {
            let r = s.rem_euclid(length);
            if r >= length {
                0.0
            } else {
                r
            }
        } else {
            if !(0.0..=length).contains(&s) {
                return Err(Error::OutOfRange { s, length });
            }
            s
        };
        let seg = self.segment_at(s);
        let len = self.segment_length(seg);
        let t = ((s - self.cum[seg]) / len).clamp(0.0, 1.0);
        let t = if t >= 1.0 && !(!self.closed && seg + 1 == self.segment_count()) {
            // Rounding pushed us onto the next vertex.
            f64::from_bits(1f64.to_bits() - 1)
        } else {
            t
        };
        Ok(CurvePoint { seg, t, arclen: s })
    }

    /// A point given by segment and local parameter.
    pub fn point_on_segment(&self, seg: usize, t: f64) -> CurvePoint {
        let arclen = self.cum[seg] + t * self.segment_length(seg);
        CurvePoint { seg, t, arclen }
    }

    /// Embedded position of a curve point.
    pub fn position(&self, p: &CurvePoint) -> Vec3 {
        let (a, b) = self.segment(p.seg);
        a + (b - a) * p.t
    }

    /// Position at arclength `s`, with the same range rules as
    /// [`point_at`](Self::point_at).
    pub fn position_at(&self, s: f64) -> Result<Vec3> {
        self.point_at(s).map(|p| self.position(&p))
    }

    /// Arclength distance between two arclength coordinates: the shorter of
    /// the two arcs on a closed curve, the subarc length on an open one.
    pub fn arc_distance_coords(&self, s: f64, t: f64) -> f64 {
        let l = (s - t).abs();
        if self.closed {
            l.min(self.total_length() - l)
        } else {
            l
        }
    }

    pub fn arc_distance(&self, p: &CurvePoint, q: &CurvePoint) -> Result<f64> {
        if p.arclen == q.arclen {
            return Err(Error::CoincidentPoints);
        }
        Ok(self.arc_distance_coords(p.arclen, q.arclen))
    }

    pub fn chord(&self, p: &CurvePoint, q: &CurvePoint) -> f64 {
        (self.position(p) - self.position(q)).norm()
    }

    /// Exterior (turning) angle at vertex `i`; `None` at the endpoints of an
    /// open curve.
    pub fn turning_angle(&self, i: usize) -> Option<f64> {
        let n = self.vertices.len();
        if !self.closed && (i == 0 || i + 1 == n) {
            return None;
        }
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        let here = self.vertices[i];
        let u = here - prev;
        let v = next - here;
        Some(u.cross(&v).norm().atan2(u.dot(&v)))
    }

    /// Vertices that carry a turning angle.
    pub fn interior_vertices(&self) -> std::ops::Range<usize> {
        if self.closed {
            0..self.vertices.len()
        } else {
            1..self.vertices.len() - 1
        }
    }

    /// Whether segments `i` and `j` share a vertex (or are the same).
    pub fn segments_adjacent(&self, i: usize, j: usize) -> bool {
        let nseg = self.segment_count();
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        j - i <= 1 || (self.closed && i == 0 && j == nseg - 1)
    }

    /// Resamples to `n` vertices at equal arclength spacing along this curve
    /// (an open curve keeps both endpoints). Fails when the result would no
    /// longer be simple while the input is.
    pub fn resample(&self, n: usize) -> Result<PolyCurve> {
        let min = if self.closed { 3 } else { 2 };
        if n < min {
            return Err(Error::InvalidCurve(format!(
                "cannot resample to {n} vertices"
            )));
        }
        let length = self.total_length();
        let verts: Vec<Vec3> = if self.closed {
            (0..n)
                .map(|k| self.position_at(length * k as f64 / n as f64))
                .collect::<Result<_>>()?
        } else {
            (0..n)
                .map(|k| {
                    if k + 1 == n {
                        Ok(self.vertices[self.vertices.len() - 1])
                    } else {
                        self.position_at(length * k as f64 / (n - 1) as f64)
                    }
                })
                .collect::<Result<_>>()?
        };
        let out = PolyCurve::new(verts, self.closed)?;
        if !out.is_simple_default() && self.is_simple_default() {
            return Err(Error::NotSimple(format!(
                "resampling to {n} vertices destroys simplicity"
            )));
        }
        Ok(out)
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<PolyCurve> {
        PolyCurve::new(self.vertices.iter().map(f).collect(), self.closed)
    }

    /// Simplicity with the default clearance of `1e-9 * L`.
    pub fn is_simple_default(&self) -> bool {
        self.is_simple(DEFAULT_CLEARANCE * self.total_length())
    }

    /// True iff all non-adjacent segment pairs are at least `clearance`
    /// apart and adjacent segments meet only at their shared vertex.
    pub fn is_simple(&self, clearance: f64) -> bool {
        self.first_intersection(clearance).is_none()
    }

    /// The first offending segment pair found by [`is_simple`](Self::is_simple).
    pub fn first_intersection(&self, clearance: f64) -> Option<(usize, usize)> {
        let nseg = self.segment_count();
        // Adjacent pairs: neither far endpoint may lie on the other segment.
        for i in 0..nseg {
            let j = i + 1;
            if j >= nseg && !self.closed {
                break;
            }
            let j = j % nseg;
            if i == j {
                continue;
            }
            let (a, b) = self.segment(i);
            let (_, c) = self.segment(j);
            if segment::point_segment(&a, &b, &c).0 < clearance
                || segment::point_segment(&c, &a, &b).0 < clearance
            {
                return Some((i, j));
            }
        }

        // Sweep-and-prune on x for the non-adjacent pairs.
        let boxes: Vec<(Vec3, Vec3)> = (0..nseg)
            .map(|i| {
                let (a, b) = self.segment(i);
                (a.inf(&b), a.sup(&b))
            })
            .collect();
        let mut order: Vec<usize> = (0..nseg).collect();
        order.sort_by(|&i, &j| boxes[i].0.x.total_cmp(&boxes[j].0.x));
        for (k, &i) in order.iter().enumerate() {
            let (lo_i, hi_i) = boxes[i];
            for &j in &order[k + 1..] {
                let (lo_j, hi_j) = boxes[j];
                if lo_j.x > hi_i.x + clearance {
                    break;
                }
                if lo_j.y > hi_i.y + clearance
                    || lo_i.y > hi_j.y + clearance
                    || lo_j.z > hi_i.z + clearance
                    || lo_i.z > hi_j.z + clearance
                {
                    continue;
                }
                if self.segments_adjacent(i, j) {
                    continue;
                }
                let (a, b) = self.segment(i);
                let (c, d) = self.segment(j);
                if segment::segment_segment(&a, &b, &c, &d).0 < clearance {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    pub(crate) fn unit_square() -> PolyCurve {
        PolyCurve::new(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)],
            true,
        )
        .unwrap()
    }

    fn ngon(n: usize) -> PolyCurve {
        let verts = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                v(a.cos(), a.sin(), 0.0)
            })
            .collect();
        PolyCurve::new(verts, true).unwrap()
    }

    #[test]
    fn lengths() {
        assert_eq!(unit_square().total_length(), 4.0);
        let seg = PolyCurve::new(vec![v(0., 0., 0.), v(3., 0., 0.)], false).unwrap();
        assert_eq!(seg.total_length(), 3.0);
        let n = 2048.0;
        assert_relative_eq!(
            ngon(2048).total_length(),
            n * 2.0 * (PI / n).sin(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn rejects_bad_vertex_lists() {
        assert!(PolyCurve::new(vec![v(0., 0., 0.), v(1., 0., 0.)], true).is_err());
        assert!(PolyCurve::new(vec![v(0., 0., 0.)], false).is_err());
        assert!(PolyCurve::new(vec![v(0., 0., 0.), v(0., 0., 0.)], false).is_err());
        // Last equals first on a closed curve.
        assert!(PolyCurve::new(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 0., 0.)],
            true
        )
        .is_err());
        assert!(PolyCurve::new(vec![v(0., f64::NAN, 0.), v(1., 0., 0.)], false).is_err());
    }

    #[test]
    fn square_midpoints() {
        let sq = unit_square();
        let p = sq.point_at(0.5).unwrap();
        let q = sq.point_at(2.5).unwrap();
        assert_eq!(sq.arc_distance(&p, &q).unwrap(), 2.0);
        assert_eq!(sq.chord(&p, &q), 1.0);
        assert!(sq.arc_distance(&p, &p).is_err());
    }

    #[test]
    fn hexagon_opposite_midpoints() {
        let s = 1.7;
        let verts = (0..6)
            .map(|k| {
                let a = PI / 3.0 * k as f64;
                v(s * a.cos(), s * a.sin(), 0.0)
            })
            .collect();
        let hex = PolyCurve::new(verts, true).unwrap();
        let p = hex.point_on_segment(0, 0.5);
        let q = hex.point_on_segment(3, 0.5);
        assert_relative_eq!(hex.chord(&p, &q), 3f64.sqrt() * s, max_relative = 1e-14);
    }

    #[test]
    fn open_segment_endpoints() {
        let seg = PolyCurve::new(vec![v(0., 0., 0.), v(3., 0., 0.)], false).unwrap();
        let p = seg.point_at(0.0).unwrap();
        let q = seg.point_at(3.0).unwrap();
        assert_eq!(seg.arc_distance(&p, &q).unwrap(), 3.0);
        assert_eq!(seg.position(&q), v(3., 0., 0.));
        assert!(seg.point_at(3.5).is_err());
        assert!(seg.point_at(-0.1).is_err());
    }

    #[test]
    fn antipodal_on_fine_polygon() {
        let c = ngon(2048);
        let l = c.total_length();
        let p = c.point_at(0.3).unwrap();
        let q = c.point_at(0.3 + l / 2.0).unwrap();
        assert_relative_eq!(c.arc_distance(&p, &q).unwrap(), l / 2.0, max_relative = 1e-14);
        let a = c.point_at(0.0).unwrap();
        let b = c.point_at(l / 2.0).unwrap();
        assert!((c.chord(&a, &b) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn point_at_edges() {
        let sq = unit_square();
        assert_eq!(sq.position_at(0.0).unwrap(), v(0., 0., 0.));
        assert_eq!(sq.position_at(2.0).unwrap(), v(1., 1., 0.));
        let p = sq.point_at(1.0 - 1e-12).unwrap();
        assert_eq!(p.seg, 0);
        assert!(p.t > 1.0 - 1e-11);
        // Wraps on closed curves.
        assert_eq!(sq.point_at(4.5).unwrap().arclen, 0.5);
    }

    #[test]
    fn resample_square_to_octagon() {
        let oct = unit_square().resample(8).unwrap();
        assert_eq!(oct.len(), 8);
        assert_relative_eq!(oct.total_length(), 4.0, max_relative = 1e-15);
        assert_eq!(oct.vertex(1), v(0.5, 0., 0.));
        assert_eq!(oct.vertex(2), v(1., 0., 0.));
    }

    #[test]
    fn resample_fine_circle() {
        let c = ngon(2048);
        let r = c.resample(4096).unwrap();
        assert!((r.total_length() - c.total_length()).abs() < 1e-9);
    }

    #[test]
    fn resample_twice_regular_polygon() {
        let once = ngon(12).resample(36).unwrap();
        let twice = once.resample(36).unwrap();
        for (a, b) in once.vertices().iter().zip(twice.vertices()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn resample_too_coarse_is_reported() {
        // Five equally spaced points cut the sharp spike at (8, 1) across
        // the strand through (7, 2).
        let verts = vec![
            v(7., 3., 0.),
            v(8., 1., 0.),
            v(4., 4., 0.),
            v(7., 2., 0.),
            v(5., 9., 0.),
        ];
        let c = PolyCurve::new(verts, true).unwrap();
        assert!(c.is_simple_default());
        assert!(matches!(c.resample(5), Err(Error::NotSimple(_))));
        let fine = c.resample(400).unwrap();
        assert!(fine.is_simple_default());
        assert!(matches!(c.resample(2), Err(Error::InvalidCurve(_))));
    }

    #[test]
    fn simplicity() {
        assert!(unit_square().is_simple_default());
        assert!(ngon(300).is_simple_default());
        let figure_eight = PolyCurve::new(
            vec![v(0., 0., 0.), v(1., 1., 0.), v(1., 0., 0.), v(0., 1., 0.)],
            true,
        )
        .unwrap();
        assert!(!figure_eight.is_simple_default());
        // Hairpin folding back onto itself.
        let hairpin =
            PolyCurve::new(vec![v(0., 0., 0.), v(2., 0., 0.), v(1., 0., 0.)], false).unwrap();
        assert!(!hairpin.is_simple_default());
    }

    #[test]
    fn turning_angles() {
        let sq = unit_square();
        for i in 0..4 {
            assert_relative_eq!(sq.turning_angle(i).unwrap(), PI / 2.0, max_relative = 1e-15);
        }
        let open = PolyCurve::new(vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.)], false)
            .unwrap();
        assert!(open.turning_angle(0).is_none());
        assert!(open.turning_angle(2).is_none());
    }

    #[test]
    fn arc_interval_wraps() {
        let iv = ArcInterval::new(3.5, 0.5);
        assert_eq!(iv.width(4.0), 1.0);
        assert_eq!(iv.mid(4.0), 0.0);
    }
}
