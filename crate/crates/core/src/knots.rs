//! Example curves and the elementary-move isotopy test.

use crate::geometry::segment::{point_segment, segment_segment, segment_triangle};
use crate::geometry::DEFAULT_CLEARANCE;
use crate::{Error, PolyCurve, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Regular `n`-gon inscribed in the unit circle in the `xy`-plane.
pub fn circle(n: usize) -> Result<PolyCurve> {
    if n < 3 {
        return Err(Error::Domain(format!("circle needs n >= 3, got {n}")));
    }
    let verts = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Vec3::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    PolyCurve::new(verts, true)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The `(p, q)` torus knot on the torus with radii `R > r`, sampled at `n`
/// equally spaced parameter values:
/// `((R + r cos qt) cos pt, (R + r cos qt) sin pt, r sin qt)`.
pub fn torus_knot(p: u32, q: u32, big_r: f64, r: f64, n: usize) -> Result<PolyCurve> {
    if p < 2 || q < 2 || gcd(p, q) != 1 {
        return Err(Error::Domain(format!(
            "torus knot needs coprime p, q >= 2, got ({p}, {q})"
        )));
    }
    if !(r > 0.0 && big_r > r && big_r.is_finite()) {
        return Err(Error::Domain(format!(
            "torus radii must satisfy R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    let min_n = 3 * (p * q) as usize;
    if n < min_n {
        return Err(Error::Domain(format!(
            "torus knot ({p}, {q}) needs at least {min_n} vertices, got {n}"
        )));
    }
    let (pf, qf) = (p as f64, q as f64);
    let verts = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let rad = big_r + r * (qf * t).cos();
            Vec3::new(rad * (pf * t).cos(), rad * (pf * t).sin(), r * (qf * t).sin())
        })
        .collect();
    let curve = PolyCurve::new(verts, true)?;
    if let Some((i, j)) = curve.first_intersection(DEFAULT_CLEARANCE * curve.total_length()) {
        return Err(Error::NotSimple(format!(
            "torus knot sampling at n = {n} makes segments {i} and {j} meet"
        )));
    }
    Ok(curve)
}

const TILE_R: f64 = 2.5;
const TILE_CUT: f64 = 0.3;

/// An open trefoil with straight, collinear ends along the `x`-axis.
///
/// The body is the `(2, 3)` torus knot on radii `(2.5, 1)` with a short arc
/// around its outermost point removed; the two loose ends are bent onto a
/// common line and continued straight. The result runs from `+x` to `-x`
/// with the knotted part at `y > 0`, so closing it by a large arc through
/// `y < 0` yields a trefoil. `n` counts all vertices, of which four lie on
/// the straight ends.
pub fn open_trefoil(n: usize) -> Result<PolyCurve> {
    if n < 32 {
        return Err(Error::Domain(format!("open trefoil needs n >= 32, got {n}")));
    }
    let r = 1.0;
    let torus = |t: f64| {
        let rad = TILE_R + r * (3.0 * t).cos();
        Vec3::new(rad * (2.0 * t).cos(), rad * (2.0 * t).sin(), r * (3.0 * t).sin())
    };
    let x0 = TILE_R + r + 0.5;
    let c = TILE_CUT;
    let y_end = 2.0 * torus(c).y;
    let e_plus = Vec3::new(x0, y_end, 0.0);
    let e_minus = Vec3::new(x0, -y_end, 0.0);
    let tail = (e_plus - e_minus).norm();

    let body = n - 4;
    let mut verts = Vec::with_capacity(n);
    verts.push(Vec3::new(x0, y_end + tail, 0.0));
    verts.push(e_plus);
    for k in 0..body {
        let t = c + (2.0 * PI - 2.0 * c) * k as f64 / (body - 1) as f64;
        verts.push(torus(t));
    }
    verts.push(e_minus);
    verts.push(Vec3::new(x0, -y_end - tail, 0.0));

    // Ends onto the x-axis, body towards +y.
    let verts = verts
        .into_iter()
        .map(|v| Vec3::new(v.y, x0 - v.x, v.z))
        .collect();
    let curve = PolyCurve::new(verts, false)?;
    if !curve.is_simple_default() {
        return Err(Error::NotSimple("open trefoil sampling self-intersects".into()));
    }
    Ok(curve)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectSumSpec {
    /// Open tile whose first and last segments lie on one line.
    pub tile: PolyCurve,
    pub copies: usize,
    /// Each copy is this factor smaller than the previous one.
    pub scale_ratio: f64,
    pub loop_radius: f64,
}

impl ConnectSumSpec {
    /// Tiles of `open_trefoil(n)` on a loop 200 tile spans across.
    pub fn with_trefoil(n: usize, copies: usize, scale_ratio: f64) -> Result<Self> {
        let tile = open_trefoil(n)?;
        let span = (tile.vertex(0) - tile.vertex(tile.len() - 1)).norm();
        Ok(Self {
            tile,
            copies,
            scale_ratio,
            loop_radius: 100.0 * span,
        })
    }
}

/// Direction of the tile's straight ends and the unit normal pointing at its
/// body, both derived from the tile itself.
fn tile_frame(tile: &PolyCurve) -> Result<(Vec3, Vec3, Vec3)> {
    let n = tile.len();
    let first = tile.vertex(0);
    let last = tile.vertex(n - 1);
    let axis = (last - first).normalize();
    let d0 = (tile.vertex(1) - first).normalize();
    let d1 = (last - tile.vertex(n - 2)).normalize();
    if d0.dot(&axis) < 1.0 - 1e-9 || d1.dot(&axis) < 1.0 - 1e-9 {
        return Err(Error::InvalidCurve(
            "connect-sum tile must have straight collinear ends".into(),
        ));
    }
    let mid = 0.5 * (first + last);
    // Body direction: mean offset from the end line.
    let mut off = Vec3::zeros();
    for v in tile.vertices() {
        let rel = v - mid;
        off += rel - axis * rel.dot(&axis);
    }
    let side = off - axis * off.dot(&axis);
    if side.norm() == 0.0 {
        return Err(Error::InvalidCurve("tile body lies on its end line".into()));
    }
    Ok((mid, axis, side.normalize()))
}

/// A large planar loop carrying `copies` scaled tiles, copy `k` scaled by
/// `scale_ratio^k`. Each tile replaces a chord of the loop with its body
/// pointing away from the loop centre.
pub fn connect_sum(spec: &ConnectSumSpec) -> Result<PolyCurve> {
    if spec.copies == 0 {
        return Err(Error::Domain("connect sum needs at least one copy".into()));
    }
    if !(spec.scale_ratio > 0.0 && spec.scale_ratio < 1.0) {
        return Err(Error::Domain(format!(
            "scale ratio must lie in (0, 1), got {}",
            spec.scale_ratio
        )));
    }
    if !(spec.loop_radius > 0.0 && spec.loop_radius.is_finite()) {
        return Err(Error::Domain("loop radius must be positive".into()));
    }
    let tile = &spec.tile;
    if tile.is_closed() {
        return Err(Error::InvalidCurve("connect-sum tile must be open".into()));
    }
    let (mid, axis, side) = tile_frame(tile)?;
    let normal = axis.cross(&side);
    let span = (tile.vertex(tile.len() - 1) - tile.vertex(0)).norm();
    let diameter = tile
        .vertices()
        .iter()
        .map(|v| (v - mid).norm())
        .fold(0.0, f64::max)
        * 2.0;

    let big = spec.loop_radius;
    let k = spec.copies;
    let scales: Vec<f64> = (0..k).map(|i| spec.scale_ratio.powi(i as i32)).collect();
    // Half-angle subtended by each tile's chord.
    let half: Vec<f64> = scales
        .iter()
        .map(|s| {
            let h = 0.5 * span * s / big;
            if h >= 1.0 {
                Err(Error::Infeasible(format!(
                    "tile span {} exceeds the loop diameter",
                    span * s
                )))
            } else {
                Ok(h.asin())
            }
        })
        .collect::<Result<_>>()?;
    let centres: Vec<f64> = (0..k).map(|i| 2.0 * PI * i as f64 / k as f64).collect();
    for i in 0..k {
        let j = (i + 1) % k;
        let gap_angle = if k == 1 {
            2.0 * PI - 2.0 * half[i]
        } else {
            let next = if j == 0 { 2.0 * PI } else { centres[j] };
            next - half[j] - centres[i] - half[i]
        };
        let need = 10.0 * diameter * scales[i].max(scales[j]);
        if big * gap_angle < need {
            return Err(Error::Infeasible(format!(
                "copies {i} and {j} are {:.3e} apart along the loop, need {:.3e}",
                big * gap_angle,
                need
            )));
        }
    }

    let step = 2.0 * PI / 256.0;
    let mut verts = Vec::new();
    for i in 0..k {
        let phi = centres[i];
        let radial = Vec3::new(phi.cos(), phi.sin(), 0.0);
        let tangent = Vec3::new(-phi.sin(), phi.cos(), 0.0);
        let centre = radial * (big * half[i].cos());
        let s = scales[i];
        // Tile frame (axis, side, normal) onto (tangent, radial, z).
        for v in tile.vertices() {
            let rel = v - mid;
            let a = rel.dot(&axis);
            let b = rel.dot(&side);
            let c = rel.dot(&normal);
            verts.push(centre + (tangent * a + radial * b + Vec3::z() * c) * s);
        }
        // Loop arc to the next copy, excluding both end vertices.
        let start = phi + half[i];
        let end = if i + 1 == k { 2.0 * PI } else { centres[i + 1] } - half[(i + 1) % k];
        let steps = ((end - start) / step).ceil().max(1.0) as usize;
        for m in 1..steps {
            let a = start + (end - start) * m as f64 / steps as f64;
            verts.push(Vec3::new(big * a.cos(), big * a.sin(), 0.0));
        }
    }
    let curve = PolyCurve::new(verts, true)?;
    if let Some((i, j)) = curve.first_intersection(DEFAULT_CLEARANCE * curve.total_length()) {
        return Err(Error::Infeasible(format!(
            "assembled curve is not simple (segments {i} and {j})"
        )));
    }
    Ok(curve)
}

/// Whether segment `[s0, s1]` stays clear of triangle `tri`. A segment
/// sharing a vertex with the triangle may touch it only at that vertex.
fn segment_clears_triangle(s0: &Vec3, s1: &Vec3, tri: &[Vec3; 3], clearance: f64) -> bool {
    for (k, x) in tri.iter().enumerate() {
        let far = if s0 == x {
            s1
        } else if s1 == x {
            s0
        } else {
            continue;
        };
        let e1 = tri[(k + 1) % 3] - x;
        let e2 = tri[(k + 2) % 3] - x;
        let d = far - x;
        let n = e1.cross(&e2);
        let scale = e1.norm() * e2.norm();
        if n.norm() <= 1e-12 * scale {
            // Degenerate triangle: a segment from `x`.
            let e = if e1.norm() >= e2.norm() { e1 } else { e2 };
            return !(d.cross(&e).norm() <= 1e-12 * d.norm() * e.norm() && d.dot(&e) > 0.0);
        }
        let nh = n / n.norm();
        if nh.dot(&d).abs() > 1e-12 * d.norm() {
            // Crosses the plane only at the shared vertex.
            return true;
        }
        let in_sector = e1.cross(&d).dot(&n) >= 0.0 && d.cross(&e2).dot(&n) >= 0.0;
        return !in_sector;
    }
    segment_triangle(s0, s1, &tri[0], &tri[1], &tri[2]) >= clearance
}

/// Whether two segments are at least `clearance` apart, or meet only at a
/// shared endpoint without folding back onto each other.
fn segments_clear(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3, clearance: f64) -> bool {
    let shared = if a0 == b0 || a0 == b1 {
        Some((a1, if a0 == b0 { b1 } else { b0 }))
    } else if a1 == b0 || a1 == b1 {
        Some((a0, if a1 == b0 { b1 } else { b0 }))
    } else {
        None
    };
    match shared {
        Some((fa, fb)) => {
            point_segment(fa, b0, b1).0 >= clearance && point_segment(fb, a0, a1).0 >= clearance
        }
        None => segment_segment(a0, a1, b0, b1).0 >= clearance,
    }
}

fn aabb_apart(a: &[Vec3], b: &[Vec3], clearance: f64) -> bool {
    (0..3).any(|k| {
        let amin = a.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
        let amax = a.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
        let bmin = b.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
        let bmax = b.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
        bmin > amax + clearance || amin > bmax + clearance
    })
}

/// Elementary triangle move test with the default clearance `1e-9 L`.
pub fn isotopy_safe_move(curve: &PolyCurve, vertex: usize, new_position: Vec3) -> bool {
    isotopy_safe_move_with(
        curve,
        vertex,
        new_position,
        DEFAULT_CLEARANCE * curve.total_length(),
        &[],
    )
}

/// True iff moving `vertex` to `new_position` is an elementary triangle
/// move: the triangles swept by its incident edges meet no other segment of
/// the curve or of `obstacles`, and the moved curve is simple.
pub fn isotopy_safe_move_with(
    curve: &PolyCurve,
    vertex: usize,
    new_position: Vec3,
    clearance: f64,
    obstacles: &[(Vec3, Vec3)],
) -> bool {
    let n = curve.len();
    if vertex >= n || !new_position.iter().all(|x| x.is_finite()) {
        return false;
    }
    let old = curve.vertex(vertex);
    if old == new_position {
        return true;
    }
    let nseg = curve.segment_count();
    let closed = curve.is_closed();
    // Incident segments and neighbours.
    let prev = if vertex > 0 {
        Some(vertex - 1)
    } else if closed {
        Some(n - 1)
    } else {
        None
    };
    let next = if vertex + 1 < n {
        Some(vertex + 1)
    } else if closed {
        Some(0)
    } else {
        None
    };
    let seg_in = prev.map(|_| (vertex + nseg - 1) % nseg);
    let seg_out = next.map(|_| vertex % nseg);
    let incident = |s: usize| Some(s) == seg_in || Some(s) == seg_out;

    let triangles: Vec<[Vec3; 3]> = [prev, next]
        .iter()
        .flatten()
        .map(|&nb| [curve.vertex(nb), old, new_position])
        .collect();
    let new_edges: Vec<(Vec3, Vec3)> = [prev, next]
        .iter()
        .flatten()
        .map(|&nb| (curve.vertex(nb), new_position))
        .collect();
    for (a, b) in &new_edges {
        if (b - a).norm() < clearance {
            return false;
        }
    }
    if let [(a, p), (b, _)] = new_edges.as_slice() {
        // The two new edges share `p`.
        if !segments_clear(a, p, p, b, clearance) {
            return false;
        }
    }

    let others = (0..nseg)
        .filter(|&s| !incident(s))
        .map(|s| curve.segment(s))
        .chain(obstacles.iter().copied());
    for (s0, s1) in others {
        for tri in &triangles {
            if !aabb_apart(&[s0, s1], tri, clearance)
                && !segment_clears_triangle(&s0, &s1, tri, clearance)
            {
                return false;
            }
        }
        for (a, b) in &new_edges {
            if !aabb_apart(&[s0, s1], &[*a, *b], clearance)
                && !segments_clear(a, b, &s0, &s1, clearance)
            {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn circle_basics() {
        let sq = circle(4).unwrap();
        let h = 2f64.sqrt() / 2.0;
        for p in sq.vertices() {
            assert!((p.x.abs() - h).abs() < 1e-15 || (p.y.abs() - h).abs() < 1e-15 || p.x.abs() == 1.0 || p.y.abs() == 1.0);
        }
        assert!((sq.total_length() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        let c = circle(2048).unwrap();
        let exact = 2048.0 * 2.0 * (PI / 2048.0).sin();
        assert!((c.total_length() - exact).abs() < 1e-12);
        assert!(circle(2).is_err());
    }

    #[test]
    fn torus_knot_validation() {
        let k = torus_knot(2, 3, 2.0, 1.0, 256).unwrap();
        assert!(k.is_simple_default());
        assert!(torus_knot(2, 4, 2.0, 1.0, 256).is_err());
        assert!(torus_knot(2, 3, 1.0, 1.0, 256).is_err());
        assert!(torus_knot(2, 3, 2.0, 1.0, 17).is_err());
        assert_eq!(k.vertices(), torus_knot(2, 3, 2.0, 1.0, 256).unwrap().vertices());
    }

    #[test]
    fn open_trefoil_ends() {
        let t = open_trefoil(128).unwrap();
        assert!(!t.is_closed());
        assert_eq!(t.len(), 128);
        let n = t.len();
        let d0 = (t.vertex(1) - t.vertex(0)).normalize();
        let d1 = (t.vertex(n - 1) - t.vertex(n - 2)).normalize();
        let axis = (t.vertex(n - 1) - t.vertex(0)).normalize();
        assert!(d0.cross(&axis).norm() < 1e-9 && d1.cross(&axis).norm() < 1e-9);
        assert!(d0.dot(&axis) > 0.0 && d1.dot(&axis) > 0.0);
        assert!(t.is_simple_default());
        // Body strictly on one side of the end line.
        assert!(t.vertices()[2..n - 2].iter().all(|p| p.y > 0.0));
        assert!(open_trefoil(31).is_err());
    }

    #[test]
    fn connect_sum_feasibility() {
        let spec = ConnectSumSpec::with_trefoil(96, 3, 0.1).unwrap();
        let c = connect_sum(&spec).unwrap();
        assert!(c.is_simple_default());
        assert_eq!(c.vertices(), connect_sum(&spec).unwrap().vertices());
        let tight = ConnectSumSpec {
            loop_radius: 5.0,
            ..spec.clone()
        };
        assert!(matches!(connect_sum(&tight), Err(Error::Infeasible(_))));
        let bad = ConnectSumSpec {
            scale_ratio: 1.0,
            ..spec
        };
        assert!(connect_sum(&bad).is_err());
    }

    #[test]
    fn square_moves() {
        let sq = PolyCurve::new(vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)], true).unwrap();
        assert!(isotopy_safe_move(&sq, 2, v(1.5, 1.5, 0.)));
        // Vertex 2 dragged through the opposite corner region, crossing
        // edge 3-0's line of sight.
        assert!(!isotopy_safe_move(&sq, 2, v(-0.5, -0.5, 0.)));
        // Out of plane and back above: still safe.
        assert!(isotopy_safe_move(&sq, 2, v(1., 1., 3.)));
    }

    #[test]
    fn strand_crossing_is_rejected() {
        // Closed polygon whose vertex 1 sits just above a strand (segment
        // 3-4) running underneath; pushing it below crosses the strand.
        let c = PolyCurve::new(
            vec![
                v(-1., 0., 0.5),
                v(0., 0., 0.5),
                v(1., 0., 0.5),
                v(1., 2., 0.),
                v(0., -2., 0.),
                v(-1., 2., 0.),
            ],
            true,
        )
        .unwrap();
        assert!(c.is_simple_default());
        assert!(!isotopy_safe_move(&c, 1, v(-0.1, 0.1, -0.5)));
        assert!(isotopy_safe_move(&c, 1, v(0., 0., 0.9)));
    }
}
