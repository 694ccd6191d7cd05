//! Closest-point queries between points, segments and triangles in 3D.

use super::Vec3;

/// Parallel segments are detected when `a*e - b*b` falls below this fraction
/// of `a*e`.
const PARALLEL_EPS: f64 = 1e-14;

/// Distance from `p` to the segment `[a, b]` and the clamped parameter of the
/// closest point.
pub fn point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    ((a + ab * t - p).norm(), t)
}

/// Minimum distance between segments `[p1, q1]` and `[p2, q2]`.
///
/// Returns the distance together with the parameters `(s, t)` of the closest
/// points on the first and second segment. The general case solves the 2x2
/// normal equations and clamps `s`, then `t`, then re-clamps `s`. Nearly
/// parallel pairs additionally take the four endpoint-to-segment distances so
/// the result stays exact when the normal equations are singular.
pub fn segment_segment(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> (f64, f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    if a == 0.0 && e == 0.0 {
        return (r.norm(), 0.0, 0.0);
    }
    if a == 0.0 {
        let t = (f / e).clamp(0.0, 1.0);
        return ((p2 + d2 * t - p1).norm(), 0.0, t);
    }
    let c = d1.dot(&r);
    if e == 0.0 {
        let s = (-c / a).clamp(0.0, 1.0);
        return ((p1 + d1 * s - p2).norm(), s, 0.0);
    }

    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let parallel = denom <= PARALLEL_EPS * a * e;
    let mut s = if parallel {
        0.0
    } else {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    let mut best = ((p1 + d1 * s) - (p2 + d2 * t)).norm();

    if parallel {
        let candidates = [
            (point_segment(p1, p2, q2), 0.0, None),
            (point_segment(q1, p2, q2), 1.0, None),
            (point_segment(p2, p1, q1), 0.0, Some(0.0)),
            (point_segment(q2, p1, q1), 1.0, Some(1.0)),
        ];
        for ((dist, param), fixed, other) in candidates {
            if dist < best {
                best = dist;
                match other {
                    None => {
                        s = fixed;
                        t = param;
                    }
                    Some(tt) => {
                        s = param;
                        t = tt;
                    }
                }
            }
        }
    }
    (best, s, t)
}

/// Closest point on triangle `(a, b, c)` to `p`.
pub fn closest_point_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Whether segment `[p, q]` crosses the plane of triangle `(a, b, c)` at a
/// point inside the closed triangle.
fn segment_pierces_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let n = (b - a).cross(&(c - a));
    let dp = n.dot(&(p - a));
    let dq = n.dot(&(q - a));
    if (dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) || dp == dq {
        return false;
    }
    let x = p + (q - p) * (dp / (dp - dq));
    // Barycentric sign test against each edge.
    let s1 = n.dot(&(b - a).cross(&(x - a)));
    let s2 = n.dot(&(c - b).cross(&(x - b)));
    let s3 = n.dot(&(a - c).cross(&(x - c)));
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

/// Minimum distance between segment `[p, q]` and the closed triangle
/// `(a, b, c)`; zero when they intersect.
pub fn segment_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    if segment_pierces_triangle(p, q, a, b, c) {
        return 0.0;
    }
    let mut best = (closest_point_triangle(p, a, b, c) - p).norm();
    best = best.min((closest_point_triangle(q, a, b, c) - q).norm());
    for (u, v) in [(a, b), (b, c), (c, a)] {
        best = best.min(segment_segment(p, q, u, v).0);
    }
    best
}
