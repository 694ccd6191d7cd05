//! Distortion minimization by simulated annealing over elementary moves.
//!
//! The chain moves one vertex at a time. A proposal is accepted when the
//! exact distortion of the new polygon passes the Metropolis test and the
//! move is an elementary triangle move (see
//! [`crate::knots::isotopy_safe_move`]), so every accepted curve is isotopic
//! to the starting one. The exact value is kept cheap by a table of per-pair
//! bounds that only the pairs touching the moved vertex invalidate. Open curves keep
//! their first two and last two vertices fixed, and moves must also avoid
//! the straight rays that continue their ends.

use crate::distortion::{distortion_certified, full_segment_pair_max, DistortionResult};
use crate::geometry::segment::segment_segment;
use crate::geometry::DEFAULT_CLEARANCE;
use crate::knots::isotopy_safe_move_with;
use crate::{Error, PolyCurve, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    /// Starting temperature; `None` means `1e-5` times the initial objective.
    pub initial_temp: Option<f64>,
    /// Temperature factor per epoch.
    pub cooling: f64,
    /// Proposals per epoch; `None` means `50` per vertex.
    pub steps_per_epoch: Option<usize>,
    pub epochs: usize,
    /// Proposal scale as a fraction of the mean incident edge length.
    pub step_scale: f64,
    pub resample_every: usize,
    pub certify_every: usize,
    /// Enclosure width for the periodic certified evaluations.
    pub certify_tol: f64,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temp: None,
            cooling: 0.95,
            steps_per_epoch: None,
            epochs: 200,
            step_scale: 0.1,
            resample_every: 20,
            certify_every: 10,
            certify_tol: 1e-4,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if let Some(t) = self.initial_temp {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("initial_temp must be finite and >= 0, got {t}"));
            }
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad(format!("cooling must lie in (0, 1), got {}", self.cooling));
        }
        if self.steps_per_epoch == Some(0) {
            return bad("steps_per_epoch must be >= 1".into());
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("resample_every", self.resample_every),
            ("certify_every", self.certify_every),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 0.5) {
            return bad(format!("step_scale must lie in (0, 0.5], got {}", self.step_scale));
        }
        if !(self.certify_tol > 0.0) {
            return bad(format!("certify_tol must be positive, got {}", self.certify_tol));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub temperature: f64,
    /// Exact distortion of the current curve at the end of the epoch.
    pub objective: f64,
    pub acceptance_rate: f64,
    /// Certified upper bound of the current curve, when certified this epoch.
    pub certified: Option<f64>,
    /// Lowest certified upper bound seen so far.
    pub best_certified: f64,
    pub resampled: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeTrace {
    pub records: Vec<EpochRecord>,
    pub initial: DistortionResult,
    pub best: DistortionResult,
    /// The curve with the lowest certified upper bound.
    pub final_curve: PolyCurve,
    pub accepted_moves: usize,
    pub proposed_moves: usize,
}

// ---------------------------------------------------------------------------
// Objective

const BLOCK: usize = 16;
const HOT_PAIRS: usize = 16;

/// Vertex and midpoint samples of a polygon, with what the pruned pair
/// search needs.
#[derive(Clone, Debug)]
struct Sampled {
    closed: bool,
    length: f64,
    s: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    /// `sec(κ/2)` per vertex (1 at open endpoints).
    corners: Vec<f64>,
    /// Prefix sums of turning angles over vertices.
    turn_prefix: Vec<f64>,
}

fn turning(prev: &Vec3, here: &Vec3, next: &Vec3) -> f64 {
    let u = here - prev;
    let v = next - here;
    u.cross(&v).norm().atan2(u.dot(&v))
}

impl Sampled {
    fn new(verts: &[Vec3], closed: bool) -> Self {
        let n = verts.len();
        let nseg = if closed { n } else { n - 1 };
        let ns = 2 * nseg + usize::from(!closed);
        let mut out = Sampled {
            closed,
            length: 0.0,
            s: Vec::with_capacity(ns),
            x: Vec::with_capacity(ns),
            y: Vec::with_capacity(ns),
            z: Vec::with_capacity(ns),
            corners: vec![1.0; n],
            turn_prefix: vec![0.0; n + 1],
        };
        let push = |o: &mut Sampled, s: f64, p: Vec3| {
            o.s.push(s);
            o.x.push(p.x);
            o.y.push(p.y);
            o.z.push(p.z);
        };
        let mut acc = 0.0;
        for k in 0..nseg {
            let a = verts[k];
            let b = verts[(k + 1) % n];
            let len = (b - a).norm();
            push(&mut out, acc, a);
            push(&mut out, acc + 0.5 * len, 0.5 * (a + b));
            acc += len;
        }
        if !closed {
            push(&mut out, acc, verts[n - 1]);
        }
        out.length = acc;
        for k in 0..n {
            let kappa = if closed {
                turning(&verts[(k + n - 1) % n], &verts[k], &verts[(k + 1) % n])
            } else if k == 0 || k + 1 == n {
                0.0
            } else {
                turning(&verts[k - 1], &verts[k], &verts[k + 1])
            };
            out.corners[k] = 1.0 / (kappa / 2.0).cos();
            out.turn_prefix[k + 1] = out.turn_prefix[k] + kappa;
        }
        out
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    #[inline]
    fn pair2(&self, i: usize, j: usize) -> f64 {
        let dx = self.x[j] - self.x[i];
        let dy = self.y[j] - self.y[i];
        let dz = self.z[j] - self.z[i];
        let l = (self.s[j] - self.s[i]).abs();
        let d = if self.closed { l.min(self.length - l) } else { l };
        d * d / (dx * dx + dy * dy + dz * dz)
    }

    /// Turning of the vertices strictly between samples `i < j`.
    fn turning_between(&self, i: usize, j: usize) -> f64 {
        let lo = i / 2 + 1;
        let hi = j.div_ceil(2);
        if lo >= hi {
            0.0
        } else {
            self.turn_prefix[hi] - self.turn_prefix[lo]
        }
    }

    fn max_arc(&self, a1: f64, a2: f64, b1: f64, b2: f64) -> f64 {
        let lo = (b1 - a2).max(0.0);
        let hi = b2 - a1;
        if !self.closed {
            return hi;
        }
        let half = 0.5 * self.length;
        if hi <= half {
            hi
        } else if lo >= half {
            self.length - lo
        } else {
            half
        }
    }

    fn corner_max(&self) -> f64 {
        self.corners.iter().copied().fold(1.0, f64::max)
    }
}

struct Block {
    lo: usize,
    hi: usize,
    centre: Vec3,
    radius: f64,
}

/// Largest squared sample-pair ratio, searched over blocks of consecutive
/// samples with a sphere bound and a total-turning bound. Starts from the
/// `hot` pairs and stops as soon as the running maximum reaches `stop2`.
fn pruned_max2(sm: &Sampled, hot: &[(usize, usize)], stop2: f64) -> (f64, (usize, usize)) {
    let n = sm.len();
    let mut best = 0.0;
    let mut arg = (0, n - 1);
    for &(i, j) in hot {
        if j < n {
            let r = sm.pair2(i, j);
            if r > best {
                best = r;
                arg = (i, j);
            }
        }
    }
    if best >= stop2 {
        return (best, arg);
    }
    let blocks: Vec<Block> = (0..n.div_ceil(BLOCK))
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(n);
            let mut c = Vec3::zeros();
            for k in lo..hi {
                c += Vec3::new(sm.x[k], sm.y[k], sm.z[k]);
            }
            c /= (hi - lo) as f64;
            let radius = (lo..hi)
                .map(|k| (Vec3::new(sm.x[k], sm.y[k], sm.z[k]) - c).norm())
                .fold(0.0, f64::max);
            Block {
                lo,
                hi,
                centre: c,
                radius,
            }
        })
        .collect();
    let total_turn = sm.turn_prefix[sm.turn_prefix.len() - 1];
    for (b1, p) in blocks.iter().enumerate() {
        for q in &blocks[b1..] {
            // Turning bound along the arc spanned by the two blocks, and the
            // other way round on a closed curve.
            let mut k = sm.turning_between(p.lo, q.hi - 1);
            if sm.closed {
                k = k.min(total_turn - sm.turning_between(p.hi - 1, q.lo));
            }
            let turn_ub = if k < std::f64::consts::PI {
                1.0 / (k / 2.0).cos()
            } else {
                f64::INFINITY
            };
            let gap = (p.centre - q.centre).norm() - p.radius - q.radius;
            let sphere_ub = if gap > 0.0 {
                sm.max_arc(sm.s[p.lo], sm.s[p.hi - 1], sm.s[q.lo], sm.s[q.hi - 1]) / gap
            } else {
                f64::INFINITY
            };
            let ub = turn_ub.min(sphere_ub) * (1.0 + 1e-12);
            if ub * ub <= best {
                continue;
            }
            for i in p.lo..p.hi {
                for j in q.lo.max(i + 1)..q.hi {
                    let r = sm.pair2(i, j);
                    if r > best {
                        best = r;
                        arg = (i, j);
                    }
                }
            }
            if best >= stop2 {
                return (best, arg);
            }
        }
    }
    (best, arg)
}

/// Upper bounds on the exact maxima of every segment pair of a polygon,
/// kept current across single-vertex moves.
///
/// The bound for segments `i < j` is `base + drift * inv_dist`. Moving one
/// vertex leaves the chords of every pair not touching it unchanged and
/// shifts their arc distances by at most the length gained by the two
/// incident segments, so `drift` accumulates those gains and only the
/// touched pairs need fresh values.
#[derive(Clone, Debug)]
struct PairTable {
    nseg: usize,
    base: Vec<f64>,
    inv_dist: Vec<f64>,
    corners: Vec<f64>,
    drift: f64,
}

/// A candidate curve that passed evaluation, with what the table needs to
/// adopt it.
struct Evaluated {
    value: f64,
    arg: (usize, usize),
    /// `(pair index, value, inverse distance)` for each refreshed pair.
    pairs: Vec<(usize, f64, f64)>,
    corners: Vec<(usize, f64)>,
    drift: f64,
}

fn corner(curve: &PolyCurve, k: usize) -> f64 {
    let kappa = curve.turning_angle(k).unwrap_or(0.0);
    1.0 / (kappa / 2.0).cos()
}

fn pairs_adjacent(nseg: usize, closed: bool, i: usize, j: usize) -> bool {
    j <= i + 1 || (closed && i == 0 && j + 1 == nseg)
}

/// Cheap upper bound on the pair distortion of segments `i < j`, with the
/// inverse of their distance. The arc bound is the largest arc distance over
/// the pair and the chord bound is the exact segment distance.
fn cheap_bound(curve: &PolyCurve, i: usize, j: usize) -> (f64, f64) {
    let (a, b) = curve.segment(i);
    let (c, d) = curve.segment(j);
    let dist = segment_segment(&a, &b, &c, &d).0;
    let inv = 1.0 / dist;
    let span = curve.segment_start(j + 1) - curve.segment_start(i);
    let arc = if curve.is_closed() {
        let wrap = curve.total_length() - (curve.segment_start(j) - curve.segment_start(i + 1));
        span.min(wrap).min(0.5 * curve.total_length())
    } else {
        span
    };
    (arc * inv * (1.0 + UB_SLACK), inv)
}

/// Ratio at the segment midpoints, a lower bound for the pair.
fn midpoint_ratio(curve: &PolyCurve, i: usize, j: usize) -> f64 {
    let s = curve.segment_start(i) + 0.5 * curve.segment_length(i);
    let t = curve.segment_start(j) + 0.5 * curve.segment_length(j);
    let (a, b) = curve.segment(i);
    let (c, d) = curve.segment(j);
    let l = t - s;
    let arc = if curve.is_closed() { l.min(curve.total_length() - l) } else { l };
    arc / (0.5 * (a + b - c - d)).norm()
}

const UB_SLACK: f64 = 1e-12;

impl PairTable {
    /// Builds the table and the exact distortion of `curve`.
    fn build(curve: &PolyCurve) -> (Self, f64, (usize, usize)) {
        let nseg = curve.segment_count();
        let closed = curve.is_closed();
        let corners: Vec<f64> = (0..curve.len()).map(|k| corner(curve, k)).collect();
        let mut best = corners.iter().copied().fold(1.0, f64::max);
        let mut arg = (0, 0);
        let mut base = vec![0.0; nseg * nseg];
        let mut inv_dist = vec![0.0; nseg * nseg];
        for i in 0..nseg {
            for j in i + 2..nseg {
                if pairs_adjacent(nseg, closed, i, j) {
                    continue;
                }
                let (ub, inv) = cheap_bound(curve, i, j);
                base[i * nseg + j] = ub;
                inv_dist[i * nseg + j] = inv;
                if ub > best {
                    let lower = midpoint_ratio(curve, i, j);
                    if lower > best {
                        best = lower;
                        arg = (i, j);
                    }
                }
            }
        }
        let mut cands: Vec<(f64, usize)> = base
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b > best)
            .map(|(k, &b)| (b, k))
            .collect();
        cands.sort_unstable_by(|x, y| y.0.total_cmp(&x.0));
        for (ub, k) in cands {
            if ub <= best {
                break;
            }
            let (i, j) = (k / nseg, k % nseg);
            let v = full_segment_pair_max(curve, i, j);
            base[k] = v * (1.0 + UB_SLACK);
            if v > best {
                best = v;
                arg = (i, j);
            }
        }
        let table = PairTable {
            nseg,
            base,
            inv_dist,
            corners,
            drift: 0.0,
        };
        (table, best, arg)
    }

    /// Exact distortion of `next`, which is the current curve `cur` with
    /// vertex `v` moved, if it is below `threshold`.
    fn evaluate_move(
        &self,
        cur: &PolyCurve,
        next: &PolyCurve,
        v: usize,
        hot: &[(usize, usize)],
        threshold: f64,
    ) -> Option<Evaluated> {
        let nseg = self.nseg;
        let n = next.len();
        let closed = next.is_closed();
        let touched = [(v + nseg - 1) % nseg, v];
        let gain = touched
            .iter()
            .map(|&s| next.segment_length(s) - cur.segment_length(s))
            .sum::<f64>();
        let drift = self.drift + gain.max(0.0);

        let mut corners = Vec::with_capacity(3);
        let mut best: f64 = 1.0;
        let near = [(v + n - 1) % n, v, (v + 1) % n];
        for (k, &c) in self.corners.iter().enumerate() {
            best = best.max(if near.contains(&k) { corner(next, k) } else { c });
        }
        for &k in &near {
            corners.push((k, corner(next, k)));
        }
        if best >= threshold {
            return None;
        }
        let mut arg = (0, 0);

        // Fresh cheap bounds for pairs with a touched segment.
        let mut fresh: Vec<(usize, f64, f64)> = Vec::with_capacity(2 * nseg);
        for &s in &touched {
            for o in 0..nseg {
                let (i, j) = if o < s { (o, s) } else { (s, o) };
                if i == j || pairs_adjacent(nseg, closed, i, j) || (o == touched[0] && s == touched[1]) {
                    continue;
                }
                let (ub, inv) = cheap_bound(next, i, j);
                fresh.push((i * nseg + j, ub, inv));
            }
        }
        let is_touched = |i: usize| i == touched[0] || i == touched[1];

        for &(i, j) in hot {
            if i < j && j < nseg && !pairs_adjacent(nseg, closed, i, j) {
                let r = full_segment_pair_max(next, i, j);
                if r > best {
                    best = r;
                    arg = (i, j);
                }
            }
        }
        if best >= threshold {
            return None;
        }

        let mut cands: Vec<(f64, usize, f64)> = fresh
            .iter()
            .filter(|&&(_, ub, _)| ub > best)
            .map(|&(k, ub, inv)| (ub, k, inv))
            .collect();
        for i in 0..nseg {
            if is_touched(i) {
                continue;
            }
            let row = i * nseg;
            for j in i + 2..nseg {
                let k = row + j;
                let bound = self.base[k] + drift * self.inv_dist[k];
                if bound > best && !is_touched(j) && self.inv_dist[k] > 0.0 {
                    cands.push((bound, k, self.inv_dist[k]));
                }
            }
        }
        cands.sort_unstable_by(|x, y| y.0.total_cmp(&x.0));

        let mut pairs: Vec<(usize, f64, f64)> = fresh;
        for (ub, k, inv) in cands {
            if ub <= best {
                break;
            }
            let (i, j) = (k / nseg, k % nseg);
            let r = full_segment_pair_max(next, i, j);
            if r >= threshold {
                return None;
            }
            pairs.push((k, r * (1.0 + UB_SLACK), inv));
            if r > best {
                best = r;
                arg = (i, j);
            }
        }
        (best < threshold).then_some(Evaluated {
            value: best,
            arg,
            pairs,
            corners,
            drift,
        })
    }

    fn adopt(&mut self, e: &Evaluated) {
        self.drift = e.drift;
        for &(k, value, inv) in &e.pairs {
            self.base[k] = value - self.drift * inv;
            self.inv_dist[k] = inv;
        }
        for &(k, c) in &e.corners {
            self.corners[k] = c;
        }
    }
}

/// Exact distortion of a polygon: the largest exact segment-pair maximum
/// over non-adjacent segments, together with the corner limits.
pub fn polygon_distortion(curve: &PolyCurve) -> f64 {
    PairTable::build(curve).1
}

/// Sampled distortion over all vertices and segment midpoints, including
/// the corner limits `sec(κ/2)`.
pub fn objective(curve: &PolyCurve) -> Result<f64> {
    if !curve.is_simple_default() {
        return Err(Error::NotSimple("objective needs a simple curve".into()));
    }
    let sm = Sampled::new(curve.vertices(), curve.is_closed());
    let (best2, _) = pruned_max2(&sm, &[], f64::INFINITY);
    Ok(best2.sqrt().max(sm.corner_max()).max(1.0))
}

// ---------------------------------------------------------------------------
// Moves

/// Vertices the chain may move.
pub fn movable_range(curve: &PolyCurve) -> Range<usize> {
    if curve.is_closed() {
        0..curve.len()
    } else {
        2..curve.len().saturating_sub(2)
    }
}

/// A uniformly chosen movable vertex and an isotropic Gaussian displacement
/// with standard deviation `step_scale * (mean incident edge length) *
/// temp_fraction`.
pub fn propose_move<R: Rng>(
    curve: &PolyCurve,
    rng: &mut R,
    step_scale: f64,
    temp_fraction: f64,
) -> (usize, Vec3) {
    let range = movable_range(curve);
    let v = rng.gen_range(range);
    let n = curve.len();
    let here = curve.vertex(v);
    let mut total = 0.0;
    let mut count = 0.0;
    if v > 0 || curve.is_closed() {
        total += (here - curve.vertex((v + n - 1) % n)).norm();
        count += 1.0;
    }
    if v + 1 < n || curve.is_closed() {
        total += (curve.vertex((v + 1) % n) - here).norm();
        count += 1.0;
    }
    let sigma = step_scale * total / count * temp_fraction;
    let g = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    (v, here + g * sigma)
}

/// Rays continuing the straight ends of an open curve far past its extent.
pub fn end_rays(curve: &PolyCurve) -> Vec<(Vec3, Vec3)> {
    if curve.is_closed() {
        return Vec::new();
    }
    let n = curve.len();
    let far = 1e3 * curve.total_length();
    let a = curve.vertex(0);
    let b = curve.vertex(n - 1);
    let da = (a - curve.vertex(1)).normalize();
    let db = (b - curve.vertex(n - 2)).normalize();
    vec![(a, a + da * far), (b, b + db * far)]
}

/// Equal-arclength resampling to `n` vertices, carried out as a sequence of
/// elementary moves on the polygon. Returns the input unchanged if any move
/// fails the isotopy test or the curve is open.
pub fn resample_step(curve: &PolyCurve, n: usize) -> PolyCurve {
    try_resample(curve, n).unwrap_or_else(|| curve.clone())
}

fn try_resample(curve: &PolyCurve, n: usize) -> Option<PolyCurve> {
    if !curve.is_closed() || n < 3 {
        return None;
    }
    let length = curve.total_length();
    let clearance = DEFAULT_CLEARANCE * length;
    let snap = 1e-12 * length;
    // Insert the targets into the polygon, which leaves its geometry alone,
    // then flatten every old vertex onto the chord of its neighbours.
    let mut merged: Vec<(f64, Vec3, bool)> = (0..n)
        .map(|k| {
            let s = length * k as f64 / n as f64;
            curve.position_at(s).map(|p| (s, p, true))
        })
        .collect::<Result<_>>()
        .ok()?;
    for (i, p) in curve.vertices().iter().enumerate() {
        let s = curve.segment_start(i);
        let k = (s / length * n as f64).round() as usize;
        let near_target = (s - length * k as f64 / n as f64).abs() <= snap
            || (k == n && (length - s) <= snap);
        if !near_target {
            merged.push((s, *p, false));
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut keep: Vec<bool> = merged.iter().map(|m| m.2).collect();
    let mut cur = PolyCurve::new(merged.iter().map(|m| m.1).collect(), true).ok()?;
    while let Some(k) = keep.iter().position(|&t| !t) {
        let m = cur.len();
        let target = 0.5 * (cur.vertex((k + m - 1) % m) + cur.vertex((k + 1) % m));
        if !isotopy_safe_move_with(&cur, k, target, clearance, &[]) {
            return None;
        }
        let mut v = cur.vertices().to_vec();
        v.remove(k);
        keep.remove(k);
        cur = PolyCurve::new(v, true).ok()?;
    }
    cur.is_simple_default().then_some(cur)
}

// ---------------------------------------------------------------------------
// Annealing

struct Chain {
    curve: PolyCurve,
    value: f64,
    table: PairTable,
    hot: Vec<(usize, usize)>,
    obstacles: Vec<(Vec3, Vec3)>,
    since_rebuild: usize,
}

impl Chain {
    fn new(curve: PolyCurve) -> Self {
        let (table, value, arg) = PairTable::build(&curve);
        let obstacles = end_rays(&curve);
        Chain {
            curve,
            value,
            table,
            hot: vec![arg],
            obstacles,
            since_rebuild: 0,
        }
    }

    fn note_hot(&mut self, arg: (usize, usize)) {
        self.hot.retain(|&p| p != arg);
        self.hot.insert(0, arg);
        self.hot.truncate(HOT_PAIRS);
    }

    /// Rebuilds the pair table so accumulated drift does not loosen it.
    fn rebuild(&mut self) {
        let (table, value, arg) = PairTable::build(&self.curve);
        self.table = table;
        self.value = value;
        self.note_hot(arg);
        self.since_rebuild = 0;
    }

    /// One Metropolis step; returns whether the move was accepted.
    fn step(&mut self, rng: &mut ChaCha8Rng, step_scale: f64, temp: f64, temp_fraction: f64) -> bool {
        let (v, pos) = propose_move(&self.curve, rng, step_scale, temp_fraction);
        let u: f64 = rng.gen();
        let threshold = if temp > 0.0 {
            self.value - temp * u.max(f64::MIN_POSITIVE).ln()
        } else {
            self.value
        };
        let mut verts = self.curve.vertices().to_vec();
        verts[v] = pos;
        let Ok(next) = PolyCurve::new(verts, self.curve.is_closed()) else {
            return false;
        };
        let Some(eval) = self.table.evaluate_move(&self.curve, &next, v, &self.hot, threshold) else {
            return false;
        };
        let clearance = DEFAULT_CLEARANCE * self.curve.total_length();
        if !isotopy_safe_move_with(&self.curve, v, pos, clearance, &self.obstacles) {
            return false;
        }
        self.table.adopt(&eval);
        self.curve = next;
        self.value = eval.value;
        self.note_hot(eval.arg);
        self.since_rebuild += 1;
        if self.since_rebuild >= self.table.nseg {
            self.rebuild();
        }
        true
    }

    /// Resamples under the same acceptance rule as a move.
    fn resample(&mut self, rng: &mut ChaCha8Rng, temp: f64) -> bool {
        let u: f64 = rng.gen();
        if !self.curve.is_closed() {
            return false;
        }
        let Some(next) = try_resample(&self.curve, self.curve.len()) else {
            return false;
        };
        let threshold = if temp > 0.0 {
            self.value - temp * u.max(f64::MIN_POSITIVE).ln()
        } else {
            // Allow a tie so a greedy chain can still resample.
            self.value * (1.0 + 1e-15) + f64::MIN_POSITIVE
        };
        let (table, value, arg) = PairTable::build(&next);
        if value >= threshold {
            return false;
        }
        self.curve = next;
        self.table = table;
        self.value = value;
        self.note_hot(arg);
        self.since_rebuild = 0;
        true
    }
}


/// Anneals `curve` and reports every epoch to `on_epoch` together with the
/// current curve and its certified result on certification epochs.
pub fn minimize_distortion_with(
    curve: &PolyCurve,
    config: &AnnealConfig,
    mut on_epoch: impl FnMut(&EpochRecord, &PolyCurve, Option<&DistortionResult>),
) -> Result<OptimizeTrace> {
    config.validate()?;
    if let Some((i, j)) = curve.first_intersection(DEFAULT_CLEARANCE * curve.total_length()) {
        return Err(Error::NotSimple(format!("segments {i} and {j} intersect")));
    }
    if movable_range(curve).is_empty() {
        return Err(Error::InvalidCurve("curve has no movable vertices".into()));
    }
    let initial = distortion_certified(curve, config.certify_tol)?;
    let mut best = initial.clone();
    let mut best_curve = curve.clone();

    let mut chain = Chain::new(curve.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t0 = config.initial_temp.unwrap_or(1e-5 * chain.value);
    let steps = config.steps_per_epoch.unwrap_or(50 * curve.len());

    let mut records = Vec::with_capacity(config.epochs);
    let (mut accepted_total, mut proposed_total) = (0, 0);
    for epoch in 0..config.epochs {
        let temp = t0 * config.cooling.powi(epoch as i32);
        let frac = if t0 > 0.0 { temp / t0 } else { 1.0 };
        let mut accepted = 0;
        for _ in 0..steps {
            if chain.step(&mut rng, config.step_scale, temp, frac) {
                accepted += 1;
            }
        }
        accepted_total += accepted;
        proposed_total += steps;

        let resampled = (epoch + 1) % config.resample_every == 0 && chain.resample(&mut rng, temp);

        let last = epoch + 1 == config.epochs;
        let certified = if (epoch + 1) % config.certify_every == 0 || last {
            let r = distortion_certified(&chain.curve, config.certify_tol)?;
            if r.upper < best.upper {
                best = r.clone();
                best_curve = chain.curve.clone();
            }
            Some(r)
        } else {
            None
        };
        let record = EpochRecord {
            epoch,
            temperature: temp,
            objective: chain.value,
            acceptance_rate: accepted as f64 / steps as f64,
            certified: certified.as_ref().map(|r| r.upper),
            best_certified: best.upper,
            resampled,
        };
        on_epoch(&record, &chain.curve, certified.as_ref());
        records.push(record);
    }

    Ok(OptimizeTrace {
        records,
        initial,
        best,
        final_curve: best_curve,
        accepted_moves: accepted_total,
        proposed_moves: proposed_total,
    })
}

pub fn minimize_distortion(curve: &PolyCurve, config: &AnnealConfig) -> Result<OptimizeTrace> {
    minimize_distortion_with(curve, config, |_, _, _| {})
}
