//! Brute-force oracles and grid sweeps for the inequalities behind the
//! distortion bounds.
//!
//! [`shortest_path_outside_ball`] approximates `m(r, s, θ)` from above by a
//! shortest-path search over a geodesic sphere grid. [`verify_suite`] checks
//! one family of inequalities over a grid (or a seeded random sample) and
//! reports the smallest slack found.

use crate::bounds::{m, m1, theta0};
use crate::geometry::segment::point_segment;
use crate::{Error, PolyCurve, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt;
use std::str::FromStr;

/// A suite passes when its worst margin is at least `-PASS_TOL`.
pub const PASS_TOL: f64 = 1e-9;

/// Strict inequalities must hold with this much room to spare.
const STRICT_GAP: f64 = 2e-9;

/// Relative agreement required of the two sides of an identity.
const IDENTITY_TOL: f64 = 1e-12;

/// Radii this far below 1 still count as on the sphere.
const RADIUS_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Sphere grid

/// Hops of the lattice neighbourhood joined to each node by direct arcs.
const RING: usize = 4;

/// Central angle of an icosahedron edge.
const ICOSA_EDGE_ANGLE: f64 = 1.107_148_717_794_090_4;

/// A node written as an integer combination of icosahedron vertices, with
/// zero weights dropped and the weights reduced by their gcd, so the same
/// point gets the same key from every face and every level.
type NodeKey = [(u8, u32); 3];

#[derive(Clone, Debug)]
struct Level {
    freq: usize,
    members: Vec<u32>,
    /// Global node index to position in `members`, `u32::MAX` if absent.
    local: Vec<u32>,
    offsets: Vec<u32>,
    neighbours: Vec<u32>,
}

/// Geodesic grid on the unit sphere: every level of a repeatedly halved
/// subdivided icosahedron, the finest at `resolution`.
///
/// A level of frequency `k` splits every icosahedron edge into `k` pieces.
/// The grid keeps the levels `resolution`, `resolution / 2`, ... down to the
/// first odd frequency. Nodes shared between levels are the same points, so
/// the graph at resolution `2k` contains the graph at resolution `k`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    resolution: usize,
    nodes: Vec<Vec3>,
    /// Bit `l` is set when the node belongs to `levels[l]`.
    node_levels: Vec<u16>,
    levels: Vec<Level>,
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts = Vec::with_capacity(12);
    for &a in &[-1.0, 1.0] {
        for &b in &[-phi, phi] {
            verts.push(Vec3::new(0.0, a, b));
            verts.push(Vec3::new(a, b, 0.0));
            verts.push(Vec3::new(b, 0.0, a));
        }
    }
    let verts: Vec<Vec3> = verts.into_iter().map(|v| v.normalize()).collect();
    let edge2 = 4.0 / (phi * phi + 1.0) * 1.000_001;
    let near = |i: usize, j: usize| (verts[i] - verts[j]).norm_squared() < edge2;
    let mut faces = Vec::with_capacity(20);
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if near(i, j) && near(j, k) && near(i, k) {
                    faces.push([i, j, k]);
                }
            }
        }
    }
    (verts, faces)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn node_key(face: &[usize; 3], weights: [u32; 3]) -> NodeKey {
    let g = weights.iter().fold(0, |g, &w| gcd(g, w));
    let mut key = [(u8::MAX, 0); 3];
    for (slot, (&v, &w)) in key.iter_mut().zip(face.iter().zip(&weights)) {
        if w > 0 {
            *slot = (v as u8, w / g);
        }
    }
    key.sort_unstable();
    key
}

fn key_position(key: &NodeKey, verts: &[Vec3]) -> Vec3 {
    let mut p = Vec3::zeros();
    for &(v, w) in key.iter().filter(|e| e.0 != u8::MAX) {
        p += verts[v as usize] * w as f64;
    }
    p.normalize()
}

/// Great-circle distance between unit vectors.
fn arc(p: &Vec3, q: &Vec3) -> f64 {
    2.0 * ((p - q).norm() / 2.0).min(1.0).asin()
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 || resolution > 4096 {
            return Err(Error::Domain(format!(
                "resolution {resolution} must lie in [1, 4096]"
            )));
        }
        let (verts, faces) = icosahedron();
        let mut freqs = vec![resolution];
        while freqs[freqs.len() - 1] % 2 == 0 {
            let f = freqs[freqs.len() - 1] / 2;
            freqs.push(f);
        }
        let mut index: HashMap<NodeKey, u32> = HashMap::new();
        let mut nodes = Vec::new();
        let mut node_levels: Vec<u16> = Vec::new();
        let mut level_edges = Vec::with_capacity(freqs.len());
        for (l, &k) in freqs.iter().enumerate() {
            let k32 = k as u32;
            let mut edges: Vec<(u32, u32)> = Vec::new();
            for face in &faces {
                let mut id = |i: u32, j: u32| -> u32 {
                    let key = node_key(face, [k32 - i - j, i, j]);
                    let n = *index.entry(key).or_insert_with(|| {
                        nodes.push(key_position(&key, &verts));
                        node_levels.push(0);
                        (nodes.len() - 1) as u32
                    });
                    node_levels[n as usize] |= 1 << l;
                    n
                };
                for i in 0..=k32 {
                    for j in 0..=k32 - i {
                        let here = id(i, j);
                        if i + j < k32 {
                            let right = id(i + 1, j);
                            let up = id(i, j + 1);
                            edges.extend([(here, right), (here, up), (right, up)]);
                        }
                    }
                }
            }
            level_edges.push(edges);
        }
        let levels = freqs
            .iter()
            .zip(level_edges)
            .enumerate()
            .map(|(l, (&freq, edges))| {
                let members: Vec<u32> = (0..nodes.len() as u32)
                    .filter(|&n| node_levels[n as usize] & (1 << l) != 0)
                    .collect();
                let mut local = vec![u32::MAX; nodes.len()];
                for (i, &n) in members.iter().enumerate() {
                    local[n as usize] = i as u32;
                }
                let mut adj: Vec<Vec<u32>> = vec![Vec::new(); members.len()];
                for (a, b) in edges {
                    adj[local[a as usize] as usize].push(local[b as usize]);
                    adj[local[b as usize] as usize].push(local[a as usize]);
                }
                let mut offsets = Vec::with_capacity(members.len() + 1);
                let mut neighbours = Vec::new();
                offsets.push(0);
                for mut list in adj {
                    list.sort_unstable();
                    list.dedup();
                    neighbours.extend(list);
                    offsets.push(neighbours.len() as u32);
                }
                Level {
                    freq,
                    members,
                    local,
                    offsets,
                    neighbours,
                }
            })
            .collect();
        Ok(SphereGrid {
            resolution,
            nodes,
            node_levels,
            levels,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    /// Angular radius around an off-grid sphere point within which it is
    /// joined to the nodes of a level.
    fn attach_radius(freq: usize) -> f64 {
        (RING as f64 + 1.0) * ICOSA_EDGE_ANGLE / freq as f64
    }

    /// Nodes of each level near the unit vector `p`, with their arc lengths.
    fn attach(&self, p: &Vec3) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        for level in &self.levels {
            let rho = Self::attach_radius(level.freq);
            let cos_rho = rho.min(PI).cos();
            for &n in &level.members {
                let q = &self.nodes[n as usize];
                if q.dot(p) >= cos_rho {
                    out.push((n, arc(p, q)));
                }
            }
        }
        out
    }

    /// Length of the shortest path from `a` to `b` in the grid graph, which
    /// is the length of an actual path avoiding the open unit ball.
    pub fn shortest_path(&self, a: &Vec3, b: &Vec3) -> Result<f64> {
        for (name, p) in [("a", a), ("b", b)] {
            if !(p.norm() >= 1.0 - RADIUS_TOL) || !p.iter().all(|c| c.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} = ({}, {}, {}) lies inside the unit ball",
                    p.x, p.y, p.z
                )));
            }
        }
        let n = self.nodes.len();
        let (ia, ia_hat, ib_hat, ib) = (n as u32, n as u32 + 1, n as u32 + 2, n as u32 + 3);
        let a_hat = a.normalize();
        let b_hat = b.normalize();
        let (ra, rb) = (a.norm().max(1.0), b.norm().max(1.0));

        // Edges into `b` and `b_hat` from grid nodes.
        let mut to_b = vec![f64::INFINITY; n];
        let mut to_b_hat = vec![f64::INFINITY; n];
        for (k, p) in self.nodes.iter().enumerate() {
            if b.dot(p) >= 1.0 {
                to_b[k] = (b - p).norm();
            }
        }
        for (k, w) in self.attach(&b_hat) {
            to_b_hat[k as usize] = to_b_hat[k as usize].min(w);
        }

        let mut dist = vec![f64::INFINITY; n + 4];
        let mut done = vec![false; n + 4];
        let mut stamps: Vec<Vec<u32>> =
            self.levels.iter().map(|l| vec![0; l.members.len()]).collect();
        let mut stamp = 0u32;
        let mut heap = BinaryHeap::new();
        let mut frontier: Vec<u32> = Vec::new();
        let mut next: Vec<u32> = Vec::new();

        let relax = |dist: &mut Vec<f64>, heap: &mut BinaryHeap<Entry>, v: u32, d: f64| {
            if d < dist[v as usize] {
                dist[v as usize] = d;
                heap.push(Entry(d, v));
            }
        };

        dist[ia as usize] = 0.0;
        heap.push(Entry(0.0, ia));
        while let Some(Entry(d, u)) = heap.pop() {
            if done[u as usize] || d > dist[u as usize] {
                continue;
            }
            done[u as usize] = true;
            if u == ib {
                return Ok(d);
            }
            if u == ia {
                relax(&mut dist, &mut heap, ia_hat, d + (ra - 1.0).max(0.0));
                for (k, p) in self.nodes.iter().enumerate() {
                    if a.dot(p) >= 1.0 {
                        relax(&mut dist, &mut heap, k as u32, d + (a - p).norm());
                    }
                }
                if point_segment(&Vec3::zeros(), a, b).0 >= 1.0 {
                    relax(&mut dist, &mut heap, ib, d + (b - a).norm());
                }
                if a.dot(&b_hat) >= 1.0 {
                    relax(&mut dist, &mut heap, ib_hat, d + (a - b_hat).norm());
                }
            } else if u == ia_hat {
                for (k, w) in self.attach(&a_hat) {
                    relax(&mut dist, &mut heap, k, d + w);
                }
                relax(&mut dist, &mut heap, ib_hat, d + arc(&a_hat, &b_hat));
                if b.dot(&a_hat) >= 1.0 {
                    relax(&mut dist, &mut heap, ib, d + (b - a_hat).norm());
                }
            } else if u == ib_hat {
                relax(&mut dist, &mut heap, ib, d + (rb - 1.0).max(0.0));
            } else {
                let k = u as usize;
                relax(&mut dist, &mut heap, ib, d + to_b[k]);
                relax(&mut dist, &mut heap, ib_hat, d + to_b_hat[k]);
                let p = self.nodes[k];
                for (l, level) in self.levels.iter().enumerate() {
                    if self.node_levels[k] & (1 << l) == 0 {
                        continue;
                    }
                    stamp += 1;
                    let seen = &mut stamps[l];
                    let start = level.local[k];
                    seen[start as usize] = stamp;
                    frontier.clear();
                    frontier.push(start);
                    for _ in 0..RING {
                        next.clear();
                        for &x in &frontier {
                            let (lo, hi) =
                                (level.offsets[x as usize], level.offsets[x as usize + 1]);
                            for &y in &level.neighbours[lo as usize..hi as usize] {
                                if seen[y as usize] != stamp {
                                    seen[y as usize] = stamp;
                                    next.push(y);
                                    let g = level.members[y as usize];
                                    let w = arc(&p, &self.nodes[g as usize]);
                                    relax(&mut dist, &mut heap, g, d + w);
                                }
                            }
                        }
                        std::mem::swap(&mut frontier, &mut next);
                    }
                }
            }
        }
        Err(Error::Domain("no path found".into()))
    }
}

/// Shortest length of a path from `a` to `b` outside the open unit ball,
/// approximated from above on a geodesic grid of the given resolution.
pub fn shortest_path_outside_ball(a: &Vec3, b: &Vec3, resolution: usize) -> Result<f64> {
    SphereGrid::new(resolution)?.shortest_path(a, b)
}

// ---------------------------------------------------------------------------
// Random arcs

fn clears_ball(p: &Vec3, q: &Vec3) -> bool {
    point_segment(&Vec3::zeros(), p, q).0 >= 1.0
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Random open polygon that stays outside the open unit ball, with at least
/// `steps` segments.
///
/// The arc starts as a polygonal version of a shortest path between two
/// random endpoints at radii in `[1, 4]`, circumscribed about the unit
/// circle where it wraps, and its interior vertices are then jittered at a
/// random scale between `1e-6` and `1` of the local edge length, keeping
/// every segment clear of the ball.
pub fn random_arc_outside_ball(seed: u64, steps: usize) -> Result<PolyCurve> {
    if steps < 2 {
        return Err(Error::Domain(format!("steps = {steps} must be >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Radii nudged outward so the tangent segments clear the ball in floating
    // point as well.
    let lift = 1.0 + 1e-12;
    let r: f64 = rng.gen_range(1.0..=4.0);
    let s: f64 = rng.gen_range(1.0..=4.0);
    let theta: f64 = rng.gen_range(0.0..=PI);
    let u = random_unit(&mut rng);
    let w = {
        let v = random_unit(&mut rng);
        let v = v - u * u.dot(&v);
        if v.norm() > 1e-6 {
            v.normalize()
        } else {
            u.cross(&Vec3::x()).try_normalize(1e-9).unwrap_or_else(|| u.cross(&Vec3::y()).normalize())
        }
    };
    let at = |radius: f64, phi: f64| (u * phi.cos() + w * phi.sin()) * radius;
    let a = at(r * lift, 0.0);
    let b = at(s * lift, theta);

    let mut verts = vec![a];
    if theta <= theta0(r, s)? {
        for k in 1..steps {
            verts.push(a + (b - a) * (k as f64 / steps as f64));
        }
    } else {
        let a1 = (1.0 / r).acos();
        let a2 = theta - (1.0 / s).acos();
        let span = a2 - a1;
        let pieces = (steps - 1).max((span / (2.0 * FRAC_PI_3)).ceil() as usize);
        let delta = span / pieces as f64;
        let radius = lift / (delta / 2.0).cos();
        for i in 0..pieces {
            verts.push(at(radius, a1 + (i as f64 + 0.5) * delta));
        }
    }
    verts.push(b);

    let scale = 10f64.powf(rng.gen_range(-6.0..=0.0));
    for k in 1..verts.len() - 1 {
        let local = 0.5 * ((verts[k] - verts[k - 1]).norm() + (verts[k + 1] - verts[k]).norm());
        let mut eps = scale;
        for _ in 0..8 {
            let cand = verts[k] + random_unit(&mut rng) * (eps * local * rng.gen::<f64>());
            if clears_ball(&verts[k - 1], &cand)
                && clears_ball(&cand, &verts[k + 1])
                && cand != verts[k - 1]
                && cand != verts[k + 1]
            {
                verts[k] = cand;
                break;
            }
            eps *= 0.5;
        }
    }
    PolyCurve::new(verts, false)
}

// ---------------------------------------------------------------------------
// Verification suites

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MOracle,
    LemmaMinArcs,
    Prop3LargeBeta,
    Prop3SmallBeta,
    Prop3Constant,
    Thm5AngleMax,
    Thm5ThetaLarge,
    Thm5ThetaSmall,
    RemarkQuarter,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::MOracle,
        Suite::LemmaMinArcs,
        Suite::Prop3LargeBeta,
        Suite::Prop3SmallBeta,
        Suite::Prop3Constant,
        Suite::Thm5AngleMax,
        Suite::Thm5ThetaLarge,
        Suite::Thm5ThetaSmall,
        Suite::RemarkQuarter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MOracle => "m-oracle",
            Suite::LemmaMinArcs => "lemma-min-arcs",
            Suite::Prop3LargeBeta => "prop3-large-beta",
            Suite::Prop3SmallBeta => "prop3-small-beta",
            Suite::Prop3Constant => "prop3-constant",
            Suite::Thm5AngleMax => "thm5-angle-max",
            Suite::Thm5ThetaLarge => "thm5-theta-large",
            Suite::Thm5ThetaSmall => "thm5-theta-small",
            Suite::RemarkQuarter => "remark-quarter",
        }
    }

    /// Default density: the sphere resolution for `m-oracle`, the number of
    /// arcs for `lemma-min-arcs`, and the total number of grid points per
    /// inequality otherwise.
    pub fn default_density(self) -> usize {
        match self {
            Suite::MOracle => 128,
            Suite::LemmaMinArcs => 200,
            Suite::Thm5AngleMax | Suite::Thm5ThetaSmall => 1_000_000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub grid_spec: String,
    /// Smallest slack `lhs - rhs` found; negative means a violation.
    pub worst_margin: f64,
    /// Named parameters of the worst point.
    pub worst_point: Vec<(String, f64)>,
    pub passed: bool,
}

/// One grid axis; `open_lo` leaves out the lower end.
#[derive(Clone, Copy, Debug)]
struct Axis {
    name: &'static str,
    lo: f64,
    hi: f64,
    open_lo: bool,
}

fn axis(name: &'static str, lo: f64, hi: f64) -> Axis {
    Axis {
        name,
        lo,
        hi,
        open_lo: false,
    }
}

fn open_axis(name: &'static str, lo: f64, hi: f64) -> Axis {
    Axis {
        name,
        lo,
        hi,
        open_lo: true,
    }
}

impl Axis {
    fn point(&self, k: usize, n: usize) -> f64 {
        if self.open_lo {
            self.lo + (self.hi - self.lo) * (k + 1) as f64 / n as f64
        } else if n == 1 {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64
        }
    }

    fn cell(&self, n: usize) -> f64 {
        (self.hi - self.lo) / (n.max(2) - 1) as f64
    }
}

/// Worst margin of one inequality and where it occurs.
#[derive(Clone, Debug)]
struct Check {
    label: &'static str,
    margin: f64,
    point: Vec<(String, f64)>,
}

fn per_axis(density: usize, dims: usize) -> usize {
    ((density as f64).powf(1.0 / dims as f64).round() as usize).max(2)
}

fn grid_min(axes: &[Axis], n: usize, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> (f64, Vec<f64>) {
    let total = n.pow(axes.len() as u32);
    let decode = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; axes.len()];
        for (d, ax) in axes.iter().enumerate().rev() {
            x[d] = ax.point(idx % n, n);
            idx /= n;
        }
        x
    };
    let (margin, idx) = (0..total)
        .into_par_iter()
        .map(|i| {
            let m = f(&decode(i));
            (if m.is_nan() { f64::NEG_INFINITY } else { m }, i)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |x, y| match x.0.total_cmp(&y.0) {
                Ordering::Less => x,
                Ordering::Greater => y,
                Ordering::Equal => {
                    if x.1 <= y.1 {
                        x
                    } else {
                        y
                    }
                }
            },
        );
    (margin, decode(idx.min(total - 1)))
}

/// Sweeps the grid, then sweeps a grid of the same size over one cell around
/// the worst point, and keeps the smaller margin.
fn sweep(
    label: &'static str,
    axes: &[Axis],
    density: usize,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Check {
    let n = per_axis(density, axes.len());
    let (mut margin, mut point) = grid_min(axes, n, f);
    let local: Vec<Axis> = axes
        .iter()
        .zip(&point)
        .map(|(ax, &x)| {
            let h = ax.cell(n);
            Axis {
                lo: (x - h).max(ax.lo),
                hi: (x + h).min(ax.hi),
                open_lo: ax.open_lo && x - h <= ax.lo,
                ..*ax
            }
        })
        .collect();
    let (m2, p2) = grid_min(&local, n, f);
    if m2 < margin {
        margin = m2;
        point = p2;
    }
    Check {
        label,
        margin,
        point: axes
            .iter()
            .zip(point)
            .map(|(ax, x)| (ax.name.to_string(), x))
            .collect(),
    }
}

fn value(e: Result<crate::bounds::BoundEval>) -> f64 {
    e.map(|b| b.value).unwrap_or(f64::NAN)
}

fn m1v(s: f64, theta: f64) -> f64 {
    value(m1(s, theta))
}

/// Slack of an identity `lhs = rhs`, which is taken to hold when the two
/// sides agree to `IDENTITY_TOL` relative.
fn identity(lhs: f64, rhs: f64) -> f64 {
    IDENTITY_TOL * rhs.abs().max(1.0) - (lhs - rhs).abs()
}

/// Slack of a strict inequality `lhs > rhs`.
fn strict(lhs: f64, rhs: f64) -> f64 {
    lhs - rhs - STRICT_GAP
}

/// Subadditivity of `m1(2, ·)`: splitting the angle `π - 2β` into `α` and
/// `γ` never lowers the total.
fn concavity_check(label: &'static str, beta: Axis, density: usize) -> Check {
    sweep(
        label,
        &[beta, axis("alpha_fraction", 0.0, 1.0)],
        density,
        &|x| {
            let total = PI - 2.0 * x[0];
            let alpha = x[1] * total;
            m1v(2.0, alpha) + m1v(2.0, total - alpha) - m1v(2.0, total)
        },
    )
}

fn m_oracle(resolution: usize) -> Result<Vec<Check>> {
    let grid = SphereGrid::new(resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut triples: Vec<[f64; 3]> = (0..50)
        .map(|_| {
            [
                rng.gen_range(1.0..=4.0),
                rng.gen_range(1.0..=4.0),
                rng.gen_range(0.0..=PI),
            ]
        })
        .collect();
    let eval = |t: &[f64; 3]| -> Result<(f64, f64)> {
        let [r, s, theta] = *t;
        let a = Vec3::new(r, 0.0, 0.0);
        let b = Vec3::new(s * theta.cos(), s * theta.sin(), 0.0);
        let path = grid.shortest_path(&a, &b)?;
        let exact = m(r, s, theta)?.value;
        let gap = (path - exact) / exact;
        Ok((gap, 0.01 - gap))
    };
    let mut results: Vec<([f64; 3], (f64, f64))> = triples
        .par_iter()
        .map(|t| eval(t).map(|g| (*t, g)))
        .collect::<Result<_>>()?;
    let worst = *results
        .iter()
        .min_by(|x, y| x.1 .0.min(x.1 .1).total_cmp(&y.1 .0.min(y.1 .1)))
        .unwrap();
    // Refinement: jittered copies of the worst triple.
    let mut refine = ChaCha8Rng::seed_from_u64(1);
    let extra: Vec<[f64; 3]> = (0..8)
        .map(|_| {
            let [r, s, theta] = worst.0;
            [
                (r + refine.gen_range(-0.05..=0.05)).clamp(1.0, 4.0),
                (s + refine.gen_range(-0.05..=0.05)).clamp(1.0, 4.0),
                (theta + refine.gen_range(-0.05..=0.05)).clamp(0.0, PI),
            ]
        })
        .collect();
    for t in &extra {
        results.push((*t, eval(t)?));
    }
    triples.extend(extra);
    let pick = |lower: bool| {
        let (t, g) = results
            .iter()
            .min_by(|x, y| {
                let (a, b) = if lower { (x.1 .0, y.1 .0) } else { (x.1 .1, y.1 .1) };
                a.total_cmp(&b)
            })
            .unwrap();
        (if lower { g.0 } else { g.1 }, *t)
    };
    let named = |t: [f64; 3]| {
        vec![
            ("r".to_string(), t[0]),
            ("s".to_string(), t[1]),
            ("theta".to_string(), t[2]),
        ]
    };
    let (lo, tl) = pick(true);
    let (hi, th) = pick(false);
    Ok(vec![
        Check {
            label: "path >= m",
            margin: lo,
            point: named(tl),
        },
        Check {
            label: "path <= 1.01 m",
            margin: hi,
            point: named(th),
        },
    ])
}

fn lemma_min_arcs(count: usize) -> Result<Vec<Check>> {
    let margins: Vec<(f64, u64, f64, f64, f64)> = (0..count as u64)
        .into_par_iter()
        .map(|seed| {
            let arc = random_arc_outside_ball(seed, 2 + (seed % 30) as usize)?;
            let v = arc.vertices();
            let (a, b) = (v[0], v[v.len() - 1]);
            let theta = a.cross(&b).norm().atan2(a.dot(&b));
            let bound = m1(b.norm(), theta)?.value;
            Ok((arc.total_length() - bound, seed, a.norm(), b.norm(), theta))
        })
        .collect::<Result<_>>()?;
    let worst = margins
        .iter()
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        .copied()
        .unwrap_or((f64::INFINITY, 0, 0.0, 0.0, 0.0));
    Ok(vec![Check {
        label: "length >= m1(|b|, angle)",
        margin: worst.0,
        point: vec![
            ("seed".to_string(), worst.1 as f64),
            ("|a|".to_string(), worst.2),
            ("|b|".to_string(), worst.3),
            ("theta".to_string(), worst.4),
        ],
    }])
}

fn suite_checks(suite: Suite, density: usize) -> Result<(String, Vec<Check>)> {
    let d = density;
    Ok(match suite {
        Suite::MOracle => (
            format!(
                "50 seeded (r, s, theta), r, s in [1, 4], theta in [0, pi], icosahedral resolution {d}, plus 8 near the worst"
            ),
            m_oracle(d)?,
        ),
        Suite::LemmaMinArcs => (
            format!("{d} seeded polygonal arcs outside the unit ball, 2 to 31 segments"),
            lemma_min_arcs(d)?,
        ),
        Suite::Prop3LargeBeta => {
            let beta = axis("beta", FRAC_PI_3, FRAC_PI_2);
            (
                format!("beta in [pi/3, pi/2], {d} points; (beta, alpha/(pi - 2 beta)) grid of {d}"),
                vec![
                    sweep("4 sin(b)(1 + cos(b)) >= 4", &[beta], d, &|x| {
                        4.0 * x[0].sin() * (1.0 + x[0].cos()) - 4.0
                    }),
                    sweep("2 sin(2b) + 4 sin(b) = 4 sin(b)(1 + cos(b))", &[beta], d, &|x| {
                        let b = x[0];
                        identity(2.0 * (2.0 * b).sin() + 4.0 * b.sin(), 4.0 * b.sin() * (1.0 + b.cos()))
                    }),
                    sweep("m1(2, pi - 2b) = 2 sin(2b)", &[beta], d, &|x| {
                        identity(m1v(2.0, PI - 2.0 * x[0]), 2.0 * (2.0 * x[0]).sin())
                    }),
                    concavity_check("m1(2, a) + m1(2, c) >= m1(2, a + c)", beta, d),
                ],
            )
        }
        Suite::Prop3SmallBeta => {
            let beta = axis("beta", 0.0, FRAC_PI_3);
            let base = 3f64.sqrt() + 2.0 * PI / 3.0;
            (
                format!("beta in [0, pi/3], {d} points; (beta, alpha/(pi - 2 beta)) grid of {d}"),
                vec![
                    sweep("sqrt3 + 2pi/3 - 2b + 4 sin(b) >= sqrt3 + 2pi/3", &[beta], d, &|x| {
                        base - 2.0 * x[0] + 4.0 * x[0].sin() - base
                    }),
                    sweep("m1(2, pi - 2b) = sqrt3 + 2pi/3 - 2b", &[beta], d, &|x| {
                        identity(m1v(2.0, PI - 2.0 * x[0]), base - 2.0 * x[0])
                    }),
                    concavity_check("m1(2, a) + m1(2, c) >= m1(2, a + c)", beta, d),
                ],
            )
        }
        Suite::Prop3Constant => {
            let v = m1v(2.0, PI);
            let point = vec![("s".to_string(), 2.0), ("theta".to_string(), PI)];
            (
                "s = 2, theta = pi".to_string(),
                vec![
                    Check {
                        label: "4 > m1(2, pi)",
                        margin: strict(4.0, v),
                        point: point.clone(),
                    },
                    Check {
                        label: "|m1(2, pi) - 3.826| < 5e-4",
                        margin: strict(5e-4, (v - 3.826).abs()),
                        point: point.clone(),
                    },
                    Check {
                        label: "m1(2, pi) = sqrt3 + 2pi/3",
                        margin: identity(v, 3f64.sqrt() + 2.0 * PI / 3.0),
                        point,
                    },
                ],
            )
        }
        Suite::Thm5AngleMax => (
            format!("(t, |a|, |b|) in (0, 2] x [1, 4] x [1, 4], {d} points, realizable triples only"),
            vec![sweep(
                "angle a0b <= 2 arcsin(t/2)",
                &[open_axis("t", 0.0, 2.0), axis("|a|", 1.0, 4.0), axis("|b|", 1.0, 4.0)],
                d,
                &|x| {
                    let (t, ra, rb) = (x[0], x[1], x[2]);
                    if t < (ra - rb).abs() || t > ra + rb {
                        return f64::INFINITY;
                    }
                    let c = ((ra * ra + rb * rb - t * t) / (2.0 * ra * rb)).clamp(-1.0, 1.0);
                    2.0 * (t / 2.0).asin() - c.acos()
                },
            )],
        ),
        Suite::Thm5ThetaLarge => {
            let theta = axis("theta", FRAC_PI_2, PI);
            let t = open_axis("t", 0.0, 2.0);
            (
                format!(
                    "theta in [pi/2, pi], t in (0, 2], {d} points each; (theta, |x|, |a|) in [pi/2, pi] x [2, 5] x [1, 4], {d} points"
                ),
                vec![
                    sweep("theta + 2 sin(theta) >= pi", &[theta], d, &|x| {
                        x[0] + 2.0 * x[0].sin() - PI
                    }),
                    sweep("m1(2, theta) = sqrt3 + theta - pi/3", &[theta], d, &|x| {
                        identity(m1v(2.0, x[0]), 3f64.sqrt() + x[0] - FRAC_PI_3)
                    }),
                    sweep(
                        "|x - a| >= 2 sin(theta)",
                        &[theta, axis("|x|", 2.0, 5.0), axis("|a|", 1.0, 4.0)],
                        d,
                        &|x| {
                            let (th, rx, ra) = (x[0], x[1], x[2]);
                            // c on the negative axis, a on the positive one.
                            let p = Vec3::new(-rx * th.cos(), rx * th.sin(), 0.0);
                            (p - Vec3::new(ra, 0.0, 0.0)).norm() - 2.0 * th.sin()
                        },
                    ),
                    sweep("2pi/3 + sqrt3 - t > pi - 2 arcsin(t/2)", &[t], d, &|x| {
                        strict(
                            2.0 * PI / 3.0 + 3f64.sqrt() - x[0],
                            PI - 2.0 * (x[0] / 2.0).asin(),
                        )
                    }),
                ],
            )
        }
        Suite::Thm5ThetaSmall => {
            let axes = [
                axis("|c|", 1.0, 3.0),
                axis("|x|", 2.0, 5.0),
                axis("theta", 0.0, FRAC_PI_2),
            ];
            let n = per_axis(d, 3);
            let step = FRAC_PI_2 / n as f64;
            // c on the positive axis, a = -c/|c|, x at angle theta from c.
            let h = move |rc: f64, rx: f64, th: f64| {
                let x = Vec3::new(rx * th.cos(), rx * th.sin(), 0.0);
                (x - Vec3::new(rc, 0.0, 0.0)).norm() + (x - Vec3::new(-1.0, 0.0, 0.0)).norm()
            };
            let mono_axes = [axes[0], axes[1], axis("theta", 0.0, FRAC_PI_2 - step)];
            (
                format!(
                    "(|c|, |x|, theta) in [1, 3] x [2, 5] x [0, pi/2], {d} points, theta step {step:.3e} for monotonicity; t in (0, 2], {d} points"
                ),
                vec![
                    sweep("|x - c| + |x - a| nondecreasing in theta", &mono_axes, d, &move |x| {
                        h(x[0], x[1], x[2] + step) - h(x[0], x[1], x[2])
                    }),
                    sweep("|x - c| + |x - a| >= (|x| - |c|) + (|x| + 1)", &axes, d, &move |x| {
                        h(x[0], x[1], x[2]) - ((x[1] - x[0]) + (x[1] + 1.0))
                    }),
                    sweep(
                        "pi/2 + 5 - t > 2pi - 2 arcsin(t/2)",
                        &[open_axis("t", 0.0, 2.0)],
                        d,
                        &|x| strict(FRAC_PI_2 + 5.0 - x[0], 2.0 * PI - 2.0 * (x[0] / 2.0).asin()),
                    ),
                ],
            )
        }
        Suite::RemarkQuarter => {
            let s = axis("s", 1.0, 100.0);
            (
                format!("s in [1, 100], {d} points"),
                vec![
                    sweep("m1(s, pi) > sqrt(s^2 + 1) + pi/2", &[s], d, &|x| {
                        strict(m1v(x[0], PI), (x[0] * x[0] + 1.0).sqrt() + FRAC_PI_2)
                    }),
                    sweep("m1(s, pi) > s + pi/2", &[s], d, &|x| {
                        strict(m1v(x[0], PI), x[0] + FRAC_PI_2)
                    }),
                ],
            )
        }
    })
}

/// Runs one suite at the given density (see [`Suite::default_density`]).
pub fn verify_suite(suite: Suite, density: usize) -> Result<VerifyReport> {
    if density == 0 {
        return Err(Error::Domain("density must be >= 1".into()));
    }
    let (grid, checks) = suite_checks(suite, density)?;
    let worst = checks
        .iter()
        .min_by(|x, y| x.margin.total_cmp(&y.margin))
        .expect("every suite has a check");
    let mut point = worst.point.clone();
    point.retain(|(_, v)| v.is_finite());
    Ok(VerifyReport {
        suite: suite.name().to_string(),
        grid_spec: format!("{grid}; worst check: {}", worst.label),
        worst_margin: worst.margin,
        worst_point: point,
        passed: worst.margin >= -PASS_TOL,
    })
}

/// Looks the suite up by name and runs it.
pub fn verify_suite_named(name: &str, density: Option<usize>) -> Result<VerifyReport> {
    let suite: Suite = name.parse()?;
    verify_suite(suite, density.unwrap_or(suite.default_density()))
}
