#![allow(dead_code)]

use knotdist::knots::torus_knot;
use knotdist::{PolyCurve, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// A random simple curve with `3..=max_n` vertices, drawn from one of
/// three families: wobbly star-shaped loops, perturbed torus knots and
/// open random walks. Candidates that fail the simplicity test are redrawn.
pub fn random_simple_curve(seed: u64, max_n: usize) -> PolyCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let family = rng.gen_range(0..3);
        let curve = match family {
            0 => star_loop(&mut rng, max_n),
            1 => perturbed_knot(&mut rng, max_n),
            _ => open_walk(&mut rng, max_n),
        };
        if let Some(c) = curve {
            if c.is_simple_default() {
                return c;
            }
        }
    }
}

pub fn random_closed_curve(seed: u64, max_n: usize) -> PolyCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let c = if rng.gen_bool(0.5) {
            star_loop(&mut rng, max_n)
        } else {
            perturbed_knot(&mut rng, max_n)
        };
        if let Some(c) = c {
            if c.is_simple_default() {
                return c;
            }
        }
    }
}

fn star_loop(rng: &mut ChaCha8Rng, max_n: usize) -> Option<PolyCurve> {
    let n = rng.gen_range(3..=max_n.max(3));
    let k = rng.gen_range(1..6) as f64;
    let amp = rng.gen_range(0.0..0.6);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let tilt = rng.gen_range(0.0..0.5);
    let verts = (0..n)
        .map(|i| {
            let a = 2.0 * PI * (i as f64 + rng.gen_range(-0.3..0.3)) / n as f64;
            let r = 1.0 + amp * (k * a + phase).sin();
            Vec3::new(r * a.cos(), r * a.sin(), tilt * rng.gen_range(-1.0..1.0))
        })
        .collect();
    PolyCurve::new(verts, true).ok()
}

fn perturbed_knot(rng: &mut ChaCha8Rng, max_n: usize) -> Option<PolyCurve> {
    let n = rng.gen_range(24..=max_n.max(24));
    let (p, q) = [(2, 3), (2, 5), (3, 2)][rng.gen_range(0..3)];
    let base = torus_knot(p, q, 2.0, 1.0, n).ok()?;
    let noise = rng.gen_range(0.0..0.05);
    let verts = base
        .vertices()
        .iter()
        .map(|v| v + Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * noise)
        .collect();
    PolyCurve::new(verts, true).ok()
}

fn open_walk(rng: &mut ChaCha8Rng, max_n: usize) -> Option<PolyCurve> {
    let n = rng.gen_range(2..=max_n.max(2));
    let mut p = Vec3::zeros();
    let mut dir = Vec3::x();
    let mut verts = vec![p];
    for _ in 1..n {
        let turn = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        dir = (dir + turn * 0.8).normalize();
        p += dir * rng.gen_range(0.2..1.5);
        verts.push(p);
    }
    PolyCurve::new(verts, false).ok()
}
