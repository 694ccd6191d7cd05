use knotdist::geometry::to_text;
use knotdist::knots::{circle, connect_sum, isotopy_safe_move, open_trefoil, torus_knot, ConnectSumSpec};
use knotdist::{PolyCurve, Vec3};
use proptest::prelude::*;

#[test]
fn generators_are_simple_and_deterministic() {
    let build: Vec<Box<dyn Fn() -> PolyCurve>> = vec![
        Box::new(|| circle(3).unwrap()),
        Box::new(|| circle(2048).unwrap()),
        Box::new(|| torus_knot(2, 3, 2.0, 1.0, 256).unwrap()),
        Box::new(|| torus_knot(2, 5, 3.0, 1.0, 200).unwrap()),
        Box::new(|| torus_knot(3, 4, 2.5, 1.0, 300).unwrap()),
        Box::new(|| open_trefoil(128).unwrap()),
        Box::new(|| connect_sum(&ConnectSumSpec::with_trefoil(64, 2, 0.1).unwrap()).unwrap()),
    ];
    for f in build {
        let a = f();
        assert!(a.is_simple_default());
        assert_eq!(to_text(&a), to_text(&f()));
    }
}

/// Finds `tile` scaled by `scale` in `verts` starting at or after `from`,
/// comparing all distances to the first tile vertex and between neighbours.
fn find_copy(verts: &[Vec3], tile: &PolyCurve, scale: f64, from: usize) -> Option<usize> {
    let t = tile.vertices();
    let m = t.len();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.max(1e-300);
    (from..=verts.len().saturating_sub(m)).find(|&j| {
        (1..m).all(|k| {
            close((verts[j + k] - verts[j]).norm(), scale * (t[k] - t[0]).norm())
                && close((verts[j + k] - verts[j + k - 1]).norm(), scale * (t[k] - t[k - 1]).norm())
        })
    })
}

#[test]
fn connect_sum_contains_scaled_copies() {
    for copies in 1..=3 {
        let spec = ConnectSumSpec::with_trefoil(64, copies, 0.1).unwrap();
        let c = connect_sum(&spec).unwrap();
        let mut from = 0;
        for k in 0..copies {
            let scale = 0.1f64.powi(k as i32);
            let at = find_copy(c.vertices(), &spec.tile, scale, from)
                .unwrap_or_else(|| panic!("copy {k} of {copies} not found"));
            from = at + spec.tile.len();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn safe_moves_keep_the_curve_simple(
        which in 0usize..3,
        vertex in 0usize..64,
        d in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        size in -3.0..0.5f64,
    ) {
        let c = match which {
            0 => torus_knot(2, 3, 2.0, 1.0, 64).unwrap(),
            1 => circle(64).unwrap(),
            _ => open_trefoil(64).unwrap(),
        };
        let v = vertex % c.len();
        let target = c.vertex(v) + Vec3::new(d.0, d.1, d.2) * 10f64.powf(size);
        if isotopy_safe_move(&c, v, target) {
            let mut verts = c.vertices().to_vec();
            verts[v] = target;
            let moved = PolyCurve::new(verts, c.is_closed()).unwrap();
            prop_assert!(moved.is_simple_default());
        }
    }
}
