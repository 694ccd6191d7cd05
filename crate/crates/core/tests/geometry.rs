mod common;

use common::{random_closed_curve, random_simple_curve};
use knotdist::geometry::{parse_json, parse_text, to_json, to_text};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chord_never_exceeds_arc(seed in any::<u64>(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let c = random_simple_curve(seed, 40);
        let l = c.total_length();
        let p = c.point_at(a * l).unwrap();
        let q = c.point_at(b * l).unwrap();
        let d = c.arc_distance(&p, &q).unwrap();
        prop_assert!(c.chord(&p, &q) <= d * (1.0 + 1e-12) + 1e-15 * l);
    }

    #[test]
    fn arc_distance_is_symmetric(seed in any::<u64>(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let c = random_simple_curve(seed, 40);
        let l = c.total_length();
        let p = c.point_at(a * l).unwrap();
        let q = c.point_at(b * l).unwrap();
        prop_assert_eq!(c.arc_distance(&p, &q).unwrap(), c.arc_distance(&q, &p).unwrap());
    }

    #[test]
    fn complementary_arcs_sum_to_length(seed in any::<u64>(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let c = random_closed_curve(seed, 40);
        let l = c.total_length();
        let (s, t) = (a * l, b * l);
        let d = c.arc_distance_coords(s, t);
        let forward = (t - s).rem_euclid(l);
        let backward = (s - t).rem_euclid(l);
        prop_assert!((forward + backward - l).abs() <= 1e-12 * l || forward == 0.0);
        prop_assert!((d - forward.min(backward)).abs() <= 1e-12 * l);
        prop_assert!(d <= 0.5 * l);
    }

    #[test]
    fn point_at_round_trip(seed in any::<u64>(), a in 0.0..=1.0f64) {
        let c = random_simple_curve(seed, 40);
        let l = c.total_length();
        let s = a * l;
        let p = c.point_at(s).unwrap();
        prop_assert!((p.arclen - s).abs() <= 1e-12 * l || (c.is_closed() && (p.arclen - s).abs() >= l * (1.0 - 1e-12)));
        let again = c.point_at(p.arclen).unwrap();
        prop_assert!((again.arclen - p.arclen).abs() <= 1e-12 * l);
        prop_assert!((c.position(&again) - c.position(&p)).norm() <= 1e-12 * l);
    }

    #[test]
    fn file_formats_round_trip_bit_exact(seed in any::<u64>()) {
        let c = random_simple_curve(seed, 60);
        let text = to_text(&c);
        let back = parse_text(&text).unwrap();
        prop_assert_eq!(back.vertices(), c.vertices());
        prop_assert_eq!(back.is_closed(), c.is_closed());
        let json = to_json(&c);
        let back = parse_json(&json).unwrap();
        prop_assert_eq!(back.vertices(), c.vertices());
        prop_assert_eq!(to_text(&back), text);
    }
}

#[test]
fn out_of_range_arclength() {
    let mut seen = (false, false);
    for seed in 0..50 {
        let c = random_simple_curve(seed, 20);
        let l = c.total_length();
        if c.is_closed() {
            seen.0 = true;
            let p = c.point_at(-0.25 * l).unwrap();
            assert!((p.arclen - 0.75 * l).abs() <= 1e-12 * l);
            assert!(c.point_at(f64::NAN).is_err());
        } else {
            seen.1 = true;
            assert!(c.point_at(-1e-3 * l).is_err());
            assert!(c.point_at(l * 1.01).is_err());
            assert_eq!(c.point_at(l).unwrap().t, 1.0);
        }
    }
    assert_eq!(seen, (true, true));
}
