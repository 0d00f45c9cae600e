use carleson_core::geometry::{
    angular_distance, dyadic_index, dyadic_length, normalize_angle, CarlesonSquare, DiscPoint,
    DyadicArc, GeneralArc,
};
use proptest::prelude::*;

#[test]
fn levels_partition_the_circle_to_level_ten() {
    let mut squares = 0;
    for level in 0..=10u32 {
        let count = 1u64 << level;
        let arcs: Vec<DyadicArc> = (0..count).map(|i| DyadicArc::new(level, i)).collect();
        squares += arcs.len();
        let total: f64 = arcs.iter().map(|a| a.length()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for w in arcs.windows(2) {
            assert_eq!(w[0].end(), w[1].start());
        }
        assert_eq!(arcs[0].start(), 0.0);
        assert_eq!(arcs.last().unwrap().end(), 1.0);
        for a in &arcs {
            let [l, r] = a.children();
            assert_eq!(l.parent(), Some(*a));
            assert_eq!(r.parent(), Some(*a));
            assert_eq!(l.start(), a.start());
            assert_eq!(r.end(), a.end());
            assert_eq!(l.end(), r.start());
            assert!(a.contains_arc(&l) && a.contains_arc(&r));
            assert_eq!(a.descendants(level + 2).count(), 4);
            for k in 0..=level {
                let anc = a.ancestor(k);
                assert!(anc.start() <= a.start() && a.end() <= anc.end());
            }
            // Points of the square: inside iff gap <= length and angle in arc.
            let q = CarlesonSquare::over(*a);
            let inside = DiscPoint::from_polar(1.0 - 0.5 * a.length(), a.center());
            assert!(q.contains(&inside));
            if level > 0 {
                let too_deep = DiscPoint::from_polar(1.0 - 1.5 * a.length(), a.center());
                assert!(!q.contains(&too_deep));
            }
            assert!(q.top_half_contains(&inside));
        }
    }
    assert_eq!(squares, 2047);
}

#[test]
fn every_angle_has_one_arc_per_level() {
    for k in 0..1000 {
        let angle = (k as f64 + 0.37) / 1000.0;
        for level in 0..=10 {
            let hits = (0..1u64 << level)
                .filter(|&i| DyadicArc::new(level, i).contains_angle(angle))
                .count();
            assert_eq!(hits, 1);
            assert!(DyadicArc::containing(angle, level).contains_angle(angle));
        }
    }
}

/// Independent check of the two-square cover: both arcs have the same
/// dyadic length `l` with `|I| <= l <= 2|I|`, the second follows the first,
/// and `I` starts in the first and ends inside the union.
fn cover_ok(arc: &GeneralArc) -> bool {
    let [a, b] = arc.dyadic_cover();
    if arc.is_full() {
        return a.level == 0 && b.level == 0;
    }
    let l = 2f64.powi(-(a.level as i32));
    if a.level != b.level || l < arc.length || l > 2.0 * arc.length + 1e-15 {
        return false;
    }
    let n = 1u64 << a.level;
    if b.index != (a.index + 1) % n {
        return false;
    }
    let offset = (arc.start - a.index as f64 * l).rem_euclid(1.0);
    offset < l && offset + arc.length <= 2.0 * l + 1e-12
}

#[test]
fn ten_thousand_random_arcs_are_covered() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..10_000 {
        let start: f64 = rng.gen();
        let length = 2f64.powf(-rng.gen_range(0.0..30.0));
        if !cover_ok(&GeneralArc::new(start, length)) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

proptest! {
    #[test]
    fn cover_holds(start in 0.0f64..1.0, exp in 0.0f64..40.0) {
        prop_assert!(cover_ok(&GeneralArc::new(start, 2f64.powf(-exp))));
    }

    #[test]
    fn dyadic_length_exact(level in 0u32..=52) {
        prop_assert_eq!(dyadic_length(level), 2f64.powi(-(level as i32)));
    }

    #[test]
    fn normalized_angles_land_in_unit_interval(a in -1e6f64..1e6) {
        let n = normalize_angle(a);
        prop_assert!((0.0..1.0).contains(&n));
        prop_assert!(angular_distance(a, n) < 1e-9);
    }

    #[test]
    fn distance_is_symmetric_and_bounded(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let d = angular_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert_eq!(d, angular_distance(b, a));
    }

    #[test]
    fn index_matches_floor(angle in 0.0f64..1.0, level in 0u32..30) {
        let i = dyadic_index(angle, level);
        let l = dyadic_length(level);
        prop_assert!(i as f64 * l <= angle && angle < (i + 1) as f64 * l);
    }

    #[test]
    fn polar_round_trip(r in 0.0f64..0.999, angle in 0.0f64..1.0) {
        let p = DiscPoint::from_polar(r, angle);
        let q = DiscPoint::from_complex(p.to_complex());
        prop_assert!((q.radius() - r).abs() < 1e-12);
        prop_assert!(r < 1e-9 || angular_distance(q.angle(), angle) < 1e-9);
    }

    #[test]
    fn dilation_contains_original(start in 0.0f64..1.0, len in 1e-6f64..0.3, factor in 1.0f64..3.0) {
        let a = GeneralArc::new(start, len);
        prop_assert!(a.dilate(factor).contains_arc(&a));
    }
}
